#include "fairbook/recommendations.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <thread>

#include "fairbook/csv.hpp"
#include "fairbook/error.hpp"

namespace fairbook {

std::vector<std::vector<ItemIndex>> RecommendationList::item_lists(std::size_t n_users) const {
  std::vector<std::vector<ItemIndex>> out(n_users);
  for (const auto& ur : users) {
    if (ur.user >= n_users) continue;
    auto& dst = out[ur.user];
    for (const auto& s : ur.items) dst.push_back(s.item);
  }
  return out;
}

std::vector<ScoredItem> top_n(std::span<const double> scores, std::span<const ItemIndex> mask, std::size_t n) {
  std::vector<ItemIndex> candidates;
  candidates.reserve(scores.size());
  // `mask` is sorted (RatingMatrix rows are).
  std::size_t m = 0;
  for (ItemIndex i = 0; i < scores.size(); ++i) {
    while (m < mask.size() && mask[m] < i) ++m;
    if (m < mask.size() && mask[m] == i) continue;
    candidates.push_back(i);
  }
  auto better = [&](ItemIndex a, ItemIndex b) { return scores[a] != scores[b] ? scores[a] > scores[b] : a < b; };
  const std::size_t take = std::min(n, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(), better);
  std::vector<ScoredItem> out;
  out.reserve(take);
  for (std::size_t r = 0; r < take; ++r) out.push_back({candidates[r], scores[candidates[r]]});
  return out;
}

RecommendationList recommend_top_n(const RecModel& model, const RatingMatrix& train, std::size_t n,
                                   std::span<const UserIndex> users, unsigned jobs) {
  if (n == 0) throw ContractError("recommend_top_n: n must be >= 1");
  if (model.n_users() != train.n_users() || model.n_items() != train.n_items()) {
    throw ContractError("recommend_top_n: model and training matrix disagree on dimensions");
  }
  std::vector<UserIndex> all;
  if (users.empty()) {
    all.resize(train.n_users());
    std::iota(all.begin(), all.end(), UserIndex{0});
    users = all;
  }

  std::vector<double> popularity(train.n_items());
  for (ItemIndex i = 0; i < popularity.size(); ++i) popularity[i] = static_cast<double>(train.item_degree(i));

  RecommendationList list;
  list.n = n;
  list.users.resize(users.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<double> scores(train.n_items());
    for (std::size_t k = begin; k < end; ++k) {
      const UserIndex u = users[k];
      auto& out = list.users[k];
      out.user = u;
      if (train.user_degree(u) == 0) {
        out.cold_fallback = true;
        out.items = top_n(popularity, {}, n);
      } else {
        model.score_user(u, scores);
        out.items = top_n(scores, train.user_items(u), n);
      }
    }
  };
  jobs = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(users.size())));
  if (jobs == 1) {
    work(0, users.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (users.size() + jobs - 1) / jobs;
    for (unsigned t = 0; t < jobs; ++t) {
      const std::size_t b = t * chunk, e = std::min(users.size(), b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }
  std::sort(list.users.begin(), list.users.end(),
            [](const auto& a, const auto& b) { return a.user < b.user; });
  for (const auto& ur : list.users) {
    if (ur.items.size() < n) {
      list.warnings.push_back("user " + std::to_string(ur.user) + ": only " + std::to_string(ur.items.size()) +
                              " unmasked items available");
    }
  }
  return list;
}

std::string recommendations_csv(const RecommendationList& list) {
  std::string out = "user_index,rank,item_index,score\n";
  for (const auto& ur : list.users) {
    for (std::size_t r = 0; r < ur.items.size(); ++r) {
      out += std::to_string(ur.user);
      out += ',';
      out += std::to_string(r + 1);
      out += ',';
      out += std::to_string(ur.items[r].item);
      out += ',';
      out += csv::fmt(ur.items[r].score);
      out += '\n';
    }
  }
  return out;
}

namespace {

template <typename T>
bool parse_number(const std::string& s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

struct ImportRow {
  std::size_t line;
  std::size_t rank;
  ItemIndex item;
  double score;
};

}  // namespace

ImportResult import_recommendations(std::istream& in, std::size_t n_users, std::size_t n_items,
                                    const RatingMatrix* train, bool strict) {
  ImportResult result;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("recommendations file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "user_index,rank,item_index,score") {
    throw ValidationError("recommendations file: unexpected header '" + line + "'");
  }

  std::map<UserIndex, std::vector<ImportRow>> by_user;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row_no;
    const auto f = csv::split_line(line);
    auto bad = [&](const std::string& why) { result.errors.push_back("row " + std::to_string(row_no) + ": " + why); };
    if (f.size() != 4) {
      bad("expected 4 fields");
      continue;
    }
    std::uint64_t user = 0, rank = 0, item = 0;
    double score = 0.0;
    if (!parse_number(f[0], user) || !parse_number(f[1], rank) || !parse_number(f[2], item) ||
        !parse_number(f[3], score)) {
      bad("unparsable field");
      continue;
    }
    if (user >= n_users) {
      bad("unknown user index " + f[0]);
      continue;
    }
    if (item >= n_items) {
      bad("unknown item index " + f[2]);
      continue;
    }
    if (rank == 0) {
      bad("rank must start at 1");
      continue;
    }
    if (train && train->contains(static_cast<UserIndex>(user), static_cast<ItemIndex>(item))) {
      bad("item " + f[2] + " is in the training profile of user " + f[0]);
      continue;
    }
    by_user[static_cast<UserIndex>(user)].push_back({row_no, rank, static_cast<ItemIndex>(item), score});
  }

  std::size_t longest = 0;
  for (auto& [user, rows] : by_user) {
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
    UserRecommendations ur;
    ur.user = user;
    std::set<ItemIndex> seen;
    bool ok = true;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto& r = rows[k];
      auto bad = [&](const std::string& why) {
        result.errors.push_back("row " + std::to_string(r.line) + ": " + why);
        ok = false;
      };
      if (r.rank != k + 1) bad("rank " + std::to_string(r.rank) + " breaks the 1..m sequence for user " + std::to_string(user));
      if (!seen.insert(r.item).second) bad("duplicate item " + std::to_string(r.item) + " for user " + std::to_string(user));
      if (k > 0 && r.score > rows[k - 1].score) bad("score increases at rank " + std::to_string(r.rank) + " for user " + std::to_string(user));
      ur.items.push_back({r.item, r.score});
    }
    if (ok) {
      longest = std::max(longest, ur.items.size());
      result.list.users.push_back(std::move(ur));
    }
  }
  result.list.n = longest > 0 ? longest : kDefaultListLength;
  if (strict && !result.errors.empty()) {
    std::string msg = "recommendations file failed validation:";
    for (const auto& e : result.errors) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  return result;
}

ImportResult import_recommendations(const std::filesystem::path& path, std::size_t n_users,
                                    std::size_t n_items, const RatingMatrix* train, bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open recommendations file " + path.string());
  try {
    return import_recommendations(in, n_users, n_items, train, strict);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> list_violations(const RecommendationList& list, const RatingMatrix& train) {
  std::vector<std::string> out;
  for (const auto& ur : list.users) {
    const std::string who = "user " + std::to_string(ur.user) + ": ";
    if (ur.items.size() > list.n) out.push_back(who + "list longer than n");
    std::set<ItemIndex> seen;
    for (std::size_t r = 0; r < ur.items.size(); ++r) {
      const auto& s = ur.items[r];
      if (!seen.insert(s.item).second) out.push_back(who + "duplicate item " + std::to_string(s.item));
      if (ur.user < train.n_users() && train.contains(ur.user, s.item)) {
        out.push_back(who + "training item " + std::to_string(s.item) + " recommended");
      }
      if (r > 0) {
        const auto& prev = ur.items[r - 1];
        if (s.score > prev.score || (s.score == prev.score && s.item < prev.item)) {
          out.push_back(who + "rank " + std::to_string(r + 1) + " out of score order");
        }
      }
    }
  }
  return out;
}

}  // namespace fairbook

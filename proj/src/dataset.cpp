#include "fairbook/dataset.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "fairbook/csv.hpp"
#include "fairbook/error.hpp"

namespace fairbook {
namespace {

std::string latin1_to_utf8(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_line(std::string_view line, RawRating& row) {
  if (line.size() < 2 || line.front() != '"' || line.back() != '"') return false;
  std::string_view inner = line.substr(1, line.size() - 2);
  constexpr std::string_view sep = "\";\"";
  const auto a = inner.find(sep);
  if (a == std::string_view::npos) return false;
  const auto b = inner.find(sep, a + sep.size());
  if (b == std::string_view::npos) return false;
  if (inner.find(sep, b + sep.size()) != std::string_view::npos) return false;

  std::string_view user = inner.substr(0, a);
  std::string_view isbn = inner.substr(a + sep.size(), b - a - sep.size());
  std::string_view rating = inner.substr(b + sep.size());
  int value = 0;
  if (user.empty() || isbn.empty() || !parse_int(rating, value)) return false;
  if (value < 0 || value > 10) return false;
  row.user_id = latin1_to_utf8(user);
  row.isbn = latin1_to_utf8(isbn);
  row.rating = value;
  return true;
}

std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

ParseResult parse_ratings(std::istream& in, bool strict) {
  ParseResult result;
  std::string line;
  if (!std::getline(in, line)) {
    if (in.bad()) throw IngestError("ratings stream is unreadable");
    return result;
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++result.data_lines;
    RawRating row;
    if (parse_line(line, row)) {
      result.rows.push_back(std::move(row));
    } else {
      ++result.malformed;
    }
  }
  if (in.bad()) throw IngestError("ratings stream failed while reading");
  if (strict && result.malformed * 100 > result.data_lines) {
    throw IngestError("strict mode: " + std::to_string(result.malformed) + " of " +
                      std::to_string(result.data_lines) + " lines are malformed (>1%)");
  }
  return result;
}

ParseResult parse_ratings_file(const std::filesystem::path& path, bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open ratings file " + path.string());
  return parse_ratings(in, strict);
}

Dataset::Dataset(std::vector<Interaction> interactions, std::vector<std::string> user_ids,
                 std::vector<std::string> item_ids)
    : interactions_(std::move(interactions)),
      user_ids_(std::move(user_ids)),
      item_ids_(std::move(item_ids)) {
  std::vector<bool> user_seen(user_ids_.size()), item_seen(item_ids_.size());
  std::unordered_set<std::uint64_t> pairs;
  pairs.reserve(interactions_.size());
  for (const auto& x : interactions_) {
    if (x.user >= user_ids_.size() || x.item >= item_ids_.size()) {
      throw ContractError("interaction index out of range");
    }
    if (x.rating < 1 || x.rating > 10) throw ContractError("rating outside [1, 10]");
    if (!pairs.insert(pair_key(x.user, x.item)).second) {
      throw ContractError("duplicate (user, item) pair " + std::to_string(x.user) + "," +
                          std::to_string(x.item));
    }
    user_seen[x.user] = true;
    item_seen[x.item] = true;
  }
  for (std::size_t u = 0; u < user_seen.size(); ++u) {
    if (!user_seen[u]) throw ContractError("user index " + std::to_string(u) + " has no interactions");
  }
  for (std::size_t i = 0; i < item_seen.size(); ++i) {
    if (!item_seen[i]) throw ContractError("item index " + std::to_string(i) + " has no interactions");
  }
}

std::vector<std::size_t> Dataset::profile_sizes() const {
  std::vector<std::size_t> sizes(n_users());
  for (const auto& x : interactions_) ++sizes[x.user];
  return sizes;
}

std::vector<std::size_t> Dataset::reader_counts() const {
  std::vector<std::size_t> counts(n_items());
  for (const auto& x : interactions_) ++counts[x.item];
  return counts;
}

std::vector<std::vector<ItemIndex>> Dataset::profiles() const {
  std::vector<std::vector<ItemIndex>> out(n_users());
  for (const auto& x : interactions_) out[x.user].push_back(x.item);
  return out;
}

std::string Provenance::report() const {
  std::ostringstream os;
  os << "data_lines = " << data_lines << '\n'
     << "malformed = " << malformed << '\n'
     << "parsed = " << parsed << '\n'
     << "dropped_implicit = " << dropped_implicit << '\n'
     << "dropped_duplicate = " << dropped_duplicate << '\n'
     << "dropped_user_filter = " << dropped_user_filter << '\n'
     << "dropped_item_filter = " << dropped_item_filter << '\n'
     << "kept = " << kept << '\n'
     << "users_dropped = " << users_dropped << '\n'
     << "items_dropped = " << items_dropped << '\n';
  return os.str();
}

PreprocessResult preprocess(std::span<const RawRating> raw, std::size_t min_ratings) {
  if (raw.empty()) throw ContractError("preprocess: no raw ratings");
  Provenance prov;
  prov.parsed = raw.size();
  prov.data_lines = raw.size();

  // Intern raw ids so later passes work on integers.
  std::unordered_map<std::string, std::uint32_t> user_tmp, item_tmp;
  std::vector<const std::string*> user_names, item_names;
  struct Row {
    std::uint32_t user, item;
    int rating;
  };
  std::vector<Row> rows;
  rows.reserve(raw.size());
  for (const auto& r : raw) {
    if (r.rating == 0) {
      ++prov.dropped_implicit;
      continue;
    }
    auto [uit, unew] = user_tmp.try_emplace(r.user_id, static_cast<std::uint32_t>(user_names.size()));
    if (unew) user_names.push_back(&uit->first);
    auto [iit, inew] = item_tmp.try_emplace(r.isbn, static_cast<std::uint32_t>(item_names.size()));
    if (inew) item_names.push_back(&iit->first);
    rows.push_back({uit->second, iit->second, r.rating});
  }

  auto fail_empty = [&](const std::string& step) {
    throw IngestError("preprocess: no interactions left after " + step + "\n" + prov.report());
  };
  if (rows.empty()) fail_empty("implicit removal");

  std::unordered_map<std::uint64_t, std::size_t> last;
  last.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) last[pair_key(rows[k].user, rows[k].item)] = k;
  std::vector<Row> dedup;
  dedup.reserve(last.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (last[pair_key(rows[k].user, rows[k].item)] == k) dedup.push_back(rows[k]);
  }
  prov.dropped_duplicate = rows.size() - dedup.size();

  std::vector<std::size_t> user_count(user_names.size());
  for (const auto& r : dedup) ++user_count[r.user];
  std::vector<Row> after_users;
  for (const auto& r : dedup) {
    if (user_count[r.user] >= min_ratings) after_users.push_back(r);
  }
  prov.dropped_user_filter = dedup.size() - after_users.size();
  if (after_users.empty()) fail_empty("user filter");

  std::vector<std::size_t> item_count(item_names.size());
  for (const auto& r : after_users) ++item_count[r.item];
  std::vector<Row> kept;
  for (const auto& r : after_users) {
    if (item_count[r.item] >= min_ratings) kept.push_back(r);
  }
  prov.dropped_item_filter = after_users.size() - kept.size();
  prov.kept = kept.size();
  if (kept.empty()) fail_empty("item filter");

  constexpr std::uint32_t kUnset = ~0U;
  std::vector<std::uint32_t> user_dense(user_names.size(), kUnset), item_dense(item_names.size(), kUnset);
  std::vector<std::string> user_ids, item_ids;
  std::vector<Interaction> interactions;
  interactions.reserve(kept.size());
  for (const auto& r : kept) {
    if (user_dense[r.user] == kUnset) {
      user_dense[r.user] = static_cast<std::uint32_t>(user_ids.size());
      user_ids.push_back(*user_names[r.user]);
    }
    if (item_dense[r.item] == kUnset) {
      item_dense[r.item] = static_cast<std::uint32_t>(item_ids.size());
      item_ids.push_back(*item_names[r.item]);
    }
    interactions.push_back({user_dense[r.user], item_dense[r.item], r.rating});
  }
  std::size_t users_after_dedup = 0, items_after_dedup = 0;
  for (auto c : user_count) users_after_dedup += c > 0;
  {
    std::vector<bool> seen(item_names.size());
    for (const auto& r : dedup) seen[r.item] = true;
    for (bool s : seen) items_after_dedup += s;
  }
  prov.users_dropped = users_after_dedup - user_ids.size();
  prov.items_dropped = items_after_dedup - item_ids.size();

  return {Dataset(std::move(interactions), std::move(user_ids), std::move(item_ids)), prov};
}

PreprocessResult preprocess(const ParseResult& parsed, std::size_t min_ratings) {
  if (parsed.rows.empty()) {
    throw IngestError("preprocess: ratings file contained no parsable rows (" +
                      std::to_string(parsed.malformed) + " malformed)");
  }
  auto result = preprocess(std::span<const RawRating>(parsed.rows), min_ratings);
  result.provenance.data_lines = parsed.data_lines;
  result.provenance.malformed = parsed.malformed;
  return result;
}

DatasetStats dataset_stats(const Dataset& d) {
  DatasetStats s;
  s.n_users = d.n_users();
  s.n_items = d.n_items();
  s.n_interactions = d.interactions().size();
  if (s.n_users == 0 || s.n_items == 0) return s;
  const double n = static_cast<double>(s.n_interactions);
  s.interactions_per_user = n / static_cast<double>(s.n_users);
  s.interactions_per_item = n / static_cast<double>(s.n_items);
  s.sparsity = 1.0 - n / (static_cast<double>(s.n_users) * static_cast<double>(s.n_items));
  return s;
}

std::string interactions_csv(std::span<const Interaction> rows) {
  std::string out = "user_index,item_index,rating\n";
  out.reserve(rows.size() * 16);
  for (const auto& x : rows) {
    out += std::to_string(x.user);
    out += ',';
    out += std::to_string(x.item);
    out += ',';
    out += std::to_string(x.rating);
    out += '\n';
  }
  return out;
}

namespace {

std::string idmap_csv(std::span<const std::string> ids) {
  std::string out = "raw_id,index\n";
  for (std::size_t k = 0; k < ids.size(); ++k) {
    out += csv::escape(ids[k]);
    out += ',';
    out += std::to_string(k);
    out += '\n';
  }
  return out;
}

std::uint32_t to_index(const std::string& s, const std::filesystem::path& path) {
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IngestError(path.string() + ": bad integer '" + s + "'");
  }
  return v;
}

std::vector<std::string> read_idmap(const std::filesystem::path& path) {
  auto rows = csv::read_table(path, "raw_id,index");
  std::vector<std::string> ids(rows.size());
  std::vector<bool> filled(rows.size());
  for (auto& row : rows) {
    if (row.size() != 2) throw IngestError(path.string() + ": expected 2 fields");
    const auto idx = to_index(row[1], path);
    if (idx >= ids.size() || filled[idx]) throw IngestError(path.string() + ": index map is not a bijection");
    ids[idx] = std::move(row[0]);
    filled[idx] = true;
  }
  return ids;
}

}  // namespace

std::vector<Interaction> read_interactions(const std::filesystem::path& path) {
  auto rows = csv::read_table(path, "user_index,item_index,rating");
  std::vector<Interaction> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (row.size() != 3) throw IngestError(path.string() + ": expected 3 fields");
    out.push_back({to_index(row[0], path), to_index(row[1], path),
                   static_cast<int>(to_index(row[2], path))});
  }
  return out;
}

void write_dataset(const Dataset& d, const std::filesystem::path& dir) {
  csv::write_atomic(dir / "dataset.csv", interactions_csv(d.interactions()));
  csv::write_atomic(dir / "idmap_users.csv", idmap_csv(d.user_ids()));
  csv::write_atomic(dir / "idmap_items.csv", idmap_csv(d.item_ids()));
}

Dataset read_dataset(const std::filesystem::path& dir) {
  auto interactions = read_interactions(dir / "dataset.csv");
  auto users = read_idmap(dir / "idmap_users.csv");
  auto items = read_idmap(dir / "idmap_items.csv");
  try {
    return Dataset(std::move(interactions), std::move(users), std::move(items));
  } catch (const ContractError& e) {
    throw IngestError((dir / "dataset.csv").string() + ": " + e.what());
  }
}

}  // namespace fairbook

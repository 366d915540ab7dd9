#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "fairbook/error.hpp"
#include "fairbook/evaluation.hpp"

namespace fairbook {

std::vector<UserRankMetrics> rank_metrics(const RecommendationList& recs, const RatingMatrix& test,
                                          std::size_t n) {
  if (n == 0) throw ContractError("rank_metrics: n must be >= 1");
  std::map<UserIndex, const UserRecommendations*> lists;
  for (const auto& ur : recs.users) lists[ur.user] = &ur;

  std::vector<UserRankMetrics> out;
  for (UserIndex u = 0; u < test.n_users(); ++u) {
    const auto relevant = test.user_items(u);
    if (relevant.empty()) continue;
    UserRankMetrics m;
    m.user = u;
    m.relevant = relevant.size();
    double dcg = 0.0;
    if (auto it = lists.find(u); it != lists.end()) {
      const auto& items = it->second->items;
      for (std::size_t r = 0; r < std::min(n, items.size()); ++r) {
        if (std::binary_search(relevant.begin(), relevant.end(), items[r].item)) {
          ++m.hits;
          dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
        }
      }
    }
    double idcg = 0.0;
    for (std::size_t r = 0; r < std::min(n, relevant.size()); ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    m.precision = static_cast<double>(m.hits) / static_cast<double>(n);
    m.recall = static_cast<double>(m.hits) / static_cast<double>(relevant.size());
    m.ndcg = dcg / idcg;
    out.push_back(m);
  }
  return out;
}

std::vector<TestScore> score_test_pairs(const RecModel& model, const RatingMatrix& test) {
  std::vector<TestScore> out;
  out.reserve(test.nnz());
  std::vector<double> scores(model.n_items());
  for (UserIndex u = 0; u < test.n_users(); ++u) {
    auto items = test.user_items(u);
    if (items.empty()) continue;
    auto ratings = test.user_ratings(u);
    model.score_user(u, scores);
    for (std::size_t k = 0; k < items.size(); ++k) {
      out.push_back({u, items[k], static_cast<int>(ratings[k]), scores[items[k]]});
    }
  }
  return out;
}

std::vector<UserMae> mae_per_user(std::span<const TestScore> scores, bool rating_scale) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : scores) {
    lo = std::min(lo, s.score);
    hi = std::max(hi, s.score);
  }
  auto adjust = [&](double x) {
    if (!rating_scale) x = hi > lo ? 1.0 + 9.0 * (x - lo) / (hi - lo) : 5.5;
    return std::clamp(x, 1.0, 10.0);
  };
  std::map<UserIndex, std::pair<double, std::size_t>> acc;
  for (const auto& s : scores) {
    auto& [sum, n] = acc[s.user];
    sum += std::fabs(adjust(s.score) - s.rating);
    ++n;
  }
  std::vector<UserMae> out;
  out.reserve(acc.size());
  for (const auto& [u, v] : acc) out.push_back({u, v.first / static_cast<double>(v.second), v.second});
  return out;
}

double gap(std::span<const UserIndex> group, const std::vector<std::vector<ItemIndex>>& lists,
           std::span<const double> phi) {
  if (group.empty()) throw ContractError("gap: empty group");
  double total = 0.0;
  for (UserIndex u : group) {
    const auto& items = lists.at(u);
    if (items.empty()) throw ContractError("gap: user " + std::to_string(u) + " has an empty list");
    double s = 0.0;
    for (ItemIndex i : items) s += phi[i];
    total += s / static_cast<double>(items.size());
  }
  return total / static_cast<double>(group.size());
}

DeltaGap delta_gap(double gap_r, double gap_p) {
  if (!(gap_p > 0.0)) throw ContractError("delta_gap: profile GAP must be positive");
  const double ratio = (gap_r - gap_p) / gap_p;
  return {ratio, 100.0 * ratio};
}

std::array<GapRow, 3> gap_report(const GroupAssignment& groups,
                                 const std::vector<std::vector<ItemIndex>>& profiles,
                                 const std::vector<std::vector<ItemIndex>>& recs, std::span<const double> phi) {
  std::array<GapRow, 3> out;
  for (auto g : kAllGroups) {
    const auto& members = groups.users(g);
    std::vector<UserIndex> with_list;
    for (UserIndex u : members) {
      if (u < recs.size() && !recs[u].empty()) with_list.push_back(u);
    }
    auto& row = out[static_cast<int>(g)];
    row.group = g;
    row.gap_p = gap(members, profiles, phi);
    row.gap_r = gap(with_list, recs, phi);
    row.delta = delta_gap(row.gap_r, row.gap_p);
  }
  return out;
}

FrequencyReport recommendation_frequency_correlation(const RecommendationList& recs,
                                                     std::span<const double> phi) {
  FrequencyReport rep;
  rep.rec_count.assign(phi.size(), 0);
  for (const auto& ur : recs.users) {
    for (const auto& s : ur.items) {
      if (s.item >= phi.size()) throw ContractError("recommendation_frequency_correlation: item out of range");
      ++rep.rec_count[s.item];
    }
  }
  std::vector<double> counts(rep.rec_count.begin(), rep.rec_count.end());
  rep.correlation = pearson_correlation(counts, phi);
  return rep;
}

std::array<SignificanceRow, 3> group_significance_test(std::span<const double> value_by_user,
                                                       const GroupAssignment& groups) {
  auto values = [&](UserGroup g) {
    std::vector<double> v;
    for (UserIndex u : groups.users(g)) {
      if (u < value_by_user.size() && !std::isnan(value_by_user[u])) v.push_back(value_by_user[u]);
    }
    return v;
  };
  const std::array<std::pair<UserGroup, UserGroup>, 3> pairs = {
      std::pair{UserGroup::Niche, UserGroup::Diverse},
      std::pair{UserGroup::Niche, UserGroup::BestsellerFocused},
      std::pair{UserGroup::Diverse, UserGroup::BestsellerFocused}};
  std::array<SignificanceRow, 3> out;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    auto& row = out[k];
    row.a = pairs[k].first;
    row.b = pairs[k].second;
    row.test = welch_t_test(values(row.a), values(row.b));
    row.significant = row.test.p < 0.05;
  }
  return out;
}

Correlation tradeoff_correlation(std::span<const double> ndcg, std::span<const double> delta_gap) {
  if (ndcg.size() < 3) throw ContractError("tradeoff_correlation: need at least 3 algorithms");
  return pearson_correlation(ndcg, delta_gap);
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  s.n = values.size();
  if (values.empty()) return s;
  s.mean = mean(values);
  s.sd = stddev(values);
  return s;
}

}  // namespace fairbook

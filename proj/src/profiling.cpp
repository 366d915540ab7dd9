#include "fairbook/profiling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairbook/error.hpp"

namespace fairbook {

ItemPopularity compute_item_popularity(const Dataset& d) {
  ItemPopularity pop;
  pop.reader_count = d.reader_counts();
  const auto n_items = d.n_items();
  const double n_users = static_cast<double>(d.n_users());
  pop.phi.resize(n_items);
  for (std::size_t i = 0; i < n_items; ++i) {
    pop.phi[i] = static_cast<double>(pop.reader_count[i]) / n_users;
  }
  pop.rank_order.resize(n_items);
  std::iota(pop.rank_order.begin(), pop.rank_order.end(), ItemIndex{0});
  std::stable_sort(pop.rank_order.begin(), pop.rank_order.end(), [&](ItemIndex a, ItemIndex b) {
    return pop.reader_count[a] > pop.reader_count[b];
  });
  pop.n_popular = static_cast<std::size_t>(std::floor(kPopularShare * static_cast<double>(n_items)));
  pop.is_popular.assign(n_items, false);
  for (std::size_t r = 0; r < pop.n_popular; ++r) pop.is_popular[pop.rank_order[r]] = true;
  return pop;
}

std::vector<UserProfileStats> user_profile_stats(const Dataset& d, const ItemPopularity& pop) {
  if (pop.phi.size() != d.n_items()) throw ContractError("user_profile_stats: popularity from another dataset");
  std::vector<UserProfileStats> stats(d.n_users());
  std::vector<double> phi_sum(d.n_users());
  for (const auto& x : d.interactions()) {
    auto& s = stats[x.user];
    ++s.profile_size;
    if (pop.is_popular[x.item]) ++s.n_popular;
    phi_sum[x.user] += pop.phi[x.item];
  }
  for (std::size_t u = 0; u < stats.size(); ++u) {
    auto& s = stats[u];
    if (s.profile_size == 0) continue;
    const double n = static_cast<double>(s.profile_size);
    s.ratio_popular = static_cast<double>(s.n_popular) / n;
    s.avg_item_popularity = phi_sum[u] / n;
  }
  return stats;
}

std::size_t count_users_ratio_at_most(std::span<const UserProfileStats> stats, double threshold) {
  return static_cast<std::size_t>(std::count_if(stats.begin(), stats.end(), [&](const auto& s) {
    return static_cast<double>(s.n_popular) <= threshold * static_cast<double>(s.profile_size) + 1e-9;
  }));
}

std::string_view group_name(UserGroup g) {
  switch (g) {
    case UserGroup::Niche:
      return "niche";
    case UserGroup::Diverse:
      return "diverse";
    case UserGroup::BestsellerFocused:
      return "bestseller";
  }
  return "?";
}

UserGroup parse_group(std::string_view name) {
  for (auto g : kAllGroups) {
    if (group_name(g) == name) return g;
  }
  throw ContractError("unknown user group '" + std::string(name) + "'");
}

GroupAssignment assign_groups(std::span<const UserProfileStats> stats) {
  const std::size_t n = stats.size();
  if (n < 5) throw ContractError("assign_groups: need at least 5 users, got " + std::to_string(n));
  std::vector<UserIndex> order(n);
  std::iota(order.begin(), order.end(), UserIndex{0});
  // Compare ratios as exact fractions so equal ratios from different sizes tie.
  std::stable_sort(order.begin(), order.end(), [&](UserIndex a, UserIndex b) {
    const auto& sa = stats[a];
    const auto& sb = stats[b];
    return sa.n_popular * sb.profile_size < sb.n_popular * sa.profile_size;
  });
  const auto edge = static_cast<std::size_t>(std::floor(kGroupShare * static_cast<double>(n)));

  GroupAssignment g;
  g.label.assign(n, UserGroup::Diverse);
  for (std::size_t r = 0; r < n; ++r) {
    const UserIndex u = order[r];
    if (r < edge) {
      g.label[u] = UserGroup::Niche;
    } else if (r >= n - edge) {
      g.label[u] = UserGroup::BestsellerFocused;
    }
  }
  for (UserIndex u = 0; u < n; ++u) g.members[static_cast<int>(g.label[u])].push_back(u);
  return g;
}

std::pair<Correlation, Correlation> profile_popularity_correlations(
    std::span<const UserProfileStats> stats) {
  std::vector<double> size(stats.size()), popular(stats.size()), avg(stats.size());
  for (std::size_t u = 0; u < stats.size(); ++u) {
    size[u] = static_cast<double>(stats[u].profile_size);
    popular[u] = static_cast<double>(stats[u].n_popular);
    avg[u] = stats[u].avg_item_popularity;
  }
  return {pearson_correlation(size, popular), pearson_correlation(size, avg)};
}

GroupProfileSummary group_profile_summary(std::span<const UserProfileStats> stats,
                                          const GroupAssignment& groups) {
  GroupProfileSummary out;
  for (auto g : kAllGroups) {
    const auto& users = groups.users(g);
    const int k = static_cast<int>(g);
    out.users[k] = users.size();
    if (users.empty()) {
      out.mean_profile_size[k] = 0.0;
      continue;
    }
    double total = 0.0;
    for (auto u : users) total += static_cast<double>(stats[u].profile_size);
    out.mean_profile_size[k] = total / static_cast<double>(users.size());
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> longtail_series(const ItemPopularity& pop) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(pop.rank_order.size());
  for (std::size_t r = 0; r < pop.rank_order.size(); ++r) {
    out.emplace_back(r + 1, pop.reader_count[pop.rank_order[r]]);
  }
  return out;
}

std::vector<HistogramBin> ratio_histogram(std::span<const UserProfileStats> stats, std::size_t bins) {
  if (bins == 0) throw ContractError("ratio_histogram: bins must be positive");
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].low = static_cast<double>(b) / static_cast<double>(bins);
    out[b].high = static_cast<double>(b + 1) / static_cast<double>(bins);
  }
  for (const auto& s : stats) {
    // Bin on the exact fraction to keep boundary ratios like 0.2 in the upper bin.
    auto b = static_cast<std::size_t>((s.n_popular * bins) / std::max<std::size_t>(s.profile_size, 1));
    ++out[std::min(b, bins - 1)].count;
  }
  return out;
}

}  // namespace fairbook

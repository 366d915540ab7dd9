#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "fairbook/dataset.hpp"
#include "fairbook/statistics.hpp"

namespace fairbook {

inline constexpr double kPopularShare = 0.2;
inline constexpr double kGroupShare = 0.2;

struct ItemPopularity {
  std::vector<std::size_t> reader_count;
  std::vector<double> phi;  // readers / n_users
  std::vector<bool> is_popular;
  // Items by reader count descending, item index ascending on ties.
  std::vector<ItemIndex> rank_order;
  std::size_t n_popular = 0;
};

ItemPopularity compute_item_popularity(const Dataset& d);

struct UserProfileStats {
  std::size_t profile_size = 0;
  std::size_t n_popular = 0;
  double ratio_popular = 0.0;
  double avg_item_popularity = 0.0;
};

std::vector<UserProfileStats> user_profile_stats(const Dataset& d, const ItemPopularity& pop);

// Users whose popular share is at most `threshold` (compared exactly on the
// integer counts, so 0.8 means n_popular * 5 <= 4 * profile_size).
std::size_t count_users_ratio_at_most(std::span<const UserProfileStats> stats, double threshold);

enum class UserGroup { Niche = 0, Diverse = 1, BestsellerFocused = 2 };
inline constexpr std::array<UserGroup, 3> kAllGroups = {UserGroup::Niche, UserGroup::Diverse,
                                                        UserGroup::BestsellerFocused};

std::string_view group_name(UserGroup g);
UserGroup parse_group(std::string_view name);

struct GroupAssignment {
  std::vector<UserGroup> label;  // per user
  std::array<std::vector<UserIndex>, 3> members;

  const std::vector<UserIndex>& users(UserGroup g) const { return members[static_cast<int>(g)]; }
  std::size_t size(UserGroup g) const { return users(g).size(); }
};

// Sort by popular ratio ascending (user index breaks ties); the bottom
// floor(20%) are Niche, the top floor(20%) Bestseller-focused, the rest Diverse.
// Fewer than 5 users throws ContractError.
GroupAssignment assign_groups(std::span<const UserProfileStats> stats);

// (profile_size vs n_popular, profile_size vs avg_item_popularity)
std::pair<Correlation, Correlation> profile_popularity_correlations(
    std::span<const UserProfileStats> stats);

struct GroupProfileSummary {
  std::array<double, 3> mean_profile_size{};
  std::array<std::size_t, 3> users{};
};

GroupProfileSummary group_profile_summary(std::span<const UserProfileStats> stats,
                                          const GroupAssignment& groups);

// Figure series: (rank starting at 1, reader_count).
std::vector<std::pair<std::size_t, std::size_t>> longtail_series(const ItemPopularity& pop);

struct HistogramBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;
};

// Equal-width bins over [0, 1]; the last bin is closed on the right.
std::vector<HistogramBin> ratio_histogram(std::span<const UserProfileStats> stats, std::size_t bins = 10);

}  // namespace fairbook

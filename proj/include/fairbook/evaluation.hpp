#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fairbook/dataset.hpp"
#include "fairbook/profiling.hpp"
#include "fairbook/rating_matrix.hpp"
#include "fairbook/recommendations.hpp"
#include "fairbook/recommender.hpp"
#include "fairbook/statistics.hpp"

namespace fairbook {

enum class SplitMode { Global, PerUser };

std::string_view split_mode_name(SplitMode m);
SplitMode parse_split_mode(std::string_view name);

struct TrainTestSplit {
  std::vector<Interaction> train;
  std::vector<Interaction> test;
  std::uint64_t seed = 0;
  std::vector<bool> cold_user;  // no training interactions
  std::vector<bool> cold_item;
};

// Global: seeded shuffle of all interactions, the first floor(ratio * n) go to
// train. PerUser: the same rule applied inside every user's profile.
// Both halves keep the dataset's interaction order.
TrainTestSplit split_train_test(const Dataset& d, double ratio, std::uint64_t seed,
                                SplitMode mode = SplitMode::Global);

// Rebuilds the cold flags for a split read back from disk.
void mark_cold(TrainTestSplit& split, std::size_t n_users, std::size_t n_items);

struct UserRankMetrics {
  UserIndex user = 0;
  std::size_t hits = 0;
  std::size_t relevant = 0;
  double precision = 0.0;
  double recall = 0.0;
  double ndcg = 0.0;
};

// Binary relevance: an item is relevant when it is in the user's test set.
// Only users with at least one test item are reported; a user missing from
// `recs` counts as an empty list.
std::vector<UserRankMetrics> rank_metrics(const RecommendationList& recs, const RatingMatrix& test,
                                          std::size_t n);

struct TestScore {
  UserIndex user = 0;
  ItemIndex item = 0;
  int rating = 0;
  double score = 0.0;
};

// Raw model scores for every test pair, in test-matrix order.
std::vector<TestScore> score_test_pairs(const RecModel& model, const RatingMatrix& test);

struct UserMae {
  UserIndex user = 0;
  double mae = 0.0;
  std::size_t n = 0;
};

// Per-user mean absolute error. Rating-scale scores are clamped to [1, 10];
// other scores are min-max rescaled to [1, 10] over the given pairs first.
std::vector<UserMae> mae_per_user(std::span<const TestScore> scores, bool rating_scale);

// Mean over users in `group` of the mean phi over that user's list.
// Throws ContractError for an empty group or an empty list.
double gap(std::span<const UserIndex> group, const std::vector<std::vector<ItemIndex>>& lists,
           std::span<const double> phi);

struct DeltaGap {
  double ratio = 0.0;
  double pct = 0.0;
};

DeltaGap delta_gap(double gap_r, double gap_p);

struct GapRow {
  UserGroup group = UserGroup::Niche;
  double gap_p = 0.0;
  double gap_r = 0.0;
  DeltaGap delta;
};

// GAP_p over full profiles of every group member; GAP_r over the members
// that received a non-empty list.
std::array<GapRow, 3> gap_report(const GroupAssignment& groups,
                                 const std::vector<std::vector<ItemIndex>>& profiles,
                                 const std::vector<std::vector<ItemIndex>>& recs, std::span<const double> phi);

struct FrequencyReport {
  std::vector<std::size_t> rec_count;  // per item
  Correlation correlation;              // rec_count vs phi over all items
};

FrequencyReport recommendation_frequency_correlation(const RecommendationList& recs,
                                                     std::span<const double> phi);

struct SignificanceRow {
  UserGroup a = UserGroup::Niche;
  UserGroup b = UserGroup::Diverse;
  TTest test;
  bool significant = false;  // p < 0.05
};

// Welch's test for each group pair (N-D, N-B, D-B). `value_by_user` holds NaN
// for users without a defined value.
std::array<SignificanceRow, 3> group_significance_test(std::span<const double> value_by_user,
                                                       const GroupAssignment& groups);

// Pearson over algorithm points (ndcg_i, delta_gap_i); needs >= 3 points.
Correlation tradeoff_correlation(std::span<const double> ndcg, std::span<const double> delta_gap);

struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

MetricSummary summarize(std::span<const double> values);

}  // namespace fairbook

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fairbook/rating_matrix.hpp"
#include "fairbook/recommender.hpp"

namespace fairbook {

inline constexpr std::size_t kDefaultListLength = 10;

struct ScoredItem {
  ItemIndex item = 0;
  double score = 0.0;

  bool operator==(const ScoredItem&) const = default;
};

struct UserRecommendations {
  UserIndex user = 0;
  // Set when the user had no training interactions and got the MostPop list.
  bool cold_fallback = false;
  std::vector<ScoredItem> items;

  bool operator==(const UserRecommendations&) const = default;
};

struct RecommendationList {
  std::size_t n = kDefaultListLength;
  std::vector<UserRecommendations> users;  // ascending user index
  std::vector<std::string> warnings;

  // Item lists indexed by user (empty for users without a list).
  std::vector<std::vector<ItemIndex>> item_lists(std::size_t n_users) const;
};

// The n highest scores outside `mask`, score descending then item ascending.
std::vector<ScoredItem> top_n(std::span<const double> scores, std::span<const ItemIndex> mask, std::size_t n);

// Scores every item for each requested user (all users when `users` is empty),
// masks the user's training items and keeps the top n. Users without training
// data receive the MostPop ranking over unseen items. `jobs` > 1 splits users
// across threads; the result does not depend on it.
RecommendationList recommend_top_n(const RecModel& model, const RatingMatrix& train, std::size_t n,
                                   std::span<const UserIndex> users = {}, unsigned jobs = 1);

// `user_index,rank,item_index,score`, rank from 1, scores at 6 significant digits.
std::string recommendations_csv(const RecommendationList& list);

struct ImportResult {
  RecommendationList list;
  std::vector<std::string> errors;  // "row N: ..." with 1-based data rows
};

// Reads a recommendations file, checking ids against the dataset size, rank
// continuity, duplicates, score order and (when `train` is given) the
// training mask. Strict mode throws ValidationError listing every problem;
// otherwise offending rows, or whole user lists for list-level problems, are dropped.
ImportResult import_recommendations(std::istream& in, std::size_t n_users, std::size_t n_items,
                                    const RatingMatrix* train, bool strict);
ImportResult import_recommendations(const std::filesystem::path& path, std::size_t n_users,
                                    std::size_t n_items, const RatingMatrix* train, bool strict);

// Empty when sorted, duplicate-free, masked and within length n.
std::vector<std::string> list_violations(const RecommendationList& list, const RatingMatrix& train);

}  // namespace fairbook

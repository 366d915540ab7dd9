#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fairbook/dataset.hpp"

namespace fairbook {

// Compressed user-major and item-major views over a set of interactions.
// Rows are sorted by the opposite index, so lookups can binary search.
class RatingMatrix {
 public:
  RatingMatrix() = default;
  RatingMatrix(std::size_t n_users, std::size_t n_items, std::span<const Interaction> interactions);

  std::size_t n_users() const { return n_users_; }
  std::size_t n_items() const { return n_items_; }
  std::size_t nnz() const { return user_items_.size(); }

  std::span<const ItemIndex> user_items(UserIndex u) const {
    return {user_items_.data() + user_ptr_[u], user_ptr_[u + 1] - user_ptr_[u]};
  }
  std::span<const double> user_ratings(UserIndex u) const {
    return {user_ratings_.data() + user_ptr_[u], user_ptr_[u + 1] - user_ptr_[u]};
  }
  std::span<const UserIndex> item_users(ItemIndex i) const {
    return {item_users_.data() + item_ptr_[i], item_ptr_[i + 1] - item_ptr_[i]};
  }
  std::span<const double> item_ratings(ItemIndex i) const {
    return {item_ratings_.data() + item_ptr_[i], item_ptr_[i + 1] - item_ptr_[i]};
  }

  std::size_t user_degree(UserIndex u) const { return user_ptr_[u + 1] - user_ptr_[u]; }
  std::size_t item_degree(ItemIndex i) const { return item_ptr_[i + 1] - item_ptr_[i]; }
  bool contains(UserIndex u, ItemIndex i) const;

  // Interactions in user-major order.
  std::vector<Interaction> triples() const;
  double mean_rating() const;

 private:
  std::size_t n_users_ = 0;
  std::size_t n_items_ = 0;
  std::vector<std::size_t> user_ptr_{0};
  std::vector<ItemIndex> user_items_;
  std::vector<double> user_ratings_;
  std::vector<std::size_t> item_ptr_{0};
  std::vector<UserIndex> item_users_;
  std::vector<double> item_ratings_;
};

}  // namespace fairbook

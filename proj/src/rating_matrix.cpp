#include "fairbook/rating_matrix.hpp"

#include <algorithm>
#include <numeric>

#include "fairbook/error.hpp"

namespace fairbook {

RatingMatrix::RatingMatrix(std::size_t n_users, std::size_t n_items,
                           std::span<const Interaction> interactions)
    : n_users_(n_users), n_items_(n_items) {
  std::vector<Interaction> rows(interactions.begin(), interactions.end());
  for (const auto& x : rows) {
    if (x.user >= n_users || x.item >= n_items) throw ContractError("RatingMatrix: index out of range");
  }

  std::sort(rows.begin(), rows.end(), [](const Interaction& a, const Interaction& b) {
    return a.user != b.user ? a.user < b.user : a.item < b.item;
  });
  user_ptr_.assign(n_users + 1, 0);
  user_items_.reserve(rows.size());
  user_ratings_.reserve(rows.size());
  for (const auto& x : rows) {
    ++user_ptr_[x.user + 1];
    user_items_.push_back(x.item);
    user_ratings_.push_back(x.rating);
  }
  std::partial_sum(user_ptr_.begin(), user_ptr_.end(), user_ptr_.begin());

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Interaction& a, const Interaction& b) { return a.item < b.item; });
  item_ptr_.assign(n_items + 1, 0);
  item_users_.reserve(rows.size());
  item_ratings_.reserve(rows.size());
  for (const auto& x : rows) {
    ++item_ptr_[x.item + 1];
    item_users_.push_back(x.user);
    item_ratings_.push_back(x.rating);
  }
  std::partial_sum(item_ptr_.begin(), item_ptr_.end(), item_ptr_.begin());
}

bool RatingMatrix::contains(UserIndex u, ItemIndex i) const {
  auto items = user_items(u);
  return std::binary_search(items.begin(), items.end(), i);
}

std::vector<Interaction> RatingMatrix::triples() const {
  std::vector<Interaction> out;
  out.reserve(nnz());
  for (UserIndex u = 0; u < n_users_; ++u) {
    auto items = user_items(u);
    auto ratings = user_ratings(u);
    for (std::size_t k = 0; k < items.size(); ++k) {
      out.push_back({u, items[k], static_cast<int>(ratings[k])});
    }
  }
  return out;
}

double RatingMatrix::mean_rating() const {
  if (user_ratings_.empty()) return 0.0;
  return std::accumulate(user_ratings_.begin(), user_ratings_.end(), 0.0) /
         static_cast<double>(user_ratings_.size());
}

}  // namespace fairbook

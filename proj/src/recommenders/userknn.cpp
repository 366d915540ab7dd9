#include <algorithm>
#include <cmath>

#include "fairbook/error.hpp"
#include "fairbook/recommender.hpp"

namespace fairbook {

UserKnnModel::UserKnnModel(RatingMatrix train, int k)
    : train_(std::move(train)),
      user_mean_(train_.n_users()),
      user_norm_(train_.n_users()),
      global_mean_(train_.mean_rating()),
      k_(k) {
  for (UserIndex u = 0; u < train_.n_users(); ++u) {
    auto r = train_.user_ratings(u);
    if (r.empty()) {
      user_mean_[u] = global_mean_;
      continue;
    }
    double sum = 0.0;
    for (double v : r) sum += v;
    user_mean_[u] = sum / static_cast<double>(r.size());
    double ss = 0.0;
    for (double v : r) ss += (v - user_mean_[u]) * (v - user_mean_[u]);
    user_norm_[u] = std::sqrt(ss);
  }
}

double UserKnnModel::similarity(UserIndex a, UserIndex b) const {
  if (user_norm_[a] == 0.0 || user_norm_[b] == 0.0) return 0.0;
  auto ia = train_.user_items(a), ib = train_.user_items(b);
  auto ra = train_.user_ratings(a), rb = train_.user_ratings(b);
  double dot = 0.0;
  std::size_t x = 0, y = 0;
  while (x < ia.size() && y < ib.size()) {
    if (ia[x] < ib[y]) {
      ++x;
    } else if (ib[y] < ia[x]) {
      ++y;
    } else {
      dot += (ra[x] - user_mean_[a]) * (rb[y] - user_mean_[b]);
      ++x;
      ++y;
    }
  }
  return dot / (user_norm_[a] * user_norm_[b]);
}

std::vector<UserKnnModel::Neighbor> UserKnnModel::neighbors(UserIndex u) const {
  std::vector<Neighbor> out;
  if (user_norm_[u] == 0.0) return out;
  // Sparse dot products through the item-major index.
  std::vector<double> dot(train_.n_users(), 0.0);
  std::vector<UserIndex> touched;
  auto items = train_.user_items(u);
  auto ratings = train_.user_ratings(u);
  for (std::size_t k = 0; k < items.size(); ++k) {
    const double cu = ratings[k] - user_mean_[u];
    auto users = train_.item_users(items[k]);
    auto rs = train_.item_ratings(items[k]);
    for (std::size_t j = 0; j < users.size(); ++j) {
      const UserIndex v = users[j];
      if (v == u || user_norm_[v] == 0.0) continue;
      if (dot[v] == 0.0) touched.push_back(v);
      dot[v] += cu * (rs[j] - user_mean_[v]);
    }
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  for (UserIndex v : touched) {
    if (dot[v] != 0.0) out.push_back({v, dot[v] / (user_norm_[u] * user_norm_[v])});
  }
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.sim != b.sim ? a.sim > b.sim : a.user < b.user;
  });
  return out;
}

void UserKnnModel::score_user(UserIndex u, std::span<double> out) const {
  if (train_.user_degree(u) == 0) {
    std::fill(out.begin(), out.end(), global_mean_);
    return;
  }
  std::vector<double> num(train_.n_items(), 0.0), den(train_.n_items(), 0.0);
  std::vector<int> used(train_.n_items(), 0);
  // Walking neighbours in similarity order keeps, per item, the k most
  // similar users who rated it.
  for (const auto& nb : neighbors(u)) {
    auto items = train_.user_items(nb.user);
    auto ratings = train_.user_ratings(nb.user);
    for (std::size_t k = 0; k < items.size(); ++k) {
      const ItemIndex i = items[k];
      if (used[i] >= k_) continue;
      ++used[i];
      num[i] += nb.sim * (ratings[k] - user_mean_[nb.user]);
      den[i] += std::fabs(nb.sim);
    }
  }
  for (ItemIndex i = 0; i < out.size(); ++i) {
    out[i] = user_mean_[u] + (den[i] > 0.0 ? num[i] / den[i] : 0.0);
  }
}

UserKnnModel fit_userknn(const ModelConfig& config, const RatingMatrix& train) {
  if (config.neighbors < 1) throw ContractError("fit_userknn: neighbors must be >= 1");
  return UserKnnModel(train, config.neighbors);
}

}  // namespace fairbook

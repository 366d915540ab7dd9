#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairbook/error.hpp"
#include "fairbook/evaluation.hpp"
#include "fairbook/random.hpp"

namespace fairbook {

std::string_view split_mode_name(SplitMode m) { return m == SplitMode::Global ? "global" : "per_user"; }

SplitMode parse_split_mode(std::string_view name) {
  if (name == "global") return SplitMode::Global;
  if (name == "per_user" || name == "stratified") return SplitMode::PerUser;
  throw ContractError("unknown split mode '" + std::string(name) + "'");
}

void mark_cold(TrainTestSplit& split, std::size_t n_users, std::size_t n_items) {
  split.cold_user.assign(n_users, true);
  split.cold_item.assign(n_items, true);
  for (const auto& x : split.train) {
    split.cold_user[x.user] = false;
    split.cold_item[x.item] = false;
  }
}

TrainTestSplit split_train_test(const Dataset& d, double ratio, std::uint64_t seed, SplitMode mode) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ContractError("split_train_test: ratio must be in (0, 1)");
  const auto rows = d.interactions();
  std::vector<bool> in_train(rows.size(), false);
  Rng rng(seed);

  if (mode == SplitMode::Global) {
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    const auto cut = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(rows.size())));
    for (std::size_t k = 0; k < cut; ++k) in_train[order[k]] = true;
  } else {
    std::vector<std::vector<std::size_t>> by_user(d.n_users());
    for (std::size_t k = 0; k < rows.size(); ++k) by_user[rows[k].user].push_back(k);
    for (auto& idx : by_user) {
      rng.shuffle(std::span<std::size_t>(idx));
      const auto cut = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(idx.size())));
      for (std::size_t k = 0; k < cut; ++k) in_train[idx[k]] = true;
    }
  }

  TrainTestSplit split;
  split.seed = seed;
  for (std::size_t k = 0; k < rows.size(); ++k) (in_train[k] ? split.train : split.test).push_back(rows[k]);
  mark_cold(split, d.n_users(), d.n_items());
  return split;
}

}  // namespace fairbook

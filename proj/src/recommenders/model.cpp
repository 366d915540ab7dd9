#include <algorithm>
#include <cctype>
#include <cmath>
#include <vector>

#include "fairbook/error.hpp"
#include "fairbook/random.hpp"
#include "fairbook/recommender.hpp"

namespace fairbook {

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Random: return "Random";
    case Algorithm::MostPop: return "MostPop";
    case Algorithm::UserKNN: return "UserKNN";
    case Algorithm::MF: return "MF";
    case Algorithm::PMF: return "PMF";
    case Algorithm::NMF: return "NMF";
    case Algorithm::WMF: return "WMF";
    case Algorithm::BPR: return "BPR";
    case Algorithm::PF: return "PF";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
  };
  const auto key = lower(name);
  for (auto a : kAllAlgorithms) {
    if (lower(algorithm_name(a)) == key) return a;
  }
  throw ContractError("unknown algorithm '" + std::string(name) + "'");
}

ModelConfig ModelConfig::defaults(Algorithm a) {
  ModelConfig c;
  c.algorithm = a;
  switch (a) {
    case Algorithm::MF:
    case Algorithm::PMF:
      c.learning_rate = 0.01;
      c.regularization = 0.02;
      c.epochs = 100;
      break;
    case Algorithm::NMF:
      c.regularization = 0.06;
      c.epochs = 100;
      break;
    case Algorithm::WMF:
      c.alpha = 1.0;
      c.regularization = 0.01;
      c.epochs = 50;
      break;
    case Algorithm::BPR:
      c.learning_rate = 0.05;
      c.regularization = 0.01;
      c.epochs = 100;
      break;
    case Algorithm::PF:
      c.prior_shape = 0.3;
      c.prior_rate = 0.3;
      c.epochs = 100;
      break;
    case Algorithm::UserKNN:
      c.neighbors = 50;
      break;
    case Algorithm::Random:
    case Algorithm::MostPop:
      break;
  }
  return c;
}

void ModelConfig::validate() const {
  auto fail = [&](const std::string& what) {
    throw ContractError(std::string(algorithm_name(algorithm)) + " config: " + what);
  };
  if (k < 1) fail("k must be >= 1");
  if (epochs < 0) fail("epochs must be >= 0");
  if (!(learning_rate > 0.0)) fail("learning_rate must be > 0");
  if (!(regularization >= 0.0)) fail("regularization must be >= 0");
  if (algorithm == Algorithm::UserKNN && neighbors < 1) fail("neighbors must be >= 1");
  if (algorithm == Algorithm::WMF && !(alpha > 0.0)) fail("alpha must be > 0");
  if (algorithm == Algorithm::PF && !(prior_shape > 0.0 && prior_rate > 0.0)) {
    fail("prior_shape and prior_rate must be > 0");
  }
}

double RecModel::score(UserIndex u, ItemIndex i) const {
  std::vector<double> all(n_items());
  score_user(u, all);
  return all[i];
}

void RandomModel::score_user(UserIndex u, std::span<double> out) const {
  for (ItemIndex i = 0; i < out.size(); ++i) out[i] = score(u, i);
}

double RandomModel::score(UserIndex u, ItemIndex i) const {
  const std::uint64_t key = (static_cast<std::uint64_t>(u) << 32) | i;
  return unit_from_bits(splitmix64(splitmix64(seed_) ^ key));
}

void MostPopModel::score_user(UserIndex, std::span<double> out) const {
  std::copy(counts_.begin(), counts_.end(), out.begin());
}

FactorModel::FactorModel(Algorithm algorithm, std::size_t n_users, std::size_t n_items, int k)
    : P(FactorMatrix::Zero(static_cast<Eigen::Index>(n_users), k)),
      Q(FactorMatrix::Zero(static_cast<Eigen::Index>(n_items), k)),
      user_bias(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_users))),
      item_bias(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_items))),
      algorithm_(algorithm) {}

void FactorModel::score_user(UserIndex u, std::span<double> out) const {
  Eigen::Map<Eigen::VectorXd> dst(out.data(), static_cast<Eigen::Index>(out.size()));
  dst.noalias() = Q * P.row(u).transpose();
  if (uses_bias()) dst.array() += global_mean + user_bias[u] + item_bias.array();
}

double FactorModel::score(UserIndex u, ItemIndex i) const {
  double s = P.row(u).dot(Q.row(i));
  if (uses_bias()) s += global_mean + user_bias[u] + item_bias[i];
  return s;
}

bool FactorModel::rating_scale() const {
  return algorithm_ == Algorithm::MF || algorithm_ == Algorithm::PMF || algorithm_ == Algorithm::NMF;
}

bool FactorModel::all_finite() const {
  return P.allFinite() && Q.allFinite() && user_bias.allFinite() && item_bias.allFinite() &&
         std::isfinite(global_mean);
}

PfModel::PfModel(std::size_t n_users, std::size_t n_items, int k)
    : theta_shape(static_cast<Eigen::Index>(n_users), k),
      theta_rate(static_cast<Eigen::Index>(n_users), k),
      beta_shape(static_cast<Eigen::Index>(n_items), k),
      beta_rate(static_cast<Eigen::Index>(n_items), k),
      activity_shape(static_cast<Eigen::Index>(n_users)),
      activity_rate(static_cast<Eigen::Index>(n_users)),
      popularity_shape(static_cast<Eigen::Index>(n_items)),
      popularity_rate(static_cast<Eigen::Index>(n_items)) {}

void PfModel::score_user(UserIndex u, std::span<double> out) const {
  Eigen::Map<Eigen::VectorXd> dst(out.data(), static_cast<Eigen::Index>(out.size()));
  const Eigen::RowVectorXd theta = theta_shape.row(u).array() / theta_rate.row(u).array();
  dst.noalias() = (beta_shape.array() / beta_rate.array()).matrix() * theta.transpose();
}

double PfModel::score(UserIndex u, ItemIndex i) const {
  return ((theta_shape.row(u).array() / theta_rate.row(u).array()) *
          (beta_shape.row(i).array() / beta_rate.row(i).array()))
      .sum();
}

bool PfModel::all_positive() const {
  auto pos = [](const auto& m) { return m.allFinite() && (m.array() > 0.0).all(); };
  return pos(theta_shape) && pos(theta_rate) && pos(beta_shape) && pos(beta_rate) &&
         pos(activity_shape) && pos(activity_rate) && pos(popularity_shape) && pos(popularity_rate);
}

FactorModel init_factor_model(Algorithm algorithm, std::size_t n_users, std::size_t n_items, int k,
                              std::uint64_t seed) {
  FactorModel m(algorithm, n_users, n_items, k);
  Rng rng(seed);
  for (Eigen::Index r = 0; r < m.P.rows(); ++r)
    for (int c = 0; c < k; ++c) m.P(r, c) = 0.01 * rng.uniform_open_closed();
  for (Eigen::Index r = 0; r < m.Q.rows(); ++r)
    for (int c = 0; c < k; ++c) m.Q(r, c) = 0.01 * rng.uniform_open_closed();
  return m;
}

std::unique_ptr<RecModel> fit(const ModelConfig& config, const RatingMatrix& train, FitTrace* trace) {
  config.validate();
  switch (config.algorithm) {
    case Algorithm::Random:
    case Algorithm::MostPop:
      return fit_baseline(config, train);
    case Algorithm::UserKNN:
      return std::make_unique<UserKnnModel>(fit_userknn(config, train));
    case Algorithm::MF:
    case Algorithm::PMF:
    case Algorithm::NMF:
      return std::make_unique<FactorModel>(fit_explicit_mf(config, train, trace));
    case Algorithm::WMF:
      return std::make_unique<FactorModel>(fit_wmf(config, train, trace));
    case Algorithm::BPR:
      return std::make_unique<FactorModel>(fit_bpr(config, train, trace));
    case Algorithm::PF:
      return std::make_unique<PfModel>(fit_pf(config, train, trace));
  }
  throw ContractError("fit: unhandled algorithm");
}

}  // namespace fairbook

#include <cmath>
#include <numeric>

#include "fairbook/error.hpp"
#include "fairbook/random.hpp"
#include "fairbook/recommender.hpp"

namespace fairbook {
namespace objective {

double squared_loss(const FactorModel& m, std::span<const Interaction> data, double lambda) {
  double loss = 0.0;
  for (const auto& x : data) {
    const double e = x.rating - m.score(x.user, x.item);
    double reg = m.P.row(x.user).squaredNorm() + m.Q.row(x.item).squaredNorm();
    if (m.uses_bias()) reg += m.user_bias[x.user] * m.user_bias[x.user] + m.item_bias[x.item] * m.item_bias[x.item];
    loss += e * e + lambda * reg;
  }
  return loss;
}

FactorGradient squared_loss_gradient(const FactorModel& m, std::span<const Interaction> data,
                                     double lambda) {
  FactorGradient g{FactorMatrix::Zero(m.P.rows(), m.P.cols()), FactorMatrix::Zero(m.Q.rows(), m.Q.cols()),
                   Eigen::VectorXd::Zero(m.user_bias.size()), Eigen::VectorXd::Zero(m.item_bias.size())};
  for (const auto& x : data) {
    const double e = x.rating - m.score(x.user, x.item);
    g.P.row(x.user) += -2.0 * e * m.Q.row(x.item) + 2.0 * lambda * m.P.row(x.user);
    g.Q.row(x.item) += -2.0 * e * m.P.row(x.user) + 2.0 * lambda * m.Q.row(x.item);
    if (m.uses_bias()) {
      g.user_bias[x.user] += -2.0 * e + 2.0 * lambda * m.user_bias[x.user];
      g.item_bias[x.item] += -2.0 * e + 2.0 * lambda * m.item_bias[x.item];
    }
  }
  return g;
}

double nmf(const FactorModel& m, const RatingMatrix& train, double lambda) {
  const auto triples = train.triples();
  return squared_loss(m, triples, lambda);
}

}  // namespace objective

namespace {

void check_finite(double loss, Algorithm a, int epoch) {
  if (!std::isfinite(loss)) {
    throw FitError(std::string(algorithm_name(a)) + " diverged: non-finite loss at epoch " +
                   std::to_string(epoch));
  }
}

double min_entry(const FactorModel& m) {
  double lo = m.P.size() ? m.P.minCoeff() : 0.0;
  if (m.Q.size()) lo = std::min(lo, m.Q.minCoeff());
  return lo;
}

// One SGD pass; each step moves against half the gradient of the
// per-interaction loss, the usual lr * (e * q - lambda * p) form.
void sgd_epoch(FactorModel& m, std::span<const Interaction> data, std::span<std::size_t> order,
               double lr, double lambda, Rng& rng) {
  rng.shuffle(order);
  Eigen::RowVectorXd pu(m.P.cols());
  for (std::size_t idx : order) {
    const auto& x = data[idx];
    const double e = x.rating - m.score(x.user, x.item);
    if (m.uses_bias()) {
      m.user_bias[x.user] += lr * (e - lambda * m.user_bias[x.user]);
      m.item_bias[x.item] += lr * (e - lambda * m.item_bias[x.item]);
    }
    pu = m.P.row(x.user);
    m.P.row(x.user) += lr * (e * m.Q.row(x.item) - lambda * pu);
    m.Q.row(x.item) += lr * (e * pu - lambda * m.Q.row(x.item));
  }
}

// Multiplicative updates restricted to observed entries; the lambda term
// enters each denominator once per observation, matching the objective.
void nmf_sweep(FactorModel& m, const RatingMatrix& train, double lambda) {
  const Eigen::Index k = m.P.cols();
  Eigen::RowVectorXd num(k), den(k);
  for (UserIndex u = 0; u < train.n_users(); ++u) {
    auto items = train.user_items(u);
    if (items.empty()) continue;
    auto ratings = train.user_ratings(u);
    num.setZero();
    den.setZero();
    for (std::size_t j = 0; j < items.size(); ++j) {
      const double pred = m.P.row(u).dot(m.Q.row(items[j]));
      num += ratings[j] * m.Q.row(items[j]);
      den += pred * m.Q.row(items[j]);
    }
    den += lambda * static_cast<double>(items.size()) * m.P.row(u);
    for (Eigen::Index c = 0; c < k; ++c) {
      if (den[c] > 0.0) m.P(u, c) *= num[c] / den[c];
    }
  }
  for (ItemIndex i = 0; i < train.n_items(); ++i) {
    auto users = train.item_users(i);
    if (users.empty()) continue;
    auto ratings = train.item_ratings(i);
    num.setZero();
    den.setZero();
    for (std::size_t j = 0; j < users.size(); ++j) {
      const double pred = m.P.row(users[j]).dot(m.Q.row(i));
      num += ratings[j] * m.P.row(users[j]);
      den += pred * m.P.row(users[j]);
    }
    den += lambda * static_cast<double>(users.size()) * m.Q.row(i);
    for (Eigen::Index c = 0; c < k; ++c) {
      if (den[c] > 0.0) m.Q(i, c) *= num[c] / den[c];
    }
  }
}

}  // namespace

FactorModel fit_explicit_mf(const ModelConfig& config, const RatingMatrix& train, FitTrace* trace) {
  const auto a = config.algorithm;
  if (a != Algorithm::MF && a != Algorithm::PMF && a != Algorithm::NMF) {
    throw ContractError("fit_explicit_mf: algorithm must be MF, PMF or NMF");
  }
  config.validate();
  FactorModel m = init_factor_model(a, train.n_users(), train.n_items(), config.k, config.seed);
  if (m.uses_bias()) m.global_mean = train.mean_rating();

  const auto data = train.triples();
  const double lambda = config.regularization;
  auto record = [&](double loss) {
    if (!trace) return;
    trace->objective.push_back(loss);
    trace->min_factor.push_back(min_entry(m));
  };
  record(objective::squared_loss(m, data, lambda));

  if (a == Algorithm::NMF) {
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
      nmf_sweep(m, train, lambda);
      const double loss = objective::squared_loss(m, data, lambda);
      check_finite(loss, a, epoch);
      record(loss);
    }
    return m;
  }

  Rng rng(splitmix64(config.seed) ^ 0x5f3759dfULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    sgd_epoch(m, data, order, config.learning_rate, lambda, rng);
    const double loss = objective::squared_loss(m, data, lambda);
    check_finite(loss, a, epoch);
    record(loss);
  }
  return m;
}

}  // namespace fairbook

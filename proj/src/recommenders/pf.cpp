#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/digamma.hpp>

#include "fairbook/error.hpp"
#include "fairbook/random.hpp"
#include "fairbook/recommender.hpp"

// Model: activity xi_u ~ Gamma(s, r), theta_uk ~ Gamma(s, xi_u);
//        popularity eta_i ~ Gamma(s, r), beta_ik ~ Gamma(s, eta_i);
//        y_ui ~ Poisson(theta_u . beta_i)
// with s = prior_shape and r = prior_rate.

namespace fairbook {
namespace {

double digamma(double x) { return boost::math::digamma(x); }

// -E_q[log q] for Gamma(shape, rate)
double gamma_entropy(double shape, double rate) {
  return shape - std::log(rate) + std::lgamma(shape) + (1.0 - shape) * digamma(shape);
}

// E_q[log Gamma(x; shape, rate_var)] where the rate is itself a Gamma variable.
double gamma_log_prior(double shape, double e_log_rate, double e_rate, double e_log_x, double e_x) {
  return shape * e_log_rate - std::lgamma(shape) + (shape - 1.0) * e_log_x - e_rate * e_x;
}

struct Expectations {
  FactorMatrix theta, log_theta, beta, log_beta;
};

Expectations expectations(const PfModel& m) {
  Expectations e;
  e.theta = (m.theta_shape.array() / m.theta_rate.array()).matrix();
  e.beta = (m.beta_shape.array() / m.beta_rate.array()).matrix();
  e.log_theta = m.theta_shape.unaryExpr(&digamma) - m.theta_rate.array().log().matrix();
  e.log_beta = m.beta_shape.unaryExpr(&digamma) - m.beta_rate.array().log().matrix();
  return e;
}

// Optimal multinomial weights for one observed cell, normalised in place;
// returns log sum_k exp(E log theta_uk + E log beta_ik).
double auxiliary(const Expectations& e, UserIndex u, ItemIndex i, Eigen::RowVectorXd& phi) {
  phi = e.log_theta.row(u) + e.log_beta.row(i);
  const double top = phi.maxCoeff();
  phi = (phi.array() - top).exp();
  const double z = phi.sum();
  phi /= z;
  return top + std::log(z);
}

}  // namespace

namespace objective {

double pf_elbo(const PfModel& m, const RatingMatrix& train, double s, double r) {
  const auto e = expectations(m);
  const Eigen::Index k = m.theta_shape.cols();
  Eigen::RowVectorXd phi(k);
  double elbo = 0.0;
  for (UserIndex u = 0; u < train.n_users(); ++u) {
    auto items = train.user_items(u);
    auto ys = train.user_ratings(u);
    for (std::size_t j = 0; j < items.size(); ++j) {
      elbo += ys[j] * auxiliary(e, u, items[j], phi) - std::lgamma(ys[j] + 1.0);
    }
  }
  elbo -= e.theta.colwise().sum().dot(e.beta.colwise().sum());

  auto side = [&](const FactorMatrix& shape, const FactorMatrix& rate, const FactorMatrix& ex,
                  const FactorMatrix& elog, const Eigen::VectorXd& h_shape, const Eigen::VectorXd& h_rate) {
    double total = 0.0;
    for (Eigen::Index row = 0; row < shape.rows(); ++row) {
      const double e_h = h_shape[row] / h_rate[row];
      const double elog_h = digamma(h_shape[row]) - std::log(h_rate[row]);
      total += s * std::log(r) - std::lgamma(s) + (s - 1.0) * elog_h - r * e_h;
      total += gamma_entropy(h_shape[row], h_rate[row]);
      for (Eigen::Index c = 0; c < k; ++c) {
        total += gamma_log_prior(s, elog_h, e_h, elog(row, c), ex(row, c));
        total += gamma_entropy(shape(row, c), rate(row, c));
      }
    }
    return total;
  };
  elbo += side(m.theta_shape, m.theta_rate, e.theta, e.log_theta, m.activity_shape, m.activity_rate);
  elbo += side(m.beta_shape, m.beta_rate, e.beta, e.log_beta, m.popularity_shape, m.popularity_rate);
  return elbo;
}

}  // namespace objective

PfModel fit_pf(const ModelConfig& config, const RatingMatrix& train, FitTrace* trace) {
  if (config.algorithm != Algorithm::PF) throw ContractError("fit_pf: algorithm must be PF");
  config.validate();
  const double s = config.prior_shape, r = config.prior_rate;
  const int k = config.k;
  const std::size_t n_users = train.n_users(), n_items = train.n_items();
  PfModel m(n_users, n_items, k);

  Rng rng(splitmix64(config.seed) ^ 0x9f1ULL);
  for (Eigen::Index row = 0; row < m.theta_shape.rows(); ++row) {
    for (int c = 0; c < k; ++c) {
      m.theta_shape(row, c) = s + 0.01 * rng.uniform_open_closed();
      m.theta_rate(row, c) = r + 0.01 * rng.uniform_open_closed();
    }
  }
  for (Eigen::Index row = 0; row < m.beta_shape.rows(); ++row) {
    for (int c = 0; c < k; ++c) {
      m.beta_shape(row, c) = s + 0.01 * rng.uniform_open_closed();
      m.beta_rate(row, c) = r + 0.01 * rng.uniform_open_closed();
    }
  }
  // The hyper-shape updates are constant: s + k * s.
  m.activity_shape.setConstant(s + k * s);
  m.popularity_shape.setConstant(s + k * s);
  for (Eigen::Index row = 0; row < m.activity_rate.size(); ++row) {
    m.activity_rate[row] = r + (m.theta_shape.row(row).array() / m.theta_rate.row(row).array()).sum();
  }
  for (Eigen::Index row = 0; row < m.popularity_rate.size(); ++row) {
    m.popularity_rate[row] = r + (m.beta_shape.row(row).array() / m.beta_rate.row(row).array()).sum();
  }

  auto record = [&](int epoch) {
    if (!trace) return;
    const double elbo = objective::pf_elbo(m, train, s, r);
    if (!std::isfinite(elbo)) throw FitError("PF: non-finite ELBO at sweep " + std::to_string(epoch));
    trace->objective.push_back(elbo);
    trace->min_factor.push_back(std::min({m.theta_shape.minCoeff(), m.theta_rate.minCoeff(), m.beta_shape.minCoeff(), m.beta_rate.minCoeff()}));
  };
  record(0);

  FactorMatrix user_counts(static_cast<Eigen::Index>(n_users), k), item_counts(static_cast<Eigen::Index>(n_items), k);
  Eigen::RowVectorXd phi(k);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    // Auxiliary allocations for every observed cell, from the current factors.
    const auto e = expectations(m);
    user_counts.setZero();
    item_counts.setZero();
    for (UserIndex u = 0; u < n_users; ++u) {
      auto items = train.user_items(u);
      auto ys = train.user_ratings(u);
      for (std::size_t j = 0; j < items.size(); ++j) {
        auxiliary(e, u, items[j], phi);
        user_counts.row(u) += ys[j] * phi;
        item_counts.row(items[j]) += ys[j] * phi;
      }
    }

    // Users, then their activity rates.
    const Eigen::RowVectorXd beta_sum = e.beta.colwise().sum();
    m.theta_shape = (user_counts.array() + s).matrix();
    for (Eigen::Index u = 0; u < m.theta_rate.rows(); ++u) {
      m.theta_rate.row(u) = (beta_sum.array() + m.activity_shape[u] / m.activity_rate[u]).matrix();
      m.activity_rate[u] = r + (m.theta_shape.row(u).array() / m.theta_rate.row(u).array()).sum();
    }

    // Items, then their popularity rates.
    const Eigen::RowVectorXd theta_sum = (m.theta_shape.array() / m.theta_rate.array()).matrix().colwise().sum();
    m.beta_shape = (item_counts.array() + s).matrix();
    for (Eigen::Index i = 0; i < m.beta_rate.rows(); ++i) {
      m.beta_rate.row(i) = (theta_sum.array() + m.popularity_shape[i] / m.popularity_rate[i]).matrix();
      m.popularity_rate[i] = r + (m.beta_shape.row(i).array() / m.beta_rate.row(i).array()).sum();
    }

    if (!m.all_positive()) {
      throw FitError("PF: variational parameters left the positive orthant at sweep " + std::to_string(epoch));
    }
    record(epoch);
  }
  return m;
}

}  // namespace fairbook

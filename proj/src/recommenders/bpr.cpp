#include <cmath>

#include "fairbook/error.hpp"
#include "fairbook/random.hpp"
#include "fairbook/recommender.hpp"

namespace fairbook {
namespace {

double log_sigmoid(double x) { return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

// 1 - sigmoid(x)
double sigmoid_complement(double x) {
  return x >= 0.0 ? std::exp(-x) / (1.0 + std::exp(-x)) : 1.0 / (1.0 + std::exp(x));
}

}  // namespace

namespace objective {

double bpr_triple(const FactorModel& m, UserIndex u, ItemIndex pos, ItemIndex neg, double lambda) {
  const double x = m.P.row(u).dot(m.Q.row(pos) - m.Q.row(neg));
  return log_sigmoid(x) -
         lambda * (m.P.row(u).squaredNorm() + m.Q.row(pos).squaredNorm() + m.Q.row(neg).squaredNorm());
}

BprGradient bpr_triple_gradient(const FactorModel& m, UserIndex u, ItemIndex pos, ItemIndex neg,
                                double lambda) {
  const Eigen::VectorXd pu = m.P.row(u).transpose();
  const Eigen::VectorXd qi = m.Q.row(pos).transpose();
  const Eigen::VectorXd qj = m.Q.row(neg).transpose();
  const double s = sigmoid_complement(pu.dot(qi - qj));
  return {s * (qi - qj) - 2.0 * lambda * pu, s * pu - 2.0 * lambda * qi, -s * pu - 2.0 * lambda * qj};
}

}  // namespace objective

FactorModel fit_bpr(const ModelConfig& config, const RatingMatrix& train, FitTrace* trace) {
  if (config.algorithm != Algorithm::BPR) throw ContractError("fit_bpr: algorithm must be BPR");
  config.validate();
  FactorModel m = init_factor_model(Algorithm::BPR, train.n_users(), train.n_items(), config.k, config.seed);

  // Positive pairs of users that still have at least one unobserved item.
  std::vector<Interaction> positives;
  positives.reserve(train.nnz());
  std::size_t excluded = 0;
  for (UserIndex u = 0; u < train.n_users(); ++u) {
    const auto degree = train.user_degree(u);
    if (degree == 0) continue;
    if (degree >= train.n_items()) {
      ++excluded;
      continue;
    }
    for (ItemIndex i : train.user_items(u)) positives.push_back({u, i, 1});
  }
  if (trace && excluded > 0) {
    trace->warnings.push_back("BPR: " + std::to_string(excluded) +
                              " user(s) rated every item and were excluded from sampling");
  }
  if (trace) trace->objective.push_back(0.0);
  if (positives.empty() || config.epochs == 0) return m;

  Rng rng(splitmix64(config.seed) ^ 0xb9bULL);
  const double lr = config.learning_rate, lambda = config.regularization;
  const std::size_t steps = train.nnz();
  Eigen::RowVectorXd pu(m.P.cols());
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    double sum = 0.0;
    for (std::size_t step = 0; step < steps; ++step) {
      const auto& x = positives[rng.below(positives.size())];
      ItemIndex neg;
      do {
        neg = static_cast<ItemIndex>(rng.below(train.n_items()));
      } while (train.contains(x.user, neg));

      const double d = m.P.row(x.user).dot(m.Q.row(x.item) - m.Q.row(neg));
      if (trace) sum += log_sigmoid(d);
      const double s = sigmoid_complement(d);
      pu = m.P.row(x.user);
      m.P.row(x.user) += lr * (s * (m.Q.row(x.item) - m.Q.row(neg)) - 2.0 * lambda * pu);
      m.Q.row(x.item) += lr * (s * pu - 2.0 * lambda * m.Q.row(x.item));
      m.Q.row(neg) += lr * (-s * pu - 2.0 * lambda * m.Q.row(neg));
    }
    if (!m.all_finite()) throw FitError("BPR diverged: non-finite factors at epoch " + std::to_string(epoch));
    if (trace) {
      trace->objective.push_back(sum / static_cast<double>(steps));
      trace->min_factor.push_back(std::min(m.P.minCoeff(), m.Q.minCoeff()));
    }
  }
  return m;
}

}  // namespace fairbook

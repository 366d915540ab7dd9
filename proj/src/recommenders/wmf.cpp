#include <cmath>

#include <Eigen/Cholesky>

#include "fairbook/error.hpp"
#include "fairbook/recommender.hpp"

namespace fairbook {
namespace objective {

double wmf(const FactorModel& m, const RatingMatrix& train, double alpha, double lambda) {
  // sum over all pairs of x^2, then correct the observed ones.
  const Eigen::MatrixXd pp = m.P.transpose() * m.P;
  const Eigen::MatrixXd qq = m.Q.transpose() * m.Q;
  double total = pp.cwiseProduct(qq).sum();
  for (UserIndex u = 0; u < train.n_users(); ++u) {
    auto items = train.user_items(u);
    auto ratings = train.user_ratings(u);
    for (std::size_t j = 0; j < items.size(); ++j) {
      const double x = m.P.row(u).dot(m.Q.row(items[j]));
      const double c = 1.0 + alpha * ratings[j];
      total += c * (1.0 - x) * (1.0 - x) - x * x;
    }
  }
  return total + lambda * (m.P.squaredNorm() + m.Q.squaredNorm());
}

}  // namespace objective

namespace {

// Solves one side of the alternation: for every row r of `target`,
// (F'F + F'(C_r - I)F + lambda I) x = F' C_r p_r with p_r = 1 on observed entries.
template <typename IndexFn, typename RatingFn>
void solve_side(FactorMatrix& target, const FactorMatrix& fixed, std::size_t rows, IndexFn indices,
                RatingFn ratings, double alpha, double lambda) {
  const Eigen::Index k = fixed.cols();
  const Eigen::MatrixXd gram = fixed.transpose() * fixed;
  Eigen::MatrixXd a(k, k);
  Eigen::VectorXd b(k);
  for (std::size_t r = 0; r < rows; ++r) {
    auto idx = indices(r);
    auto val = ratings(r);
    a = gram;
    a.diagonal().array() += lambda;
    b.setZero();
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const auto f = fixed.row(idx[j]);
      const double c = 1.0 + alpha * val[j];
      a.noalias() += (c - 1.0) * f.transpose() * f;
      b.noalias() += c * f.transpose();
    }
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
      a.diagonal().array() += lambda > 0.0 ? lambda : 1e-9;
      llt.compute(a);
      if (llt.info() != Eigen::Success) {
        throw FitError("WMF: singular normal equations for row " + std::to_string(r));
      }
    }
    target.row(static_cast<Eigen::Index>(r)) = llt.solve(b).transpose();
  }
}

}  // namespace

FactorModel fit_wmf(const ModelConfig& config, const RatingMatrix& train, FitTrace* trace) {
  if (config.algorithm != Algorithm::WMF) throw ContractError("fit_wmf: algorithm must be WMF");
  config.validate();
  FactorModel m = init_factor_model(Algorithm::WMF, train.n_users(), train.n_items(), config.k, config.seed);
  const double alpha = config.alpha, lambda = config.regularization;
  auto record = [&] {
    if (!trace) return 0.0;
    const double obj = objective::wmf(m, train, alpha, lambda);
    trace->objective.push_back(obj);
    trace->min_factor.push_back(std::min(m.P.minCoeff(), m.Q.minCoeff()));
    return obj;
  };
  record();
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    solve_side(
        m.P, m.Q, train.n_users(), [&](std::size_t u) { return train.user_items(static_cast<UserIndex>(u)); },
        [&](std::size_t u) { return train.user_ratings(static_cast<UserIndex>(u)); }, alpha, lambda);
    solve_side(
        m.Q, m.P, train.n_items(), [&](std::size_t i) { return train.item_users(static_cast<ItemIndex>(i)); },
        [&](std::size_t i) { return train.item_ratings(static_cast<ItemIndex>(i)); }, alpha, lambda);
    if (!m.all_finite()) throw FitError("WMF diverged: non-finite factors at epoch " + std::to_string(epoch));
    record();
  }
  return m;
}

}  // namespace fairbook

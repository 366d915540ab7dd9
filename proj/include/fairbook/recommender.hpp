#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "fairbook/dataset.hpp"
#include "fairbook/rating_matrix.hpp"

namespace fairbook {

enum class Algorithm { Random, MostPop, UserKNN, MF, PMF, NMF, WMF, BPR, PF };

inline constexpr std::array<Algorithm, 9> kAllAlgorithms = {
    Algorithm::Random, Algorithm::MostPop, Algorithm::UserKNN, Algorithm::MF,  Algorithm::PMF,
    Algorithm::NMF,    Algorithm::WMF,     Algorithm::BPR,     Algorithm::PF};

std::string_view algorithm_name(Algorithm a);
// Case-insensitive. Throws ContractError for unknown names.
Algorithm parse_algorithm(std::string_view name);

struct ModelConfig {
  Algorithm algorithm = Algorithm::MostPop;
  int k = 10;
  double learning_rate = 0.01;
  double regularization = 0.02;
  int epochs = 100;
  int neighbors = 50;
  double alpha = 1.0;
  double prior_shape = 0.3;
  double prior_rate = 0.3;
  std::uint64_t seed = 42;

  // Per-algorithm defaults used when a run config leaves a key out.
  static ModelConfig defaults(Algorithm a);
  // Throws ContractError when a field is out of range.
  void validate() const;
};

// Fitted recommender. Scores are comparable only within one model.
class RecModel {
 public:
  virtual ~RecModel() = default;

  virtual Algorithm algorithm() const = 0;
  virtual std::size_t n_users() const = 0;
  virtual std::size_t n_items() const = 0;

  // Writes the score of every item for `u` into `out` (size n_items()).
  virtual void score_user(UserIndex u, std::span<double> out) const = 0;
  virtual double score(UserIndex u, ItemIndex i) const;

  // True when scores are predicted ratings on the 1..10 scale.
  virtual bool rating_scale() const = 0;
};

// Per-epoch record of a fit. `objective` holds the training loss for MF/PMF,
// the full objective for NMF/WMF, the ELBO for PF and the mean sampled
// log-likelihood for BPR; index 0 is the value at initialization.
struct FitTrace {
  std::vector<double> objective;
  std::vector<double> min_factor;  // smallest entry of P and Q after each epoch
  std::vector<std::string> warnings;
};

// Scores every (user, item) with a uniform draw in [0, 1) that depends only on
// (seed, user, item).
class RandomModel final : public RecModel {
 public:
  RandomModel(std::uint64_t seed, std::size_t n_users, std::size_t n_items)
      : seed_(seed), n_users_(n_users), n_items_(n_items) {}

  Algorithm algorithm() const override { return Algorithm::Random; }
  std::size_t n_users() const override { return n_users_; }
  std::size_t n_items() const override { return n_items_; }
  void score_user(UserIndex u, std::span<double> out) const override;
  double score(UserIndex u, ItemIndex i) const override;
  bool rating_scale() const override { return false; }

 private:
  std::uint64_t seed_;
  std::size_t n_users_, n_items_;
};

class MostPopModel final : public RecModel {
 public:
  MostPopModel(std::size_t n_users, std::vector<double> counts)
      : n_users_(n_users), counts_(std::move(counts)) {}

  Algorithm algorithm() const override { return Algorithm::MostPop; }
  std::size_t n_users() const override { return n_users_; }
  std::size_t n_items() const override { return counts_.size(); }
  void score_user(UserIndex u, std::span<double> out) const override;
  double score(UserIndex, ItemIndex i) const override { return counts_[i]; }
  bool rating_scale() const override { return false; }
  std::span<const double> counts() const { return counts_; }

 private:
  std::size_t n_users_;
  std::vector<double> counts_;
};

// Mean-centred cosine user-user neighbourhood model. Similarity rows are
// computed on demand from the training matrix rather than stored densely.
class UserKnnModel final : public RecModel {
 public:
  struct Neighbor {
    UserIndex user;
    double sim;
  };

  UserKnnModel(RatingMatrix train, int k);

  Algorithm algorithm() const override { return Algorithm::UserKNN; }
  std::size_t n_users() const override { return train_.n_users(); }
  std::size_t n_items() const override { return train_.n_items(); }
  void score_user(UserIndex u, std::span<double> out) const override;
  bool rating_scale() const override { return true; }

  // 0 when either centred row is all zeros or the users share no items.
  double similarity(UserIndex a, UserIndex b) const;
  double user_mean(UserIndex u) const { return user_mean_[u]; }
  double global_mean() const { return global_mean_; }
  // Users with non-zero similarity to `u`, most similar first, user index
  // breaking ties.
  std::vector<Neighbor> neighbors(UserIndex u) const;

 private:
  RatingMatrix train_;
  std::vector<double> user_mean_;
  std::vector<double> user_norm_;
  double global_mean_;
  int k_;
};

using FactorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Shared state of MF, PMF, NMF, WMF and BPR:
// score(u, i) = mu + b_u + b_i + P_u . Q_i, with the bias terms only for MF.
class FactorModel final : public RecModel {
 public:
  FactorModel(Algorithm algorithm, std::size_t n_users, std::size_t n_items, int k);

  Algorithm algorithm() const override { return algorithm_; }
  std::size_t n_users() const override { return static_cast<std::size_t>(P.rows()); }
  std::size_t n_items() const override { return static_cast<std::size_t>(Q.rows()); }
  void score_user(UserIndex u, std::span<double> out) const override;
  double score(UserIndex u, ItemIndex i) const override;
  bool rating_scale() const override;

  bool uses_bias() const { return algorithm_ == Algorithm::MF; }
  bool all_finite() const;

  FactorMatrix P;  // users x k
  FactorMatrix Q;  // items x k
  Eigen::VectorXd user_bias;
  Eigen::VectorXd item_bias;
  double global_mean = 0.0;

 private:
  Algorithm algorithm_;
};

// Variational state of hierarchical Poisson factorization. Every Gamma is
// stored as (shape, rate).
class PfModel final : public RecModel {
 public:
  PfModel(std::size_t n_users, std::size_t n_items, int k);

  Algorithm algorithm() const override { return Algorithm::PF; }
  std::size_t n_users() const override { return static_cast<std::size_t>(theta_shape.rows()); }
  std::size_t n_items() const override { return static_cast<std::size_t>(beta_shape.rows()); }
  void score_user(UserIndex u, std::span<double> out) const override;
  double score(UserIndex u, ItemIndex i) const override;
  bool rating_scale() const override { return false; }

  bool all_positive() const;

  FactorMatrix theta_shape, theta_rate;  // users x k
  FactorMatrix beta_shape, beta_rate;    // items x k
  Eigen::VectorXd activity_shape, activity_rate;    // per user
  Eigen::VectorXd popularity_shape, popularity_rate;  // per item
};

std::unique_ptr<RecModel> fit_baseline(const ModelConfig& config, const RatingMatrix& train);
UserKnnModel fit_userknn(const ModelConfig& config, const RatingMatrix& train);
FactorModel fit_explicit_mf(const ModelConfig& config, const RatingMatrix& train,
                            FitTrace* trace = nullptr);
FactorModel fit_wmf(const ModelConfig& config, const RatingMatrix& train, FitTrace* trace = nullptr);
FactorModel fit_bpr(const ModelConfig& config, const RatingMatrix& train, FitTrace* trace = nullptr);
PfModel fit_pf(const ModelConfig& config, const RatingMatrix& train, FitTrace* trace = nullptr);

// Dispatches on config.algorithm.
std::unique_ptr<RecModel> fit(const ModelConfig& config, const RatingMatrix& train,
                              FitTrace* trace = nullptr);

// Seeded factor initialization: entries uniform in (0, 0.01].
FactorModel init_factor_model(Algorithm algorithm, std::size_t n_users, std::size_t n_items, int k,
                              std::uint64_t seed);

// Loss and gradient routines the trainers step along; exposed for checks.
namespace objective {

struct FactorGradient {
  FactorMatrix P, Q;
  Eigen::VectorXd user_bias, item_bias;
};

// sum over data of (r - score)^2 + lambda * (|P_u|^2 + |Q_i|^2 [+ b_u^2 + b_i^2])
double squared_loss(const FactorModel& m, std::span<const Interaction> data, double lambda);
FactorGradient squared_loss_gradient(const FactorModel& m, std::span<const Interaction> data,
                                     double lambda);

// ln sigmoid(P_u.Q_pos - P_u.Q_neg) - lambda * (|P_u|^2 + |Q_pos|^2 + |Q_neg|^2)
double bpr_triple(const FactorModel& m, UserIndex u, ItemIndex pos, ItemIndex neg, double lambda);

struct BprGradient {
  Eigen::VectorXd user, pos, neg;
};
BprGradient bpr_triple_gradient(const FactorModel& m, UserIndex u, ItemIndex pos, ItemIndex neg,
                                double lambda);

// sum over all (u, i) of c_ui (p_ui - P_u.Q_i)^2 + lambda (|P|^2 + |Q|^2),
// with p_ui = 1 and c_ui = 1 + alpha r_ui on observed pairs, p = 0 and c = 1 elsewhere.
double wmf(const FactorModel& m, const RatingMatrix& train, double alpha, double lambda);

// Observed-entry NMF objective: squared loss plus lambda per observation.
double nmf(const FactorModel& m, const RatingMatrix& train, double lambda);

// Evidence lower bound with the multinomial auxiliaries at their optimum for
// the current Gamma factors.
double pf_elbo(const PfModel& m, const RatingMatrix& train, double prior_shape, double prior_rate);

}  // namespace objective

}  // namespace fairbook

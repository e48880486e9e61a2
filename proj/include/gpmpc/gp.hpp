#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "gpmpc/kernel.hpp"

namespace gpmpc::gp {

struct GPDataset {
  Eigen::MatrixXd inputs;       // one point per row
  Eigen::VectorXd targets;
  Eigen::VectorXd input_times;  // seconds; only used for forgetting ages

  static GPDataset from_time_series(const Eigen::VectorXd& times,
                                    const Eigen::VectorXd& values);
  Eigen::Index size() const { return targets.size(); }
};

/// Throws std::invalid_argument on length/dimension inconsistencies.
void validate(const GPDataset& data);

struct NoiseModel {
  double sigma2 = 0.0;  // observation-noise variance
};

/// Diagonal inflation d_i = kappa * age_i^lambda applied to old samples.
/// kappa = 0 disables forgetting exactly.
struct ForgettingWeights {
  double kappa = 0.0;
  double lambda_ff = 1.0;
};

struct Posterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd query_points;

  /// Diagonal of cov with small negative round-off clamped to zero.
  Eigen::VectorXd variances() const;
};

/// Entry i = kappa * (now - t_i)^lambda. Throws std::invalid_argument when a
/// sample lies in the future (t_i > now).
Eigen::VectorXd forgetting_diag(const Eigen::VectorXd& input_times, double now,
                                const ForgettingWeights& weights);

struct SpdFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;  // diagonal shift that made the factorization succeed
  double log_det() const;
};

/// Cholesky with escalating diagonal jitter: 0, then 1e-10*trace/N scaled by
/// 1, 10, 100. Throws NumericalError when every attempt fails.
SpdFactor factorize_spd(const Eigen::MatrixXd& a);

/// GP posterior on `query` given observations, per the standard conditioning
/// identities. `extra_diag`, when supplied, is added to the training
/// covariance diagonal (the forgetting matrix D).
Posterior posterior(const Kernel& kernel, const NoiseModel& noise,
                    const GPDataset& data, const Eigen::MatrixXd& query,
                    double prior_mean = 0.0,
                    const Eigen::VectorXd* extra_diag = nullptr);

/// Log marginal likelihood -1/2 w'A^{-1}w - 1/2 log|A| - N/2 log 2pi with
/// A = K + sigma2*I + D. Targets are centered by their sample mean first.
/// `now` is only consulted when forgetting is active.
double log_marginal_likelihood(
    const Kernel& kernel, const NoiseModel& noise, const GPDataset& data,
    const std::optional<ForgettingWeights>& forgetting = std::nullopt,
    double now = 0.0);

struct Hyperparameters {
  Kernel kernel;
  NoiseModel noise;
};

/// Marginal likelihood as a reusable objective over packed log-parameters
/// (kernel parameters in packing order, log sigma2 last). Pairwise geometry
/// and the forgetting diagonal are precomputed once.
class MarginalLikelihood {
 public:
  MarginalLikelihood(Kernel structure, GPDataset data,
                     std::optional<ForgettingWeights> forgetting, double now);

  int param_count() const { return n_params_; }
  Eigen::VectorXd pack(const Hyperparameters& h) const;
  Hyperparameters unpack(const Eigen::VectorXd& log_params) const;

  /// Throws NumericalError on factorization failure.
  double value(const Eigen::VectorXd& log_params) const;
  double value_and_gradient(const Eigen::VectorXd& log_params,
                            Eigen::VectorXd& grad) const;

 private:
  Kernel structure_;
  Eigen::VectorXd centered_;
  PairwiseStats stats_;
  Eigen::VectorXd extra_diag_;
  Eigen::Index n_ = 0;
  int n_params_ = 0;
};

struct TrainOptions {
  int restarts = 3;          // total starts; a warm start counts as the first
  int max_iterations = 200;  // per start
  std::uint64_t seed = 0;
  double restart_log_halfwidth = 2.0;  // spread of random starts, log space
  std::optional<Hyperparameters> warm_start;
  // Optional per-parameter log-space ranges for the random draws; overrides
  // the template +/- halfwidth rule where finite. Sized like the packed
  // vector (kernel params then noise).
  std::optional<Eigen::VectorXd> restart_log_lower;
  std::optional<Eigen::VectorXd> restart_log_upper;
  // Deterministic starts appended after the randomized ones. Useful when a
  // caller can point at a likely basin (e.g. a periodogram period) that the
  // random draws would only hit occasionally.
  std::vector<Hyperparameters> extra_starts;
};

struct TrainingResult {
  Hyperparameters hyperparameters;
  double log_marginal = 0.0;
  int restarts_used = 0;
  bool converged = false;
};

/// Multi-start maximization of the log marginal likelihood in log-parameter
/// space, box-constrained to [e^-8, e^8]. Non-finite starts are discarded;
/// the result is the best outcome over all starts, which by the optimizer's
/// monotone-descent contract is >= the likelihood at every start point.
/// Throws TrainingError when no evaluation anywhere was finite.
TrainingResult train(const Kernel& kernel_template,
                     const NoiseModel& noise_template, const GPDataset& data,
                     const std::optional<ForgettingWeights>& forgetting,
                     double now, const TrainOptions& options = {});

}  // namespace gpmpc::gp

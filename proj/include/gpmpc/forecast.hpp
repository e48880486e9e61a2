#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gpmpc/gp.hpp"

namespace gpmpc::forecast {

/// Two-sided normal critical value z with P(|Z| <= z) = beta.
/// Throws std::invalid_argument for beta outside (0, 1).
double critical_value(double beta);

struct ConfidenceSpec {
  double beta = 0.95;
  double alpha = 0.05;
  double z = 1.959963984540054;

  static ConfidenceSpec from_beta(double beta);
};

/// Per-step disturbance interval over the prediction horizon.
struct Envelope {
  Eigen::VectorXd step_times;
  Eigen::VectorXd lower;
  Eigen::VectorXd mean;
  Eigen::VectorXd upper;
  Eigen::VectorXd variance;
  double beta = 0.95;
};

/// bounds = mean +/- z * sqrt(diag cov). Step times are taken from the
/// posterior's (single-column) query grid.
Envelope envelope_from_posterior(const gp::Posterior& post,
                                 const ConfidenceSpec& spec);

struct ForecastConfig {
  int training_steps = 50;      // Nt
  int horizon_steps = 25;       // Np
  double sample_period_s = 2.0; // T
  int nar_order = 3;            // p
  double sigma2 = 2.25;         // noise-variance initialization
  std::optional<gp::ForgettingWeights> forgetting;
  double beta = 0.95;

  // Training budgets (restart counts include the warm start when present).
  int kc_restarts = 3;
  int kc_max_iterations = 150;
  int nar_restarts = 2;
  int nar_max_iterations = 50;
  int nar_max_rows = 0;  // cap on lag rows per NAR model; 0 = Nt+1
};

/// Throws std::invalid_argument when the horizon/lag geometry is infeasible
/// (requires Nt >= p + Np + 1 among the basics).
void validate(const ForecastConfig& config);

struct KcResult {
  // Predictive posterior over the next Np step times; the diagonal carries
  // the fitted noise floor on top of the latent variance.
  gp::Posterior posterior;
  gp::TrainingResult training;
};

/// Kernel-composition forecaster: trains Linear + Periodic + Constant on the
/// last Nt+1 samples and extrapolates Np steps. `history` must hold exactly
/// Nt+1 points. Training failures propagate as TrainingError (the hybrid
/// treats them as a switch signal).
KcResult kc_forecast(const gp::GPDataset& history, const ForecastConfig& config,
                     const std::optional<gp::Hyperparameters>& warm = std::nullopt,
                     std::uint64_t seed = 0);

struct LagData {
  Eigen::MatrixXd inputs;   // (Nt+1) x p, most recent lag first
  Eigen::VectorXd targets;  // length Nt+1, newest first
};

/// Lag design for the chi-step-ahead model. history is oldest-first with
/// history[size-1] the newest sample. Throws std::invalid_argument when
/// history is shorter than Nt + chi + p.
LagData build_lag_matrix(const Eigen::VectorXd& history, int chi, int p, int nt);

struct NarResult {
  // Diagonal predictive covariance over the next Np step times (per-model
  // noise floors included).
  gp::Posterior posterior;
  std::vector<gp::Hyperparameters> models;  // per-chi, reusable as warm starts
};

/// Nonlinear auto-regressive forecaster: one independent isotropic-RBF GP per
/// horizon step. Per-step training failures fall back to the warm/template
/// hyperparameters; only an unusable posterior aborts (ForecastError).
NarResult nar_forecast(const Eigen::VectorXd& history, double t_now,
                       const ForecastConfig& config,
                       const std::vector<gp::Hyperparameters>* warm = nullptr,
                       std::uint64_t seed = 0);

struct SwitchDecision {
  enum class Choice { KC, NAR };
  Choice choice = Choice::KC;
  double std_ratio_stat = 0.0;  // s1 = |std(history)/std(mean_p) - 1|
  double var_ratio_stat = 0.0;  // s2 = |C[Np,Np]/C[1,1] - 1| by default
  bool std_fail = false;
  bool var_fail = false;
  bool degenerate = false;
};

struct HybridState {
  double delta1 = std::sqrt(0.5);
  double delta2 = 1.0;
  // The printed form of the variance test divides first-step by last-step
  // variance; the default flips it so growing uncertainty can be detected.
  bool ratio_as_printed = false;
  std::optional<gp::Hyperparameters> cached_hyperparameters;
  std::vector<gp::Hyperparameters> nar_cache;
  std::uint64_t rng_seed = 0;
};

/// Validity test for a KC posterior: the forecast's spread must match the
/// training data and its uncertainty must not balloon over the horizon.
SwitchDecision switch_decide(const Eigen::VectorXd& history_targets,
                             const gp::Posterior& post,
                             const HybridState& state);

struct HybridResult {
  Envelope envelope;
  SwitchDecision decision;
  HybridState state;
};

/// One step of the hybrid scheme: KC first; on a valid switch decision the
/// trained hyperparameters are cached, otherwise the cache is dropped, the
/// restart seed advances and the NAR forecast is returned. Throws
/// ForecastError when NAR also fails (callers fall back to a fixed range).
HybridResult hybrid_forecast(const gp::GPDataset& history,
                             const ForecastConfig& config,
                             const HybridState& state);

}  // namespace gpmpc::forecast

#include "gpmpc/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "gpmpc/errors.hpp"
#include "gpmpc/rng.hpp"
#include "gpmpc/stats.hpp"

namespace gpmpc::forecast {

namespace {

// Index of the period's log-parameter in the packed composite vector
// [linear.scale, periodic.scale, periodic.period, periodic.roughness,
//  constant.level, noise].
constexpr int kPeriodIndex = 2;

gp::Hyperparameters kc_template(const ForecastConfig& config) {
  gp::SumKernel sum;
  sum.children.emplace_back(gp::LinearKernel{30.0});
  const double t_lo = 4.0 * config.sample_period_s;
  const double t_hi = config.training_steps * config.sample_period_s;
  gp::PeriodicKernel periodic;
  periodic.output_scale = 5.0;
  periodic.period = std::sqrt(t_lo * t_hi);  // geometric center of the range
  periodic.roughness = 1.0;
  sum.children.emplace_back(periodic);
  sum.children.emplace_back(gp::ConstantKernel{1.0});
  return {gp::Kernel(std::move(sum)), gp::NoiseModel{config.sigma2}};
}

// Dominant period of the demeaned window by discrete periodogram (skipping
// the DC bin). O(N^2), trivial at window sizes here.
double periodogram_period(const Eigen::VectorXd& w, double step_s) {
  const Eigen::Index n = w.size();
  const Eigen::ArrayXd centered = w.array() - w.mean();
  double best_power = -1.0;
  Eigen::Index best_bin = 1;
  for (Eigen::Index k = 1; k <= n / 2; ++k) {
    double re = 0.0;
    double im = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double phase = -2.0 * M_PI * static_cast<double>(j * k) /
                           static_cast<double>(n);
      re += centered[j] * std::cos(phase);
      im += centered[j] * std::sin(phase);
    }
    const double power = re * re + im * im;
    if (power > best_power) {
      best_power = power;
      best_bin = k;
    }
  }
  return static_cast<double>(n) * step_s / static_cast<double>(best_bin);
}

}  // namespace

double critical_value(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("critical_value: beta must lie in (0, 1)");
  }
  return stats::inverse_normal_cdf(1.0 - 0.5 * (1.0 - beta));
}

ConfidenceSpec ConfidenceSpec::from_beta(double beta) {
  ConfidenceSpec spec;
  spec.beta = beta;
  spec.alpha = 1.0 - beta;
  spec.z = critical_value(beta);
  return spec;
}

Envelope envelope_from_posterior(const gp::Posterior& post,
                                 const ConfidenceSpec& spec) {
  if (post.query_points.cols() != 1) {
    throw std::invalid_argument(
        "envelope_from_posterior: posterior is not over a time grid");
  }
  Envelope env;
  env.beta = spec.beta;
  env.step_times = post.query_points.col(0);
  env.mean = post.mean;
  env.variance = post.variances();
  const Eigen::VectorXd half = spec.z * env.variance.cwiseSqrt();
  env.lower = env.mean - half;
  env.upper = env.mean + half;
  return env;
}

void validate(const ForecastConfig& config) {
  if (config.horizon_steps < 1 || config.nar_order < 1) {
    throw std::invalid_argument("ForecastConfig: Np and p must be >= 1");
  }
  if (config.training_steps < config.nar_order + config.horizon_steps + 1) {
    throw std::invalid_argument("ForecastConfig: requires Nt >= p + Np + 1");
  }
  if (!(config.sample_period_s > 0.0)) {
    throw std::invalid_argument("ForecastConfig: sample period must be > 0");
  }
  if (config.sigma2 < 0.0) {
    throw std::invalid_argument("ForecastConfig: sigma2 must be >= 0");
  }
  if (!(config.beta > 0.0 && config.beta < 1.0)) {
    throw std::invalid_argument("ForecastConfig: beta must lie in (0, 1)");
  }
  if (config.kc_restarts < 1 || config.kc_max_iterations < 1 ||
      config.nar_restarts < 1 || config.nar_max_iterations < 1 ||
      config.nar_max_rows < 0) {
    throw std::invalid_argument("ForecastConfig: invalid training budget");
  }
  if (config.forgetting.has_value() &&
      (config.forgetting->kappa < 0.0 || config.forgetting->lambda_ff < 0.0)) {
    throw std::invalid_argument("ForecastConfig: invalid forgetting weights");
  }
}

KcResult kc_forecast(const gp::GPDataset& history, const ForecastConfig& config,
                     const std::optional<gp::Hyperparameters>& warm,
                     std::uint64_t seed) {
  validate(config);
  gp::validate(history);
  if (history.size() != config.training_steps + 1) {
    throw std::invalid_argument("kc_forecast: history must hold Nt+1 samples");
  }
  if (history.inputs.cols() != 1) {
    throw std::invalid_argument("kc_forecast: history must be a time series");
  }

  // Re-index time so the newest sample sits at 0. The composite kernel is
  // then scale-stationary across control steps, which keeps warm starts and
  // the switching statistics meaningful throughout a run.
  const double t_now = history.input_times[history.size() - 1];
  gp::GPDataset shifted = history;
  shifted.inputs.col(0).array() -= t_now;
  shifted.input_times.array() -= t_now;

  const gp::Hyperparameters templ = kc_template(config);
  gp::TrainOptions opts;
  opts.restarts = config.kc_restarts;
  opts.max_iterations = config.kc_max_iterations;
  opts.seed = seed;
  opts.warm_start = warm;
  // Cold starts need a resolvable period: draw it log-uniformly between four
  // samples and the window length instead of around the template.
  const int np = gp::param_count(templ.kernel) + 1;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(np, nan);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(np, nan);
  lo[kPeriodIndex] = std::log(4.0 * config.sample_period_s);
  hi[kPeriodIndex] = std::log(config.training_steps * config.sample_period_s);
  opts.restart_log_lower = lo;
  opts.restart_log_upper = hi;
  if (!warm.has_value()) {
    // The period likelihood is multimodal, with a boundary attractor at huge
    // tau where the periodic kernel degenerates into a smooth aperiodic fit.
    // Random draws land in the true-period basin too rarely to rely on, so a
    // cold start also tries the window's dominant periodogram period (the
    // best start still wins on likelihood).
    gp::Hyperparameters seeded = kc_template(config);
    auto& sum = std::get<gp::SumKernel>(seeded.kernel.node);
    auto& periodic = std::get<gp::PeriodicKernel>(sum.children[1].node);
    periodic.period =
        std::clamp(periodogram_period(shifted.targets, config.sample_period_s),
                   4.0 * config.sample_period_s,
                   config.training_steps * config.sample_period_s);
    // A signal dominated by its first harmonic wants a smooth periodic
    // kernel. For roughness psi the kernel's oscillatory term carries
    // variance ~ (scale/psi)^2, so start on the manifold scale = psi * std
    // where the cosine component already matches the signal power; wigglier
    // or flatter starts stall on ridges that aperiodic attractors out-score.
    periodic.roughness = 4.0;
    const double spread = stats::sample_std(
        shifted.targets.data(), static_cast<int>(shifted.targets.size()));
    if (std::isfinite(spread) && spread > 0.0) {
      periodic.output_scale = periodic.roughness * spread;
    }
    opts.extra_starts.push_back(std::move(seeded));
  }

  KcResult out;
  out.training = gp::train(templ.kernel, templ.noise, shifted,
                           config.forgetting, 0.0, opts);

  Eigen::MatrixXd query(config.horizon_steps, 1);
  for (int i = 0; i < config.horizon_steps; ++i) {
    query(i, 0) = (i + 1) * config.sample_period_s;
  }
  const double prior_mean = shifted.targets.mean();
  Eigen::VectorXd fdiag;
  const Eigen::VectorXd* extra = nullptr;
  if (config.forgetting.has_value()) {
    fdiag = gp::forgetting_diag(shifted.input_times, 0.0, *config.forgetting);
    extra = &fdiag;
  }
  out.posterior = gp::posterior(out.training.hyperparameters.kernel,
                                out.training.hyperparameters.noise, shifted,
                                query, prior_mean, extra);
  // Report predictive variance: the forecast is consumed as a bound on the
  // next measured disturbances, so the fitted noise floor belongs on the
  // diagonal. Without it the latent variance ratio between the far and near
  // ends of the horizon trips the switching rule on perfectly healthy fits.
  out.posterior.cov.diagonal().array() +=
      out.training.hyperparameters.noise.sigma2;
  out.posterior.query_points.array() += t_now;  // back to absolute time
  return out;
}

LagData build_lag_matrix(const Eigen::VectorXd& history, int chi, int p, int nt) {
  if (chi < 1 || p < 1 || nt < 0) {
    throw std::invalid_argument("build_lag_matrix: chi/p/nt out of range");
  }
  const Eigen::Index len = history.size();
  if (len < nt + chi + p) {
    throw std::invalid_argument("build_lag_matrix: history too short");
  }
  const Eigen::Index k = len - 1;  // newest sample index
  LagData lag;
  lag.inputs.resize(nt + 1, p);
  lag.targets.resize(nt + 1);
  for (int r = 0; r <= nt; ++r) {
    lag.targets[r] = history[k - r];
    for (int c = 0; c < p; ++c) {
      lag.inputs(r, c) = history[k - r - chi - c];
    }
  }
  return lag;
}

NarResult nar_forecast(const Eigen::VectorXd& history, double t_now,
                       const ForecastConfig& config,
                       const std::vector<gp::Hyperparameters>* warm,
                       std::uint64_t seed) {
  validate(config);
  const int p = config.nar_order;
  const int np = config.horizon_steps;
  const Eigen::Index len = history.size();
  // Every model needs at least 3 lag rows; the last step is the tightest.
  if (len < np + p + 2) {
    throw std::invalid_argument("nar_forecast: history too short");
  }
  const bool use_warm =
      warm != nullptr && static_cast<int>(warm->size()) == np;

  Eigen::VectorXd mean(np), var(np);
  NarResult out;
  out.models.reserve(np);

  Eigen::MatrixXd present(1, p);
  for (int c = 0; c < p; ++c) present(0, c) = history[len - 1 - c];

  for (int chi = 1; chi <= np; ++chi) {
    int nt = std::min<int>(config.training_steps,
                           static_cast<int>(len) - chi - p);
    if (config.nar_max_rows > 0) nt = std::min(nt, config.nar_max_rows - 1);
    const LagData lag = build_lag_matrix(history, chi, p, nt);

    gp::GPDataset data;
    data.inputs = lag.inputs;
    data.targets = lag.targets;
    data.input_times = Eigen::VectorXd::LinSpaced(
        nt + 1, t_now, t_now - nt * config.sample_period_s);

    gp::Hyperparameters templ;
    gp::RbfKernel rbf;
    rbf.output_scale =
        std::max(0.5, stats::sample_std(lag.targets.data(),
                                        static_cast<int>(lag.targets.size())));
    rbf.length_scale = 10.0;
    gp::SumKernel sum;
    sum.children.emplace_back(rbf);
    sum.children.emplace_back(gp::ConstantKernel{1.0});
    templ.kernel = gp::Kernel(std::move(sum));
    templ.noise.sigma2 = config.sigma2;

    gp::TrainOptions opts;
    opts.restarts = config.nar_restarts;
    opts.max_iterations = config.nar_max_iterations;
    opts.seed = mix_seed(seed, 100 + static_cast<std::uint64_t>(chi));
    if (use_warm) opts.warm_start = (*warm)[chi - 1];

    gp::Hyperparameters fitted;
    try {
      fitted = gp::train(templ.kernel, templ.noise, data, std::nullopt, t_now,
                         opts)
                   .hyperparameters;
    } catch (const TrainingError&) {
      // Keep the step alive on whatever parameters we already trust.
      fitted = use_warm ? (*warm)[chi - 1] : templ;
    }

    try {
      const gp::Posterior post = gp::posterior(
          fitted.kernel, fitted.noise, data, present, lag.targets.mean());
      mean[chi - 1] = post.mean[0];
      // Predictive variance, matching kc_forecast: each step model adds its
      // own fitted noise floor.
      var[chi - 1] = post.variances()[0] + fitted.noise.sigma2;
    } catch (const NumericalError& e) {
      throw ForecastError(std::string("nar_forecast: step posterior failed: ") +
                          e.what());
    }
    out.models.push_back(std::move(fitted));
  }

  out.posterior.mean = mean;
  out.posterior.cov = var.asDiagonal();
  out.posterior.query_points.resize(np, 1);
  for (int i = 0; i < np; ++i) {
    out.posterior.query_points(i, 0) = t_now + (i + 1) * config.sample_period_s;
  }
  return out;
}

SwitchDecision switch_decide(const Eigen::VectorXd& history_targets,
                             const gp::Posterior& post,
                             const HybridState& state) {
  if (post.mean.size() < 2) {
    throw std::invalid_argument("switch_decide: need at least 2 steps");
  }
  if (!(state.delta1 > 0.0 && state.delta2 > 0.0)) {
    throw std::invalid_argument("switch_decide: thresholds must be positive");
  }
  SwitchDecision d;
  const Eigen::Index last = post.mean.size() - 1;
  const double sd_hist = stats::sample_std(
      history_targets.data(), static_cast<int>(history_targets.size()));
  const double sd_mean =
      stats::sample_std(post.mean.data(), static_cast<int>(post.mean.size()));
  const double var_first = post.cov(0, 0);
  const double var_last = post.cov(last, last);
  const double var_den = state.ratio_as_printed ? var_last : var_first;

  if (sd_mean <= 0.0 || var_den <= 0.0) {
    d.degenerate = true;
  } else {
    d.std_ratio_stat = std::abs(sd_hist / sd_mean - 1.0);
    d.var_ratio_stat = state.ratio_as_printed
                           ? std::abs(var_first / var_last - 1.0)
                           : std::abs(var_last / var_first - 1.0);
    d.std_fail = d.std_ratio_stat > state.delta1 * state.delta1;
    d.var_fail = d.var_ratio_stat > state.delta2 * state.delta2;
  }
  d.choice = (d.std_fail || d.var_fail || d.degenerate)
                 ? SwitchDecision::Choice::NAR
                 : SwitchDecision::Choice::KC;
  return d;
}

HybridResult hybrid_forecast(const gp::GPDataset& history,
                             const ForecastConfig& config,
                             const HybridState& state) {
  validate(config);
  gp::validate(history);
  const Eigen::Index len = history.size();
  const int window = config.training_steps + 1;
  if (len < window || len < config.horizon_steps + config.nar_order + 2) {
    throw std::invalid_argument("hybrid_forecast: history too short");
  }

  gp::GPDataset kc_window;
  kc_window.inputs = history.inputs.bottomRows(window);
  kc_window.targets = history.targets.tail(window);
  kc_window.input_times = history.input_times.tail(window);

  HybridResult out;
  out.state = state;

  bool kc_ok = true;
  KcResult kc;
  try {
    kc = kc_forecast(kc_window, config, state.cached_hyperparameters,
                     state.rng_seed);
  } catch (const TrainingError&) {
    kc_ok = false;
  }

  if (kc_ok) {
    // Compare the forecast against the same-length trailing window of
    // measurements. Matched windows keep the std ratio phase-invariant for
    // cyclic signals; the full training window would reject a correct fit
    // whenever the horizon covers a crest or trough.
    const Eigen::Index w_len =
        std::min<Eigen::Index>(kc.posterior.mean.size(), kc_window.targets.size());
    out.decision =
        switch_decide(kc_window.targets.tail(w_len), kc.posterior, state);
  } else {
    out.decision.degenerate = true;
    out.decision.choice = SwitchDecision::Choice::NAR;
  }

  const ConfidenceSpec spec = ConfidenceSpec::from_beta(config.beta);
  if (out.decision.choice == SwitchDecision::Choice::KC) {
    out.state.cached_hyperparameters = kc.training.hyperparameters;
    out.envelope = envelope_from_posterior(kc.posterior, spec);
    return out;
  }

  out.state.cached_hyperparameters.reset();
  out.state.rng_seed = state.rng_seed + 1;  // fresh restart draws next step
  const double t_now = history.input_times[len - 1];
  try {
    NarResult nar =
        nar_forecast(history.targets, t_now, config,
                     state.nar_cache.empty() ? nullptr : &state.nar_cache,
                     out.state.rng_seed);
    out.state.nar_cache = std::move(nar.models);
    out.envelope = envelope_from_posterior(nar.posterior, spec);
  } catch (const std::invalid_argument& e) {
    throw ForecastError(std::string("hybrid_forecast: NAR failed: ") + e.what());
  }
  return out;
}

}  // namespace gpmpc::forecast

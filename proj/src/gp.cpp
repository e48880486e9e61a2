#include "gpmpc/gp.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gpmpc/errors.hpp"
#include "gpmpc/optim.hpp"
#include "gpmpc/rng.hpp"

namespace gpmpc::gp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112353;
constexpr double kLogBound = 8.0;  // hyperparameter box is [e^-8, e^8]

}  // namespace

GPDataset GPDataset::from_time_series(const Eigen::VectorXd& times,
                                      const Eigen::VectorXd& values) {
  GPDataset d;
  d.inputs = times;
  d.targets = values;
  d.input_times = times;
  validate(d);
  return d;
}

void validate(const GPDataset& data) {
  const Eigen::Index n = data.targets.size();
  if (n < 1) throw std::invalid_argument("GPDataset: empty dataset");
  if (data.inputs.rows() != n || data.input_times.size() != n) {
    throw std::invalid_argument("GPDataset: inputs/targets/times length mismatch");
  }
  if (data.inputs.cols() < 1) {
    throw std::invalid_argument("GPDataset: zero-dimensional inputs");
  }
}

Eigen::VectorXd Posterior::variances() const {
  return cov.diagonal().cwiseMax(0.0);
}

Eigen::VectorXd forgetting_diag(const Eigen::VectorXd& input_times, double now,
                                const ForgettingWeights& weights) {
  if (weights.kappa < 0.0 || weights.lambda_ff < 0.0) {
    throw std::invalid_argument("forgetting_diag: negative weights");
  }
  if (weights.kappa == 0.0) return Eigen::VectorXd::Zero(input_times.size());
  Eigen::VectorXd d(input_times.size());
  for (Eigen::Index i = 0; i < input_times.size(); ++i) {
    const double age = now - input_times[i];
    if (age < 0.0) {
      throw std::invalid_argument("forgetting_diag: sample newer than `now`");
    }
    d[i] = weights.kappa * std::pow(age, weights.lambda_ff);
  }
  return d;
}

double SpdFactor::log_det() const {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

SpdFactor factorize_spd(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  const double base = 1e-10 * a.trace() / static_cast<double>(n);
  const double scales[] = {0.0, 1.0, 10.0, 100.0};
  SpdFactor f;
  for (double s : scales) {
    const double jitter = s * base;
    Eigen::MatrixXd shifted = a;
    if (jitter != 0.0) shifted.diagonal().array() += jitter;
    f.llt.compute(shifted);
    if (f.llt.info() == Eigen::Success &&
        (f.llt.matrixLLT().diagonal().array() > 0.0).all()) {
      f.jitter = jitter;
      return f;
    }
  }
  std::ostringstream msg;
  msg << "factorize_spd: matrix not positive definite after jitter "
      << 100.0 * base << " (n=" << n << ", trace=" << a.trace()
      << ", min diag=" << a.diagonal().minCoeff() << ")";
  throw NumericalError(msg.str());
}

Posterior posterior(const Kernel& kernel, const NoiseModel& noise,
                    const GPDataset& data, const Eigen::MatrixXd& query,
                    double prior_mean, const Eigen::VectorXd* extra_diag) {
  validate(data);
  validate(kernel);
  if (noise.sigma2 < 0.0) throw std::invalid_argument("posterior: sigma2 < 0");
  if (query.rows() < 1 || query.cols() != data.inputs.cols()) {
    throw std::invalid_argument("posterior: bad query grid");
  }
  if (extra_diag != nullptr && extra_diag->size() != data.size()) {
    throw std::invalid_argument("posterior: extra_diag length mismatch");
  }

  Eigen::MatrixXd a = gram_matrix(kernel, data.inputs, data.inputs);
  a.diagonal().array() += noise.sigma2;
  if (extra_diag != nullptr) a.diagonal() += *extra_diag;
  const SpdFactor f = factorize_spd(a);

  const Eigen::MatrixXd k_pt = gram_matrix(kernel, query, data.inputs);
  const Eigen::VectorXd w = data.targets.array() - prior_mean;

  Posterior post;
  post.query_points = query;
  post.mean = (k_pt * f.llt.solve(w)).array() + prior_mean;
  // C = K_pp - V'V with V = L^{-1} K_tp keeps the result symmetric.
  const Eigen::MatrixXd v =
      f.llt.matrixL().solve(Eigen::MatrixXd(k_pt.transpose()));
  post.cov = gram_matrix(kernel, query, query) - v.transpose() * v;
  post.cov = 0.5 * (post.cov + post.cov.transpose()).eval();
  return post;
}

double log_marginal_likelihood(const Kernel& kernel, const NoiseModel& noise,
                               const GPDataset& data,
                               const std::optional<ForgettingWeights>& forgetting,
                               double now) {
  MarginalLikelihood lml(kernel, data, forgetting, now);
  return lml.value(lml.pack({kernel, noise}));
}

MarginalLikelihood::MarginalLikelihood(Kernel structure, GPDataset data,
                                       std::optional<ForgettingWeights> forgetting,
                                       double now)
    : structure_(std::move(structure)) {
  validate(data);
  validate(structure_);
  n_ = data.size();
  n_params_ = gpmpc::gp::param_count(structure_) + 1;
  centered_ = data.targets.array() - data.targets.mean();
  stats_ = build_pairwise(data.inputs, data.inputs);
  extra_diag_ = forgetting.has_value()
                    ? forgetting_diag(data.input_times, now, *forgetting)
                    : Eigen::VectorXd::Zero(n_);
}

Eigen::VectorXd MarginalLikelihood::pack(const Hyperparameters& h) const {
  Eigen::VectorXd v(n_params_);
  v.head(n_params_ - 1) = pack_log_params(h.kernel);
  v[n_params_ - 1] = std::log(h.noise.sigma2);
  return v;
}

Hyperparameters MarginalLikelihood::unpack(const Eigen::VectorXd& log_params) const {
  if (log_params.size() != n_params_) {
    throw std::invalid_argument("MarginalLikelihood: parameter size mismatch");
  }
  Hyperparameters h;
  h.kernel = unpack_log_params(structure_, log_params.head(n_params_ - 1));
  h.noise.sigma2 = std::exp(log_params[n_params_ - 1]);
  return h;
}

double MarginalLikelihood::value(const Eigen::VectorXd& log_params) const {
  const Hyperparameters h = unpack(log_params);
  Eigen::MatrixXd a = gram_from_stats(h.kernel, stats_);
  a.diagonal().array() += h.noise.sigma2;
  a.diagonal() += extra_diag_;
  const SpdFactor f = factorize_spd(a);
  const Eigen::VectorXd alpha = f.llt.solve(centered_);
  return -0.5 * centered_.dot(alpha) - 0.5 * f.log_det() -
         0.5 * static_cast<double>(n_) * kLog2Pi;
}

double MarginalLikelihood::value_and_gradient(const Eigen::VectorXd& log_params,
                                              Eigen::VectorXd& grad) const {
  const Hyperparameters h = unpack(log_params);
  Eigen::MatrixXd a = gram_from_stats(h.kernel, stats_);
  a.diagonal().array() += h.noise.sigma2;
  a.diagonal() += extra_diag_;
  const SpdFactor f = factorize_spd(a);
  const Eigen::VectorXd alpha = f.llt.solve(centered_);
  const double value = -0.5 * centered_.dot(alpha) - 0.5 * f.log_det() -
                       0.5 * static_cast<double>(n_) * kLog2Pi;

  // d lml / d theta_j = 1/2 tr((alpha alpha' - A^{-1}) dA/dtheta_j)
  const Eigen::MatrixXd a_inv =
      f.llt.solve(Eigen::MatrixXd::Identity(n_, n_));
  const std::vector<Eigen::MatrixXd> dk =
      gram_log_param_gradients(h.kernel, stats_);
  grad.resize(n_params_);
  for (std::size_t j = 0; j < dk.size(); ++j) {
    const double quad = alpha.dot(dk[j] * alpha);
    const double tr = (a_inv.array() * dk[j].array()).sum();
    grad[static_cast<Eigen::Index>(j)] = 0.5 * (quad - tr);
  }
  // Noise enters the diagonal as sigma2 = exp(log sigma2).
  grad[n_params_ - 1] =
      0.5 * h.noise.sigma2 * (alpha.squaredNorm() - a_inv.trace());
  return value;
}

TrainingResult train(const Kernel& kernel_template,
                     const NoiseModel& noise_template, const GPDataset& data,
                     const std::optional<ForgettingWeights>& forgetting,
                     double now, const TrainOptions& options) {
  if (options.restarts < 1) {
    throw std::invalid_argument("train: restarts must be >= 1");
  }
  if (data.size() < 3) {
    throw std::invalid_argument("train: need at least 3 samples");
  }
  const MarginalLikelihood lml(kernel_template, data, forgetting, now);
  const int np = lml.param_count();
  const Eigen::VectorXd lower = Eigen::VectorXd::Constant(np, -kLogBound);
  const Eigen::VectorXd upper = Eigen::VectorXd::Constant(np, kLogBound);
  const Eigen::VectorXd center = lml.pack({kernel_template, noise_template})
                                     .cwiseMax(lower)
                                     .cwiseMin(upper);

  // Objective for the minimizer: negated likelihood, +inf on numerical
  // failure so the line search treats the point as infeasible.
  const optim::Objective objective = [&lml](const Eigen::VectorXd& x,
                                            Eigen::VectorXd* g) {
    try {
      if (g == nullptr) return -lml.value(x);
      double v = lml.value_and_gradient(x, *g);
      *g = -*g;
      return -v;
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  optim::Options opt;
  opt.max_iterations = options.max_iterations;

  Rng rng(mix_seed(options.seed, 0x6770));
  bool have_best = false;
  double best_value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x;
  bool best_converged = false;

  TrainingResult out;
  const int n_starts =
      options.restarts + static_cast<int>(options.extra_starts.size());
  for (int r = 0; r < n_starts; ++r) {
    Eigen::VectorXd x0(np);
    if (r == 0 && options.warm_start.has_value()) {
      x0 = lml.pack(*options.warm_start);
    } else if (r >= options.restarts) {
      x0 = lml.pack(options.extra_starts[r - options.restarts]);
    } else {
      for (int i = 0; i < np; ++i) {
        double lo = center[i] - options.restart_log_halfwidth;
        double hi = center[i] + options.restart_log_halfwidth;
        if (options.restart_log_lower.has_value() &&
            std::isfinite((*options.restart_log_lower)[i])) {
          lo = (*options.restart_log_lower)[i];
        }
        if (options.restart_log_upper.has_value() &&
            std::isfinite((*options.restart_log_upper)[i])) {
          hi = (*options.restart_log_upper)[i];
        }
        x0[i] = rng.uniform(lo, hi);
      }
    }
    x0 = x0.cwiseMax(lower).cwiseMin(upper);

    const optim::Result res = optim::minimize_box(objective, x0, lower, upper, opt);
    ++out.restarts_used;
    if (!std::isfinite(res.value)) continue;  // failed start, discarded
    if (!have_best || res.value < best_value) {
      have_best = true;
      best_value = res.value;
      best_x = res.x;
      best_converged = res.converged;
    }
  }

  if (!have_best) {
    throw TrainingError("train: no restart produced a finite likelihood");
  }
  out.hyperparameters = lml.unpack(best_x);
  out.log_marginal = -best_value;
  out.converged = best_converged;
  return out;
}

}  // namespace gpmpc::gp

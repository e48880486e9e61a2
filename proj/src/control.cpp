#include "gpmpc/control.hpp"

#include <cmath>
#include <stdexcept>

#include "gpmpc/errors.hpp"
#include "gpmpc/optim.hpp"

namespace gpmpc::control {

void validate(const ControlConfig& config) {
  if (config.horizon_steps < 1) {
    throw std::invalid_argument("ControlConfig: horizon must be >= 1 steps");
  }
  if (!(config.step_s > 0.0)) {
    throw std::invalid_argument("ControlConfig: step must be positive");
  }
  if (!(config.u_min_kw < config.u_max_kw)) {
    throw std::invalid_argument("ControlConfig: requires u_min < u_max");
  }
  if (config.eta_lower < 0.0 || config.eta_upper < 0.0) {
    throw std::invalid_argument("ControlConfig: violation weights must be >= 0");
  }
  if (!(config.beta > 0.0 && config.beta < 1.0)) {
    throw std::invalid_argument("ControlConfig: beta must lie in (0, 1)");
  }
  if (config.max_iterations < 1 || !(config.tolerance > 0.0)) {
    throw std::invalid_argument("ControlConfig: invalid solver budget");
  }
}

Eigen::VectorXd worst_case_sequence(const forecast::Envelope& envelope,
                                    const WorstCaseMode& mode,
                                    int horizon_steps) {
  if (const auto* perfect = std::get_if<PerfectTrace>(&mode)) {
    if (perfect->mdot_g_s.size() != horizon_steps) {
      throw std::invalid_argument("worst_case_sequence: trace length mismatch");
    }
    return perfect->mdot_g_s;
  }
  if (const auto* fixed = std::get_if<FixedRange>(&mode)) {
    return Eigen::VectorXd::Constant(horizon_steps, fixed->hi_g_s);
  }
  if (envelope.upper.size() != horizon_steps) {
    throw std::invalid_argument("worst_case_sequence: envelope length mismatch");
  }
  return envelope.upper.cwiseMax(0.0);
}

ObjectiveBreakdown evaluate_objective(const Eigen::VectorXd& u_seq_kw,
                                      const Eigen::VectorXd& mdot_seq_g_s,
                                      double temp0_c,
                                      const plant::PlantParams& params,
                                      const ControlConfig& config) {
  const int np = config.horizon_steps;
  if (u_seq_kw.size() != np || mdot_seq_g_s.size() != np) {
    throw std::invalid_argument("evaluate_objective: sequence length mismatch");
  }
  ObjectiveBreakdown out;
  out.predicted_temps.resize(np);
  double temp = temp0_c;
  for (int i = 0; i < np; ++i) {
    temp = plant::rk4_step(params, temp, u_seq_kw[i],
                           1e-3 * mdot_seq_g_s[i], config.step_s);
    out.predicted_temps[i] = temp;
    out.j_ec += u_seq_kw[i] * u_seq_kw[i];
    // max(expr, 0) rather than max(0, expr): a NaN trajectory must poison
    // the cost instead of reading as "no violation".
    out.j_cv += config.eta_lower * std::max(config.temp_min_c - temp, 0.0);
    if (config.temp_max_c.has_value()) {
      out.j_cv += config.eta_upper * std::max(temp - *config.temp_max_c, 0.0);
    }
  }
  out.j_total = out.j_ec + out.j_cv;
  return out;
}

ControlSolution solve_rempc(double temp0_c, const forecast::Envelope& envelope,
                            const WorstCaseMode& mode,
                            const plant::PlantParams& params,
                            const ControlConfig& config,
                            const std::optional<Eigen::VectorXd>& warm_u) {
  validate(config);
  if (!std::isfinite(temp0_c)) {
    throw std::invalid_argument("solve_rempc: non-finite initial temperature");
  }
  const int np = config.horizon_steps;
  const Eigen::VectorXd mdot = worst_case_sequence(envelope, mode, np);

  // With the disturbance fixed, the RK4 step is exactly affine in (T, u):
  // T_{i+1} = a_i T_i + b_i u_i + c_i. Identify the coefficients from three
  // probe evaluations per step and use them for an adjoint-style gradient;
  // the objective value itself comes from the same rollout as
  // evaluate_objective so the reported cost is consistent.
  Eigen::VectorXd a(np), b(np), c(np);
  for (int i = 0; i < np; ++i) {
    const double m = 1e-3 * mdot[i];
    c[i] = plant::rk4_step(params, 0.0, 0.0, m, config.step_s);
    a[i] = plant::rk4_step(params, 1.0, 0.0, m, config.step_s) - c[i];
    b[i] = plant::rk4_step(params, 0.0, 1.0, m, config.step_s) - c[i];
  }

  const optim::Objective objective = [&](const Eigen::VectorXd& u,
                                         Eigen::VectorXd* grad) {
    Eigen::VectorXd temps(np);
    double temp = temp0_c;
    double j = 0.0;
    for (int i = 0; i < np; ++i) {
      temp = plant::rk4_step(params, temp, u[i], 1e-3 * mdot[i], config.step_s);
      temps[i] = temp;
      j += u[i] * u[i];
      j += config.eta_lower * std::max(config.temp_min_c - temp, 0.0);
      if (config.temp_max_c.has_value()) {
        j += config.eta_upper * std::max(temp - *config.temp_max_c, 0.0);
      }
    }
    if (grad != nullptr) {
      grad->resize(np);
      double mu = 0.0;  // dJ/dT_{i+1}, accumulated backwards
      for (int i = np - 1; i >= 0; --i) {
        double pen = 0.0;
        if (temps[i] < config.temp_min_c) pen -= config.eta_lower;
        if (config.temp_max_c.has_value() && temps[i] > *config.temp_max_c) {
          pen += config.eta_upper;
        }
        mu = pen + (i + 1 < np ? a[i + 1] * mu : 0.0);
        (*grad)[i] = 2.0 * u[i] + b[i] * mu;
      }
    }
    return j;
  };

  Eigen::VectorXd u0 = Eigen::VectorXd::Constant(
      np, 0.5 * (config.u_min_kw + config.u_max_kw));
  if (warm_u.has_value()) {
    u0 = warm_u->cwiseMax(config.u_min_kw).cwiseMin(config.u_max_kw);
  }
  if (u0.size() != np) {
    throw std::invalid_argument("solve_rempc: warm start length mismatch");
  }

  optim::Options opts;
  opts.max_iterations = config.max_iterations;
  opts.gradient_tolerance = config.tolerance;
  const optim::Result res = optim::minimize_box(
      objective, u0, Eigen::VectorXd::Constant(np, config.u_min_kw),
      Eigen::VectorXd::Constant(np, config.u_max_kw), opts);
  if (!std::isfinite(res.value)) {
    throw SolverError("solve_rempc: objective non-finite at every probe");
  }

  const ObjectiveBreakdown bd =
      evaluate_objective(res.x, mdot, temp0_c, params, config);
  ControlSolution sol;
  sol.u_seq_kw = res.x;
  sol.predicted_temps = bd.predicted_temps;
  sol.j_total = bd.j_total;
  sol.j_ec = bd.j_ec;
  sol.j_cv = bd.j_cv;
  sol.solver_iterations = res.iterations;
  sol.converged = res.converged;
  return sol;
}

}  // namespace gpmpc::control

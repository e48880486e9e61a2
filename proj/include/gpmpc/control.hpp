#pragma once

#include <optional>
#include <variant>

#include <Eigen/Dense>

#include "gpmpc/forecast.hpp"
#include "gpmpc/plant.hpp"

namespace gpmpc::control {

struct ControlConfig {
  int horizon_steps = 25;  // Np
  double step_s = 2.0;     // h
  double u_min_kw = 0.0;
  double u_max_kw = 10.0;
  double temp_min_c = 55.0;
  std::optional<double> temp_max_c;  // no upper constraint by default
  double eta_lower = 10.0;           // per-step violation weight, lower bound
  double eta_upper = 0.0;
  double beta = 0.95;  // envelope confidence the controller expects
  int max_iterations = 60;
  double tolerance = 1e-7;
};

void validate(const ControlConfig& config);

/// Worst-case disturbance selection. The plant cools monotonically in the
/// inlet flow, so the envelope's upper bound is the exact inner maximizer.
struct RobustUpper {};
struct PerfectTrace {
  Eigen::VectorXd mdot_g_s;  // true future disturbance, length Np
};
struct FixedRange {
  double lo_g_s = 0.0;
  double hi_g_s = 70.0;
};
using WorstCaseMode = std::variant<RobustUpper, PerfectTrace, FixedRange>;

/// Disturbance sequence (g/s) the controller plans against. Throws
/// std::invalid_argument on length mismatches.
Eigen::VectorXd worst_case_sequence(const forecast::Envelope& envelope,
                                    const WorstCaseMode& mode,
                                    int horizon_steps);

struct ObjectiveBreakdown {
  double j_total = 0.0;
  double j_ec = 0.0;  // sum of u_i^2
  double j_cv = 0.0;  // violation penalty with slacks eliminated
  Eigen::VectorXd predicted_temps;  // T_1 .. T_Np
};

/// Rolls the RK4 model forward under `mdot_seq_g_s` and prices the
/// trajectory: J_EC = sum u^2, J_CV = sum eta_lower*max(0, Tmin - T_i)
/// (+ the analogous upper term). This closed form is the exact minimum of
/// the slack formulation, since each optimal slack is the violation's
/// positive part.
ObjectiveBreakdown evaluate_objective(const Eigen::VectorXd& u_seq_kw,
                                      const Eigen::VectorXd& mdot_seq_g_s,
                                      double temp0_c,
                                      const plant::PlantParams& params,
                                      const ControlConfig& config);

struct ControlSolution {
  Eigen::VectorXd u_seq_kw;
  Eigen::VectorXd predicted_temps;
  double j_total = 0.0;
  double j_ec = 0.0;
  double j_cv = 0.0;
  int solver_iterations = 0;
  bool converged = false;
};

/// Minimizes evaluate_objective over the input box, with the disturbance
/// fixed to worst_case_sequence. Starts from warm_u when given, else
/// mid-range. The returned objective never exceeds the start point's.
/// Throws SolverError if no probe produced a finite value (callers apply
/// u = u_max as the safe fallback).
ControlSolution solve_rempc(
    double temp0_c, const forecast::Envelope& envelope,
    const WorstCaseMode& mode, const plant::PlantParams& params,
    const ControlConfig& config,
    const std::optional<Eigen::VectorXd>& warm_u = std::nullopt);

}  // namespace gpmpc::control

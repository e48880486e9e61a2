#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gpmpc/control.hpp"
#include "gpmpc/forecast.hpp"
#include "gpmpc/plant.hpp"
#include "gpmpc/scenario.hpp"

namespace gpmpc::sim {

enum class ControllerKind { Perfect, FixedRange, KC, KCff, NAR, Hybrid, Hybridff };

/// Canonical names: perfect, fixed_range, kc, kc_ff, nar, hybrid, hybrid_ff.
/// Parsing is case-insensitive and tolerates omitted underscores.
ControllerKind controller_from_name(const std::string& name);
std::string controller_name(ControllerKind kind);

struct SimConfig {
  scenario::ScenarioSpec scenario;
  ControllerKind controller = ControllerKind::Hybrid;
  forecast::ForecastConfig forecast;
  control::ControlConfig control;
  plant::PlantParams plant;

  // Switching thresholds for the hybrid variants.
  double delta1 = std::sqrt(0.5);
  double delta2 = 1.0;
  bool switch_ratio_as_printed = false;

  double duration_s = 600.0;
  double initial_temp_c = 55.0;
  std::uint64_t seed = 0;
  // Wall-clock solve times break byte-level reproducibility, so they are
  // opt-in; solve_ms stays 0 otherwise.
  bool measure_solve_time = false;
};

void validate(const SimConfig& config);

struct StepRecord {
  double t = 0.0;
  double temp_c = 0.0;   // state when the input was chosen
  double u_kw = 0.0;     // first input, applied over [t, t+h)
  double mdot_true = 0.0;
  double mdot_meas = 0.0;
  double env_lo = 0.0;   // one-step-ahead envelope bounds
  double env_hi = 0.0;
  int switch_choice = -1;  // -1 not a hybrid, 0 KC, 1 NAR
  double j_step = 0.0;     // realized u^2 + eta * violation * h
  double solve_ms = 0.0;
};

struct Metrics {
  double avg_objective = 0.0;
  double violation_degree_seconds = 0.0;
  double total_heater_energy_kj = 0.0;
  double switch_fraction_nar = 0.0;
  double peak_violation_c = 0.0;
};

struct RunRecord {
  std::vector<StepRecord> steps;
  Metrics metrics;
};

/// Summary statistics from the per-step log alone (given the run's step
/// length and temperature bound), so a written CSV can be checked against
/// the reported metrics exactly.
Metrics recompute_metrics(const std::vector<StepRecord>& steps, double step_s,
                          double temp_min_c);

/// Scenario actually simulated by run_closed_loop(config): the sim seed,
/// duration and sample period override the nested spec's copies.
scenario::ScenarioSpec effective_scenario(const SimConfig& config);

/// Full closed-loop run: generate the disturbance, forecast, solve the
/// REMPC, apply the first input to the truth-driven plant, log every step.
RunRecord run_closed_loop(const SimConfig& config);

/// Same loop driven by an externally supplied disturbance trace (the trace
/// must cover the training window, the run and the lookahead pad on the
/// config's sample grid).
RunRecord run_closed_loop(const SimConfig& config,
                          const scenario::DisturbanceTrace& trace);

struct ComparisonRow {
  ControllerKind controller = ControllerKind::Perfect;
  Metrics mean;
  Metrics sd;
  double norm_avg_objective = std::nan("");  // relative to Perfect's mean
  std::string status = "ok";
};

/// Runs every controller on the same disturbance realizations (one per
/// seed). Failed runs mark the row instead of aborting the table.
std::vector<ComparisonRow> compare_controllers(
    const SimConfig& base, const std::vector<ControllerKind>& controllers,
    const std::vector<std::uint64_t>& seeds);

struct SweepRow {
  int factor = 1;
  ControllerKind controller = ControllerKind::Hybrid;
  Metrics metrics;
  double normalized = std::nan("");  // avg_objective / same controller at factors[0]
  std::string status = "ok";
};

/// Re-runs Hybrid and Hybridff with the training horizon scaled by each
/// factor (the scenario pre-roll is stretched to keep the first window
/// full).
std::vector<SweepRow> sweep_training_horizon(const SimConfig& base,
                                             const std::vector<int>& factors);

}  // namespace gpmpc::sim

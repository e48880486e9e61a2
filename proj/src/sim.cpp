#include "gpmpc/sim.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "gpmpc/errors.hpp"
#include "gpmpc/rng.hpp"

namespace gpmpc::sim {

namespace {

bool uses_forgetting(ControllerKind kind) {
  return kind == ControllerKind::KCff || kind == ControllerKind::Hybridff;
}

bool is_hybrid(ControllerKind kind) {
  return kind == ControllerKind::Hybrid || kind == ControllerKind::Hybridff;
}

forecast::Envelope fixed_range_envelope(const Eigen::VectorXd& step_times,
                                        double lo, double hi, double beta) {
  forecast::Envelope env;
  env.beta = beta;
  env.step_times = step_times;
  const int n = static_cast<int>(step_times.size());
  env.lower = Eigen::VectorXd::Constant(n, lo);
  env.upper = Eigen::VectorXd::Constant(n, hi);
  env.mean = Eigen::VectorXd::Constant(n, 0.5 * (lo + hi));
  const double z = forecast::critical_value(beta);
  const double half = 0.5 * (hi - lo);
  env.variance = Eigen::VectorXd::Constant(n, (half / z) * (half / z));
  return env;
}

struct LoopState {
  std::optional<gp::Hyperparameters> kc_cache;
  std::vector<gp::Hyperparameters> nar_cache;
  forecast::HybridState hybrid;
};

}  // namespace

ControllerKind controller_from_name(const std::string& name) {
  std::string s;
  for (char c : name) {
    if (c == '-' || c == '_' || c == ' ') continue;
    s.push_back(static_cast<char>(std::tolower(c)));
  }
  if (s == "perfect") return ControllerKind::Perfect;
  if (s == "fixedrange" || s == "fixed") return ControllerKind::FixedRange;
  if (s == "kc") return ControllerKind::KC;
  if (s == "kcff") return ControllerKind::KCff;
  if (s == "nar") return ControllerKind::NAR;
  if (s == "hybrid") return ControllerKind::Hybrid;
  if (s == "hybridff") return ControllerKind::Hybridff;
  throw std::invalid_argument("unknown controller '" + name + "'");
}

std::string controller_name(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Perfect: return "perfect";
    case ControllerKind::FixedRange: return "fixed_range";
    case ControllerKind::KC: return "kc";
    case ControllerKind::KCff: return "kc_ff";
    case ControllerKind::NAR: return "nar";
    case ControllerKind::Hybrid: return "hybrid";
    case ControllerKind::Hybridff: return "hybrid_ff";
  }
  return "perfect";
}

void validate(const SimConfig& config) {
  scenario::validate(config.scenario);
  forecast::validate(config.forecast);
  control::validate(config.control);
  if (config.control.horizon_steps != config.forecast.horizon_steps) {
    throw std::invalid_argument(
        "SimConfig: control and forecast horizons must agree");
  }
  if (config.control.step_s != config.forecast.sample_period_s) {
    throw std::invalid_argument(
        "SimConfig: control step must equal the sample period");
  }
  if (!(config.duration_s > 0.0)) {
    throw std::invalid_argument("SimConfig: duration must be positive");
  }
  if (!std::isfinite(config.initial_temp_c)) {
    throw std::invalid_argument("SimConfig: bad initial temperature");
  }
  if (!(config.delta1 > 0.0 && config.delta2 > 0.0)) {
    throw std::invalid_argument("SimConfig: switching thresholds must be > 0");
  }
  const double t_step = config.forecast.sample_period_s;
  if (config.scenario.preroll_s + 1e-9 <
      config.forecast.training_steps * t_step) {
    throw std::invalid_argument(
        "SimConfig: pre-roll shorter than the training horizon");
  }
  if (config.scenario.horizon_pad_s + 1e-9 <
      config.forecast.horizon_steps * t_step) {
    throw std::invalid_argument(
        "SimConfig: horizon pad shorter than the prediction horizon");
  }
}

Metrics recompute_metrics(const std::vector<StepRecord>& steps, double step_s,
                          double temp_min_c) {
  Metrics m;
  if (steps.empty()) return m;
  double j_sum = 0.0;
  long hybrid_steps = 0;
  long nar_steps = 0;
  for (const StepRecord& s : steps) {
    j_sum += s.j_step;
    const double viol = std::max(0.0, temp_min_c - s.temp_c);
    m.violation_degree_seconds += viol * step_s;
    m.total_heater_energy_kj += s.u_kw * step_s;
    m.peak_violation_c = std::max(m.peak_violation_c, viol);
    if (s.switch_choice >= 0) {
      ++hybrid_steps;
      if (s.switch_choice == 1) ++nar_steps;
    }
  }
  m.avg_objective = j_sum / static_cast<double>(steps.size());
  m.switch_fraction_nar =
      hybrid_steps > 0
          ? static_cast<double>(nar_steps) / static_cast<double>(hybrid_steps)
          : 0.0;
  return m;
}

scenario::ScenarioSpec effective_scenario(const SimConfig& config) {
  scenario::ScenarioSpec spec = config.scenario;
  spec.seed = mix_seed(config.seed, 0x5C);
  spec.duration_s = config.duration_s;
  spec.sample_period_s = config.forecast.sample_period_s;
  return spec;
}

RunRecord run_closed_loop(const SimConfig& config) {
  return run_closed_loop(config, scenario::generate(effective_scenario(config)));
}

RunRecord run_closed_loop(const SimConfig& config,
                          const scenario::DisturbanceTrace& trace) {
  validate(config);
  const double h = config.forecast.sample_period_s;
  const int np = config.forecast.horizon_steps;
  const int nt = config.forecast.training_steps;
  const int n_steps = static_cast<int>(std::lround(config.duration_s / h));

  const Eigen::Index n_trace = trace.times.size();
  if (trace.true_values.size() != n_trace ||
      trace.measured_values.size() != n_trace || n_trace < 2) {
    throw std::invalid_argument("run_closed_loop: malformed trace");
  }
  // Locate t = 0 on the grid and check the span covers the run.
  Eigen::Index i0 = -1;
  for (Eigen::Index i = 0; i < n_trace; ++i) {
    if (std::abs(trace.times[i]) < 0.5 * h) {
      i0 = i;
      break;
    }
  }
  if (i0 < nt) {
    throw std::invalid_argument(
        "run_closed_loop: trace lacks the training window before t=0");
  }
  if (i0 + n_steps - 1 + np >= n_trace) {
    throw std::invalid_argument("run_closed_loop: trace ends before the run");
  }

  forecast::ForecastConfig fc = config.forecast;
  if (uses_forgetting(config.controller)) {
    fc.forgetting = config.forecast.forgetting.has_value()
                        ? *config.forecast.forgetting
                        : gp::ForgettingWeights{1.0, 1.0};
  } else {
    fc.forgetting.reset();
  }

  LoopState state;
  state.hybrid.delta1 = config.delta1;
  state.hybrid.delta2 = config.delta2;
  state.hybrid.ratio_as_printed = config.switch_ratio_as_printed;
  const std::uint64_t kc_seed = mix_seed(config.seed, 0x4B);
  const std::uint64_t nar_seed = mix_seed(config.seed, 0x4E);
  // The hybrid's KC component shares the standalone KC restart stream, so a
  // run whose switch always accepts reproduces the KC run exactly; the two
  // only part ways where the switch actually intervenes.
  state.hybrid.rng_seed = kc_seed;

  const double beta = fc.beta;
  const double range_lo = config.scenario.clip_lo_g_s;
  const double range_hi = config.scenario.clip_hi_g_s;

  RunRecord run;
  run.steps.reserve(n_steps);
  double temp = config.initial_temp_c;
  std::optional<Eigen::VectorXd> prev_u;

  for (int k = 0; k < n_steps; ++k) {
    const double t = k * h;
    const Eigen::Index idx = i0 + k;

    Eigen::VectorXd step_times(np);
    for (int i = 0; i < np; ++i) step_times[i] = t + (i + 1) * h;

    forecast::Envelope env;
    int switch_choice = -1;
    switch (config.controller) {
      case ControllerKind::Perfect: {
        env.beta = beta;
        env.step_times = step_times;
        env.mean = trace.true_values.segment(idx + 1, np);
        env.lower = env.mean;
        env.upper = env.mean;
        env.variance = Eigen::VectorXd::Zero(np);
        break;
      }
      case ControllerKind::FixedRange:
        env = fixed_range_envelope(step_times, range_lo, range_hi, beta);
        break;
      case ControllerKind::KC:
      case ControllerKind::KCff: {
        gp::GPDataset window;
        window.inputs = trace.times.segment(idx - nt, nt + 1);
        window.targets = trace.measured_values.segment(idx - nt, nt + 1);
        window.input_times = trace.times.segment(idx - nt, nt + 1);
        try {
          forecast::KcResult kc =
              forecast::kc_forecast(window, fc, state.kc_cache, kc_seed);
          state.kc_cache = kc.training.hyperparameters;
          env = forecast::envelope_from_posterior(
              kc.posterior, forecast::ConfidenceSpec::from_beta(beta));
        } catch (const std::runtime_error&) {
          state.kc_cache.reset();
          env = fixed_range_envelope(step_times, range_lo, range_hi, beta);
        }
        break;
      }
      case ControllerKind::NAR: {
        const Eigen::VectorXd history =
            trace.measured_values.head(idx + 1);
        try {
          forecast::NarResult nar = forecast::nar_forecast(
              history, t, fc,
              state.nar_cache.empty() ? nullptr : &state.nar_cache, nar_seed);
          state.nar_cache = std::move(nar.models);
          env = forecast::envelope_from_posterior(
              nar.posterior, forecast::ConfidenceSpec::from_beta(beta));
        } catch (const std::runtime_error&) {
          env = fixed_range_envelope(step_times, range_lo, range_hi, beta);
        }
        break;
      }
      case ControllerKind::Hybrid:
      case ControllerKind::Hybridff: {
        gp::GPDataset history;
        history.inputs = trace.times.head(idx + 1);
        history.targets = trace.measured_values.head(idx + 1);
        history.input_times = trace.times.head(idx + 1);
        try {
          forecast::HybridResult hy =
              forecast::hybrid_forecast(history, fc, state.hybrid);
          state.hybrid = std::move(hy.state);
          env = std::move(hy.envelope);
          switch_choice =
              hy.decision.choice == forecast::SwitchDecision::Choice::NAR ? 1
                                                                          : 0;
        } catch (const ForecastError&) {
          // Mirror the state the hybrid commits before its NAR attempt.
          state.hybrid.cached_hyperparameters.reset();
          state.hybrid.rng_seed += 1;
          switch_choice = 1;
          env = fixed_range_envelope(step_times, range_lo, range_hi, beta);
        }
        break;
      }
    }

    std::optional<Eigen::VectorXd> warm;
    if (prev_u.has_value()) {
      Eigen::VectorXd w(np);
      w.head(np - 1) = prev_u->tail(np - 1);
      w[np - 1] = (*prev_u)[np - 1];
      warm = std::move(w);
    }

    double solve_ms = 0.0;
    Eigen::VectorXd u_seq;
    const auto t_start = config.measure_solve_time
                             ? std::chrono::steady_clock::now()
                             : std::chrono::steady_clock::time_point{};
    try {
      control::ControlSolution sol =
          control::solve_rempc(temp, env, control::RobustUpper{}, config.plant,
                               config.control, warm);
      u_seq = std::move(sol.u_seq_kw);
    } catch (const SolverError&) {
      u_seq = Eigen::VectorXd::Constant(np, config.control.u_max_kw);
    }
    if (config.measure_solve_time) {
      solve_ms = std::chrono::duration<double, std::milli>(
                     std::chrono::steady_clock::now() - t_start)
                     .count();
    }

    const double u0 = u_seq[0];
    double j_step =
        u0 * u0 +
        config.control.eta_lower *
            std::max(0.0, config.control.temp_min_c - temp) * h;
    if (config.control.temp_max_c.has_value()) {
      j_step += config.control.eta_upper *
                std::max(0.0, temp - *config.control.temp_max_c) * h;
    }

    StepRecord rec;
    rec.t = t;
    rec.temp_c = temp;
    rec.u_kw = u0;
    rec.mdot_true = trace.true_values[idx];
    rec.mdot_meas = trace.measured_values[idx];
    rec.env_lo = env.lower[0];
    rec.env_hi = env.upper[0];
    rec.switch_choice = switch_choice;
    rec.j_step = j_step;
    rec.solve_ms = solve_ms;
    run.steps.push_back(rec);

    temp = plant::rk4_step(config.plant, temp, u0,
                           1e-3 * trace.true_values[idx], h);
    prev_u = std::move(u_seq);
  }

  run.metrics = recompute_metrics(run.steps, h, config.control.temp_min_c);
  return run;
}

std::vector<ComparisonRow> compare_controllers(
    const SimConfig& base, const std::vector<ControllerKind>& controllers,
    const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) {
    throw std::invalid_argument("compare_controllers: need at least one seed");
  }
  struct Cell {
    std::vector<Metrics> metrics;
    std::string error;
  };
  std::vector<Cell> cells(controllers.size());
  for (std::size_t c = 0; c < controllers.size(); ++c) {
    for (std::uint64_t seed : seeds) {
      SimConfig cfg = base;
      cfg.controller = controllers[c];
      cfg.seed = seed;
      try {
        cells[c].metrics.push_back(run_closed_loop(cfg).metrics);
      } catch (const std::exception& e) {
        cells[c].error = e.what();
      }
    }
  }

  const auto aggregate = [](const std::vector<Metrics>& ms, Metrics& mean,
                            Metrics& sd) {
    const auto each = [&ms](double Metrics::*field, double& out_mean,
                            double& out_sd) {
      double sum = 0.0;
      for (const Metrics& m : ms) sum += m.*field;
      out_mean = sum / static_cast<double>(ms.size());
      double ss = 0.0;
      for (const Metrics& m : ms) {
        const double d = m.*field - out_mean;
        ss += d * d;
      }
      out_sd = ms.size() > 1
                   ? std::sqrt(ss / static_cast<double>(ms.size() - 1))
                   : 0.0;
    };
    each(&Metrics::avg_objective, mean.avg_objective, sd.avg_objective);
    each(&Metrics::violation_degree_seconds, mean.violation_degree_seconds,
         sd.violation_degree_seconds);
    each(&Metrics::total_heater_energy_kj, mean.total_heater_energy_kj,
         sd.total_heater_energy_kj);
    each(&Metrics::switch_fraction_nar, mean.switch_fraction_nar,
         sd.switch_fraction_nar);
    each(&Metrics::peak_violation_c, mean.peak_violation_c,
         sd.peak_violation_c);
  };

  std::vector<ComparisonRow> rows(controllers.size());
  double perfect_mean = std::nan("");
  for (std::size_t c = 0; c < controllers.size(); ++c) {
    rows[c].controller = controllers[c];
    if (!cells[c].error.empty()) {
      rows[c].status = "error: " + cells[c].error;
    }
    if (!cells[c].metrics.empty()) {
      aggregate(cells[c].metrics, rows[c].mean, rows[c].sd);
      if (controllers[c] == ControllerKind::Perfect) {
        perfect_mean = rows[c].mean.avg_objective;
      }
    } else {
      rows[c].mean = Metrics{std::nan(""), std::nan(""), std::nan(""),
                             std::nan(""), std::nan("")};
      rows[c].sd = rows[c].mean;
    }
  }
  for (ComparisonRow& row : rows) {
    if (std::isfinite(perfect_mean) && perfect_mean > 0.0 &&
        std::isfinite(row.mean.avg_objective)) {
      row.norm_avg_objective = row.mean.avg_objective / perfect_mean;
    }
  }
  return rows;
}

std::vector<SweepRow> sweep_training_horizon(const SimConfig& base,
                                             const std::vector<int>& factors) {
  if (factors.empty()) {
    throw std::invalid_argument("sweep_training_horizon: no factors");
  }
  for (int f : factors) {
    if (f < 1) {
      throw std::invalid_argument("sweep_training_horizon: factors must be >= 1");
    }
  }
  const ControllerKind kinds[] = {ControllerKind::Hybrid,
                                  ControllerKind::Hybridff};
  std::vector<SweepRow> rows;
  double base_value[2] = {std::nan(""), std::nan("")};
  for (std::size_t fi = 0; fi < factors.size(); ++fi) {
    for (int c = 0; c < 2; ++c) {
      SimConfig cfg = base;
      cfg.controller = kinds[c];
      cfg.forecast.training_steps = base.forecast.training_steps * factors[fi];
      cfg.scenario.preroll_s =
          cfg.forecast.training_steps * cfg.forecast.sample_period_s;
      SweepRow row;
      row.factor = factors[fi];
      row.controller = kinds[c];
      try {
        row.metrics = run_closed_loop(cfg).metrics;
        if (fi == 0) base_value[c] = row.metrics.avg_objective;
        if (std::isfinite(base_value[c]) && base_value[c] > 0.0) {
          row.normalized = row.metrics.avg_objective / base_value[c];
        }
      } catch (const std::exception& e) {
        row.status = std::string("error: ") + e.what();
        row.metrics = Metrics{std::nan(""), std::nan(""), std::nan(""),
                              std::nan(""), std::nan("")};
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace gpmpc::sim

// Acceptance checks for the forecasting + control stack. Each criterion
// prints exactly one PASS/FAIL line on stdout; details go to stderr. The
// exit code is the number of failed criteria.
//
// The heavy criteria (8-10) run full 600 s closed loops over five seeds and
// dominate the runtime; expect the whole binary to take tens of minutes.

#include <chrono>
#include <cmath>
#include <math.h>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "gpmpc/control.hpp"
#include "gpmpc/forecast.hpp"
#include "gpmpc/gp.hpp"
#include "gpmpc/io.hpp"
#include "gpmpc/kernel.hpp"
#include "gpmpc/plant.hpp"
#include "gpmpc/scenario.hpp"
#include "gpmpc/sim.hpp"

using namespace gpmpc;

namespace {

int g_failures = 0;
std::chrono::steady_clock::time_point g_last = std::chrono::steady_clock::now();

void report(int index, const std::string& name, bool ok,
            const std::string& detail = "") {
  const auto now = std::chrono::steady_clock::now();
  const double secs =
      std::chrono::duration_cast<std::chrono::milliseconds>(now - g_last)
          .count() /
      1000.0;
  g_last = now;
  std::printf("%s %2d. %s\n", ok ? "PASS" : "FAIL", index, name.c_str());
  std::fflush(stdout);
  if (!detail.empty() || !ok) {
    std::fprintf(stderr, "     [%5.1fs] %s\n", secs,
                 detail.empty() ? "(no detail)" : detail.c_str());
  }
  if (!ok) ++g_failures;
}

using MatLd = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VecLd = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

double rel_err(double mine, long double oracle) {
  const long double diff = fabsl((long double)mine - oracle);
  return (double)(diff / std::max<long double>(1.0L, fabsl(oracle)));
}

// ---------------------------------------------------------------- criterion 1

void criterion_1() {
  struct Row {
    double beta, z;
  };
  const Row table[] = {{0.90, 1.645}, {0.95, 1.96}, {0.99, 2.575}};
  bool ok = true;
  std::ostringstream detail;
  for (const Row& row : table) {
    const double z = forecast::critical_value(row.beta);
    detail << "beta " << row.beta << " -> " << z << "  ";
    if (std::fabs(z - row.z) > 0.005) ok = false;
  }
  report(1, "critical values match the normal quantile table", ok,
         detail.str());
}

// ---------------------------------------------------------------- criterion 2

gp::Kernel random_kernel(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto rbf = [&] {
    return gp::Kernel(gp::RbfKernel{0.5 + 2.0 * u(rng), 2.0 + 20.0 * u(rng)});
  };
  auto lin = [&] { return gp::Kernel(gp::LinearKernel{10.0 + 40.0 * u(rng)}); };
  auto per = [&] {
    return gp::Kernel(
        gp::PeriodicKernel{0.5 + 1.5 * u(rng), 20.0 + 60.0 * u(rng),
                           0.7 + 2.0 * u(rng)});
  };
  auto con = [&] { return gp::Kernel(gp::ConstantKernel{0.3 + 2.0 * u(rng)}); };
  switch (std::uniform_int_distribution<int>(0, 5)(rng)) {
    case 0: return rbf();
    case 1: return lin();
    case 2: return per();
    case 3: return con();
    case 4: return gp::Kernel(gp::SumKernel{{lin(), per(), con()}});
    default: return gp::Kernel(gp::SumKernel{{rbf(), con()}});
  }
}

void criterion_2() {
  std::mt19937_64 rng(20240811);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  bool ok = true;
  double worst = 0.0;
  std::string culprit;

  for (int inst = 0; inst < 50 && ok; ++inst) {
    const int n = 5 + (int)(u(rng) * 45.0);
    const int m = 1 + (int)(u(rng) * 9.0);
    gp::GPDataset data;
    data.inputs.resize(n, 1);
    data.targets.resize(n);
    data.input_times.resize(n);
    for (int i = 0; i < n; ++i) {
      const double t = 100.0 * i / n + 2.0 * u(rng);
      data.inputs(i, 0) = t;
      data.input_times[i] = t;
      data.targets[i] =
          30.0 + 10.0 * std::sin(0.07 * t) + 2.0 * (u(rng) - 0.5);
    }
    Eigen::MatrixXd query(m, 1);
    for (int j = 0; j < m; ++j) query(j, 0) = 150.0 * u(rng);

    const gp::Kernel kernel = random_kernel(rng);
    const gp::NoiseModel noise{0.05 + 0.95 * u(rng)};
    const double prior_mean = (u(rng) < 0.5) ? 0.0 : 10.0 * (u(rng) - 0.5);
    const double now = 110.0;
    std::optional<gp::ForgettingWeights> fw;
    Eigen::VectorXd extra;
    const gp::Posterior mine = [&] {
      if (u(rng) < 0.5) {
        fw = gp::ForgettingWeights{0.2 * u(rng), 1.0};
        extra = gp::forgetting_diag(data.input_times, now, *fw);
        return gp::posterior(kernel, noise, data, query, prior_mean, &extra);
      }
      return gp::posterior(kernel, noise, data, query, prior_mean, nullptr);
    }();
    const double lml_mine =
        gp::log_marginal_likelihood(kernel, noise, data, fw, now);

    // Dense oracle: explicit inversion and determinant in long double.
    MatLd a(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        a(i, j) = (long double)gp::kernel_eval(kernel, data.inputs.row(i),
                                               data.inputs.row(j));
      }
      a(i, i) += (long double)noise.sigma2;
      if (extra.size() > 0) a(i, i) += (long double)extra[i];
    }
    MatLd k_qt(m, n);
    MatLd k_qq(m, m);
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < n; ++i) {
        k_qt(j, i) = (long double)gp::kernel_eval(kernel, query.row(j),
                                                  data.inputs.row(i));
      }
      for (int j2 = 0; j2 < m; ++j2) {
        k_qq(j, j2) =
            (long double)gp::kernel_eval(kernel, query.row(j), query.row(j2));
      }
    }
    const MatLd a_inv = a.inverse();
    VecLd w_prior(n), w_mean(n);
    long double target_sum = 0.0L;
    for (int i = 0; i < n; ++i) target_sum += (long double)data.targets[i];
    const long double sample_mean = target_sum / n;
    for (int i = 0; i < n; ++i) {
      w_prior[i] = (long double)data.targets[i] - (long double)prior_mean;
      w_mean[i] = (long double)data.targets[i] - sample_mean;
    }
    const VecLd mean_oracle =
        VecLd::Constant(m, (long double)prior_mean) + k_qt * (a_inv * w_prior);
    const MatLd cov_oracle = k_qq - k_qt * a_inv * k_qt.transpose();
    const long double lml_oracle =
        -0.5L * (w_mean.dot(a_inv * w_mean)) -
        0.5L * logl((long double)a.determinant()) -
        0.5L * n * logl(2.0L * 3.14159265358979323846264338327950288L);

    for (int j = 0; j < m; ++j) {
      worst = std::max(worst, rel_err(mine.mean[j], mean_oracle[j]));
      for (int j2 = 0; j2 < m; ++j2) {
        worst = std::max(worst, rel_err(mine.cov(j, j2), cov_oracle(j, j2)));
      }
    }
    worst = std::max(worst, rel_err(lml_mine, lml_oracle));
    if (worst > 1e-8) {
      ok = false;
      culprit = "instance " + std::to_string(inst);
    }
  }
  std::ostringstream detail;
  detail << "max relative error " << worst << " " << culprit;
  report(2, "posterior and likelihood match a dense long-double oracle", ok,
         detail.str());
}

// ---------------------------------------------------------------- criterion 3

void criterion_3() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const plant::PlantParams params;
  bool ok = true;
  double worst = 0.0;

  for (int inst = 0; inst < 100; ++inst) {
    control::ControlConfig cfg;
    cfg.horizon_steps = 25;
    if (u(rng) < 0.3) {
      cfg.temp_max_c = 58.0 + 6.0 * u(rng);
      cfg.eta_upper = 5.0 * u(rng);
    }
    Eigen::VectorXd u_seq(cfg.horizon_steps), mdot(cfg.horizon_steps);
    for (int i = 0; i < cfg.horizon_steps; ++i) {
      u_seq[i] = 10.0 * u(rng);
      mdot[i] = 10.0 + 50.0 * u(rng);
    }
    const double temp0 = 50.0 + 12.0 * u(rng);
    const control::ObjectiveBreakdown mine =
        control::evaluate_objective(u_seq, mdot, temp0, params, cfg);

    // LP oracle: per-step slack LP solved at its vertices. For each step the
    // feasible slack set is {g >= 0, g >= bound - T}; the minimizing vertex
    // is the larger of the two lower bounds.
    double j_cv = 0.0;
    double temp = temp0;
    for (int i = 0; i < cfg.horizon_steps; ++i) {
      temp = plant::rk4_step(params, temp, u_seq[i], 1e-3 * mdot[i], cfg.step_s);
      const double lower_vertex = std::max(0.0, cfg.temp_min_c - temp);
      j_cv += cfg.eta_lower * lower_vertex;
      if (cfg.temp_max_c.has_value()) {
        const double upper_vertex = std::max(0.0, temp - *cfg.temp_max_c);
        j_cv += cfg.eta_upper * upper_vertex;
      }
    }
    worst = std::max(worst, std::fabs(mine.j_cv - j_cv));
    if (worst > 1e-12) ok = false;
  }
  std::ostringstream detail;
  detail << "max |closed form - LP| = " << worst;
  report(3, "slack elimination equals the per-step LP minimum", ok,
         detail.str());
}

// ---------------------------------------------------------------- criterion 4

void criterion_4() {
  const plant::PlantParams p;
  const double mdot = 0.04, q_kw = 5.0, t0 = 55.0, t_end = 10.0;
  // Linear ODE dT/dt = a - b T with constant inputs.
  const double b = mdot / p.mass_kg + p.heat_loss_kw_per_k /
                                          (p.mass_kg * p.cp_kj_per_kg_k);
  const double a = mdot / p.mass_kg * p.inlet_temp_c +
                   (q_kw + p.heat_loss_kw_per_k * p.ambient_temp_c) /
                       (p.mass_kg * p.cp_kj_per_kg_k);
  const double exact = a / b + (t0 - a / b) * std::exp(-b * t_end);

  auto integrate = [&](double h) {
    double temp = t0;
    for (double t = 0.0; t < t_end - 1e-9; t += h) {
      temp = plant::rk4_step(p, temp, q_kw, mdot, h);
    }
    return temp;
  };
  const double err2 = std::fabs(integrate(2.0) - exact);
  const double err1 = std::fabs(integrate(1.0) - exact);
  const double ratio = err2 / err1;
  std::ostringstream detail;
  detail << "err(h=2) " << err2 << "  err(h=1) " << err1 << "  ratio "
         << ratio;
  report(4, "rk4 error falls at fourth order when halving the step", ratio >= 14.0,
         detail.str());
}

// ---------------------------------------------------------------- criterion 5

void criterion_5() {
  std::mt19937_64 rng(555);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const plant::PlantParams params;
  bool ok = true;
  double worst = 0.0;

  for (int inst = 0; inst < 20; ++inst) {
    control::ControlConfig cfg;
    cfg.horizon_steps = 3;
    forecast::Envelope env;
    env.step_times.resize(3);
    env.mean.resize(3);
    env.variance.resize(3);
    env.lower.resize(3);
    env.upper.resize(3);
    const double z = forecast::critical_value(cfg.beta);
    double level = 25.0 + 30.0 * u(rng);
    for (int i = 0; i < 3; ++i) {
      level += 8.0 * (u(rng) - 0.5);
      const double var = 1.0 + 24.0 * u(rng);
      env.step_times[i] = 2.0 * (i + 1);
      env.mean[i] = level;
      env.variance[i] = var;
      env.lower[i] = level - z * std::sqrt(var);
      env.upper[i] = level + z * std::sqrt(var);
    }
    const double temp0 = 52.0 + 8.0 * u(rng);
    const Eigen::VectorXd wc =
        control::worst_case_sequence(env, control::RobustUpper{}, 3);

    double grid_best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd u_seq(3);
    for (int i0 = 0; i0 <= 20; ++i0) {
      for (int i1 = 0; i1 <= 20; ++i1) {
        for (int i2 = 0; i2 <= 20; ++i2) {
          u_seq << 0.5 * i0, 0.5 * i1, 0.5 * i2;
          grid_best = std::min(
              grid_best,
              control::evaluate_objective(u_seq, wc, temp0, params, cfg).j_total);
        }
      }
    }
    const control::ControlSolution sol =
        control::solve_rempc(temp0, env, control::RobustUpper{}, params, cfg);
    const double excess = (sol.j_total - grid_best) / std::max(grid_best, 1e-9);
    worst = std::max(worst, excess);
    if (sol.j_total > grid_best * 1.05 + 1e-6) ok = false;
  }
  std::ostringstream detail;
  detail << "worst solver excess over 21^3 grid = " << worst * 100.0 << "%";
  report(5, "solver objective within 5% of exhaustive grid search", ok,
         detail.str());
}

// ---------------------------------------------------------------- criterion 6

void criterion_6() {
  scenario::ScenarioSpec spec;
  spec.kind = scenario::Kind::SN;
  spec.measurement_sigma_g_s = 0.0;
  spec.duration_s = 60.0;
  const scenario::DisturbanceTrace trace = scenario::generate(spec);

  Eigen::Index i0 = -1;
  for (Eigen::Index i = 0; i < trace.times.size(); ++i) {
    if (std::fabs(trace.times[i]) < 1e-9) {
      i0 = i;
      break;
    }
  }
  forecast::ForecastConfig cfg;  // Nt = 50 (100 s), Np = 25 (50 s)
  gp::GPDataset window = gp::GPDataset::from_time_series(
      trace.times.segment(i0 - cfg.training_steps, cfg.training_steps + 1),
      trace.measured_values.segment(i0 - cfg.training_steps,
                                    cfg.training_steps + 1));
  const forecast::KcResult kc = forecast::kc_forecast(window, cfg);

  double sq = 0.0;
  for (int j = 0; j < cfg.horizon_steps; ++j) {
    const double err = kc.posterior.mean[j] - trace.true_values[i0 + 1 + j];
    sq += err * err;
  }
  const double rmse = std::sqrt(sq / cfg.horizon_steps);
  std::ostringstream detail;
  detail << "noiseless SN forecast RMSE " << rmse << " g/s";
  report(6, "kernel composition captures the sinusoid pattern", rmse <= 1.5,
         detail.str());
}

// ---------------------------------------------------------------- criterion 7

void criterion_7() {
  std::mt19937_64 rng(7000);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const forecast::HybridState state;  // delta1 = sqrt(0.5), delta2 = 1
  const int np = 25;
  int var_detected = 0, std_detected = 0;

  for (int inst = 0; inst < 100; ++inst) {
    // Growing-variance posterior, matched std so only the variance test bites.
    gp::Posterior post;
    post.mean.resize(np);
    Eigen::VectorXd hist(np);
    for (int i = 0; i < np; ++i) {
      post.mean[i] = 35.0 + 10.0 * std::sin(0.35 * i + u(rng) * 0.01);
      hist[i] = post.mean[i];
    }
    const double v0 = 0.5 + 2.0 * u(rng);
    const double ratio = 2.05 + 3.0 * u(rng);
    post.cov = Eigen::MatrixXd::Zero(np, np);
    for (int i = 0; i < np; ++i) {
      post.cov(i, i) = v0 * (1.0 + (ratio - 1.0) * i / (np - 1));
    }
    const forecast::SwitchDecision d = forecast::switch_decide(hist, post, state);
    if (d.choice == forecast::SwitchDecision::Choice::NAR && d.var_fail) {
      ++var_detected;
    }
  }

  for (int inst = 0; inst < 100; ++inst) {
    // Wrong-pattern posterior: forecast spread off by more than the
    // threshold factor, flat variance so only the std test bites.
    gp::Posterior post;
    post.mean.resize(np);
    Eigen::VectorXd hist(np);
    const double factor = 1.55 + 2.0 * u(rng);
    for (int i = 0; i < np; ++i) {
      const double s = std::sin(0.35 * i + 0.3 * u(rng) * 0.01);
      post.mean[i] = 35.0 + 10.0 * s;
      hist[i] = 35.0 + 10.0 * factor * s;
    }
    post.cov = Eigen::MatrixXd::Identity(np, np);
    const forecast::SwitchDecision d = forecast::switch_decide(hist, post, state);
    if (d.choice == forecast::SwitchDecision::Choice::NAR && d.std_fail) {
      ++std_detected;
    }
  }
  std::ostringstream detail;
  detail << "variance growth " << var_detected
         << "/100, wrong pattern " << std_detected << "/100";
  report(7, "switching rule rejects ballooning variance and wrong patterns",
         var_detected == 100 && std_detected == 100, detail.str());
}

// ---------------------------------------------------------- criteria 8 and 10

struct LoopResult {
  sim::Metrics metrics;
  double nar_before = 0.0;  // LS: NAR fraction in [240, 300)
  double nar_after = 0.0;   // LS: NAR fraction in [300, 360)
};

LoopResult run_loop(scenario::Kind kind, sim::ControllerKind controller,
                    std::uint64_t seed) {
  sim::SimConfig cfg;
  cfg.scenario.kind = kind;
  cfg.controller = controller;
  cfg.duration_s = 600.0;
  cfg.seed = seed;
  const sim::RunRecord run = sim::run_closed_loop(cfg);
  LoopResult out;
  out.metrics = run.metrics;
  int before_nar = 0, before_n = 0, after_nar = 0, after_n = 0;
  for (const auto& s : run.steps) {
    if (s.t >= 240.0 && s.t < 300.0) {
      ++before_n;
      before_nar += s.switch_choice == 1;
    } else if (s.t >= 300.0 && s.t < 360.0) {
      ++after_n;
      after_nar += s.switch_choice == 1;
    }
  }
  if (before_n > 0) out.nar_before = (double)before_nar / before_n;
  if (after_n > 0) out.nar_after = (double)after_nar / after_n;
  return out;
}

using LoopTable = std::map<std::tuple<int, std::uint64_t, int>, LoopResult>;
const std::vector<std::uint64_t> kSeeds = {1, 2, 3, 4, 5};

LoopTable run_closed_loop_grid() {
  const std::vector<sim::ControllerKind> lineup = {
      sim::ControllerKind::Perfect, sim::ControllerKind::FixedRange,
      sim::ControllerKind::KC, sim::ControllerKind::NAR,
      sim::ControllerKind::Hybrid};
  LoopTable results;
  for (auto kind : {scenario::Kind::SN, scenario::Kind::LS}) {
    for (auto seed : kSeeds) {
      for (auto c : lineup) {
        results[{(int)kind, seed, (int)c}] = run_loop(kind, c, seed);
        std::fprintf(stderr, "     c8: %s seed %llu %s avg_objective %.4f\n",
                     kind == scenario::Kind::SN ? "SN" : "LS",
                     (unsigned long long)seed, sim::controller_name(c).c_str(),
                     results[{(int)kind, seed, (int)c}].metrics.avg_objective);
      }
    }
  }
  return results;
}

void criterion_8(LoopTable& results) {
  const std::vector<std::uint64_t>& seeds = kSeeds;
  const std::vector<sim::ControllerKind> lineup = {
      sim::ControllerKind::Perfect, sim::ControllerKind::FixedRange,
      sim::ControllerKind::KC, sim::ControllerKind::NAR,
      sim::ControllerKind::Hybrid};
  auto obj = [&](scenario::Kind k, std::uint64_t s, sim::ControllerKind c) {
    return results[{(int)k, s, (int)c}].metrics.avg_objective;
  };

  bool perfect_lowest = true;
  bool within_30 = true;
  std::ostringstream detail;
  int hybrid_wins[2][3] = {{0, 0, 0}, {0, 0, 0}};
  const sim::ControllerKind rivals[3] = {sim::ControllerKind::KC,
                                         sim::ControllerKind::NAR,
                                         sim::ControllerKind::FixedRange};
  int kind_idx = 0;
  for (auto kind : {scenario::Kind::SN, scenario::Kind::LS}) {
    for (auto seed : seeds) {
      const double perfect = obj(kind, seed, sim::ControllerKind::Perfect);
      const double hybrid = obj(kind, seed, sim::ControllerKind::Hybrid);
      for (auto c : lineup) {
        if (c == sim::ControllerKind::Perfect) continue;
        // Perfect information should win; 2% headroom for solver tolerance.
        if (perfect > obj(kind, seed, c) * 1.02) perfect_lowest = false;
      }
      for (int r = 0; r < 3; ++r) {
        hybrid_wins[kind_idx][r] += hybrid <= obj(kind, seed, rivals[r]);
      }
      if (kind == scenario::Kind::SN && hybrid > 1.3 * perfect) {
        within_30 = false;
      }
    }
    ++kind_idx;
  }
  bool hybrid_ok = true;
  const char* kind_names[2] = {"SN", "LS"};
  const char* rival_names[3] = {"kc", "nar", "fixed"};
  for (int k = 0; k < 2; ++k) {
    for (int r = 0; r < 3; ++r) {
      detail << kind_names[k] << " hybrid<=" << rival_names[r] << " "
             << hybrid_wins[k][r] << "/5  ";
      if (hybrid_wins[k][r] < 4) hybrid_ok = false;
    }
  }
  detail << (perfect_lowest ? "" : "| perfect not lowest ")
         << (within_30 ? "" : "| hybrid >30% off perfect");
  report(8, "closed-loop cost ordering over five seeds on SN and LS",
         perfect_lowest && hybrid_ok && within_30, detail.str());
}

void criterion_10(LoopTable& results) {
  int after_exceeds = 0;
  std::ostringstream d10;
  for (auto seed : kSeeds) {
    const LoopResult& h =
        results[{(int)scenario::Kind::LS, seed, (int)sim::ControllerKind::Hybrid}];
    after_exceeds += h.nar_after > h.nar_before;
    d10 << "seed " << seed << ": " << h.nar_before << " -> " << h.nar_after
        << "  ";
  }
  report(10, "hybrid leans on NAR right after the LS pattern change",
         after_exceeds >= 4, d10.str());
}

// ---------------------------------------------------------------- criterion 9

void criterion_9() {
  int ff_no_worse = 0;
  std::ostringstream detail;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    sim::SimConfig base;
    base.scenario.kind = scenario::Kind::CM;
    base.duration_s = 300.0;
    base.seed = seed;
    // Trimmed training budgets keep the factor-4 window tractable.
    base.forecast.kc_restarts = 2;
    base.forecast.kc_max_iterations = 80;
    base.forecast.nar_restarts = 1;
    base.forecast.nar_max_iterations = 30;
    base.forecast.nar_max_rows = 40;
    const std::vector<sim::SweepRow> rows =
        sim::sweep_training_horizon(base, {1, 4});
    double norm_hybrid = 0.0, norm_ff = 0.0;
    for (const auto& row : rows) {
      if (row.factor != 4) continue;
      if (row.controller == sim::ControllerKind::Hybrid) {
        norm_hybrid = row.normalized;
      } else if (row.controller == sim::ControllerKind::Hybridff) {
        norm_ff = row.normalized;
      }
    }
    ff_no_worse += norm_ff <= norm_hybrid;
    detail << "seed " << seed << ": ff " << norm_ff << " vs " << norm_hybrid
           << "  ";
  }
  report(9, "forgetting factor degrades less on a long training horizon",
         ff_no_worse >= 2, detail.str());
}

// --------------------------------------------------------------- criterion 11

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_11() {
  sim::SimConfig cfg;
  cfg.scenario.kind = scenario::Kind::SN;
  cfg.controller = sim::ControllerKind::Hybrid;
  cfg.duration_s = 600.0;
  cfg.seed = 9;
  const sim::RunRecord first = sim::run_closed_loop(cfg);
  const sim::RunRecord second = sim::run_closed_loop(cfg);
  const std::string a = "/tmp/gpmpc_acceptance_run_a.csv";
  const std::string b = "/tmp/gpmpc_acceptance_run_b.csv";
  io::write_run_csv(a, first.steps);
  io::write_run_csv(b, second.steps);
  const std::string bytes_a = slurp(a), bytes_b = slurp(b);
  const bool ok = !bytes_a.empty() && bytes_a == bytes_b;
  std::ostringstream detail;
  detail << bytes_a.size() << " bytes vs " << bytes_b.size() << " bytes";
  report(11, "identical config and seed give byte-identical run logs", ok,
         detail.str());
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  LoopTable loops = run_closed_loop_grid();  // shared by criteria 8 and 10
  criterion_8(loops);
  criterion_9();
  criterion_10(loops);
  criterion_11();
  std::fprintf(stderr, "%d criterion(s) failed\n", g_failures);
  return g_failures;
}

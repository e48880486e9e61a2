#include "cli.hpp"

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "gpmpc/forecast.hpp"
#include "gpmpc/io.hpp"
#include "gpmpc/scenario.hpp"
#include "gpmpc/sim.hpp"

namespace gpmpc::cli {
namespace {

namespace fs = std::filesystem;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::string scenario;
  std::string controller;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path,
                  "JSON config file; other flags override its values");
  cmd->add_option("--out", args.out_dir, "output directory, created if missing")
      ->capture_default_str();
  cmd->add_option("--seed", args.seed, "master seed for the run");
  cmd->add_option("--scenario", args.scenario,
                  "disturbance scenario: sn, ls, cm or rw");
  cmd->add_option("--controller", args.controller,
                  "perfect, fixed_range, kc, kc_ff, nar, hybrid or hybrid_ff");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

sim::SimConfig load_config(const CommonArgs& args) {
  sim::SimConfig config;
  if (!args.config_path.empty()) {
    config = io::config_from_json(read_file(args.config_path));
  }
  if (args.seed.has_value()) config.seed = *args.seed;
  if (!args.scenario.empty()) {
    config.scenario.kind = scenario::kind_from_name(args.scenario);
  }
  if (!args.controller.empty()) {
    config.controller = sim::controller_from_name(args.controller);
  }
  return config;
}

fs::path prepare_out_dir(const CommonArgs& args) {
  fs::path out(args.out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    throw std::invalid_argument("cannot create output directory '" +
                                args.out_dir + "': " + ec.message());
  }
  return out;
}

/// One value per line; a single non-numeric first line is treated as a
/// header. Used by the forecast subcommand.
Eigen::VectorXd read_history_column(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<double> values;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (line.empty()) continue;
    double v = 0.0;
    const auto res = std::from_chars(line.data(), line.data() + line.size(), v);
    if (res.ec != std::errc() || res.ptr != line.data() + line.size()) {
      if (first) {
        first = false;
        continue;  // header row
      }
      throw std::invalid_argument("history csv: bad value '" + line + "'");
    }
    first = false;
    values.push_back(v);
  }
  if (values.empty()) {
    throw std::invalid_argument("history csv: no samples in '" + path + "'");
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(),
                                     static_cast<Eigen::Index>(values.size()));
}

int run_simulate(const CommonArgs& common, const std::string& disturbance_in,
                 const std::string& disturbance_out) {
  sim::SimConfig config = load_config(common);
  sim::validate(config);
  const fs::path out = prepare_out_dir(common);

  scenario::DisturbanceTrace trace;
  if (disturbance_in.empty()) {
    trace = scenario::generate(sim::effective_scenario(config));
  } else {
    trace = io::read_disturbance_csv(disturbance_in);
  }
  const sim::RunRecord record = sim::run_closed_loop(config, trace);

  io::write_run_csv((out / "run.csv").string(), record.steps);
  io::write_metrics_json((out / "metrics.json").string(), record.metrics);
  io::write_text_atomic((out / "config.json").string(),
                        io::config_to_json(config));
  if (!disturbance_out.empty()) {
    io::write_disturbance_csv(disturbance_out, trace);
  }
  return 0;
}

int run_compare(const CommonArgs& common,
                const std::vector<std::string>& controller_names,
                const std::vector<std::uint64_t>& seeds) {
  sim::SimConfig config = load_config(common);
  std::vector<sim::ControllerKind> lineup;
  if (controller_names.empty()) {
    lineup = {sim::ControllerKind::Perfect, sim::ControllerKind::FixedRange,
              sim::ControllerKind::KC,      sim::ControllerKind::KCff,
              sim::ControllerKind::NAR,     sim::ControllerKind::Hybrid,
              sim::ControllerKind::Hybridff};
  } else {
    for (const std::string& name : controller_names) {
      lineup.push_back(sim::controller_from_name(name));
    }
  }
  std::vector<std::uint64_t> seed_list = seeds;
  if (seed_list.empty()) seed_list.push_back(config.seed);

  const fs::path out = prepare_out_dir(common);
  const auto rows = sim::compare_controllers(config, lineup, seed_list);
  io::write_comparison_csv((out / "table.csv").string(), rows);
  return 0;
}

int run_sweep(const CommonArgs& common, const std::vector<int>& factors) {
  CommonArgs args = common;
  if (args.scenario.empty() && args.config_path.empty()) {
    args.scenario = "cm";  // the sweep's default stress scenario
  }
  sim::SimConfig config = load_config(args);
  for (int f : factors) {
    if (f < 1) throw std::invalid_argument("sweep factors must be >= 1");
  }
  const fs::path out = prepare_out_dir(args);
  const auto rows = sim::sweep_training_horizon(config, factors);
  io::write_sweep_csv((out / "sweep.csv").string(), rows);
  return 0;
}

int run_forecast(const CommonArgs& common, const std::string& input,
                 const std::string& method) {
  sim::SimConfig config = load_config(common);
  const forecast::ForecastConfig& fc = config.forecast;
  forecast::validate(fc);
  const Eigen::VectorXd values = read_history_column(input);
  const double period = fc.sample_period_s;

  // The history column has no timestamps; place the newest sample at t = 0
  // on the configured sample grid.
  const auto times_for = [&](Eigen::Index n) {
    Eigen::VectorXd t(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      t[i] = -static_cast<double>(n - 1 - i) * period;
    }
    return t;
  };

  forecast::Envelope envelope;
  std::string method_used = method;
  const auto spec = forecast::ConfidenceSpec::from_beta(fc.beta);
  if (method == "kc") {
    const Eigen::Index need = fc.training_steps + 1;
    if (values.size() < need) {
      throw std::invalid_argument("kc needs at least " + std::to_string(need) +
                                  " history samples");
    }
    const Eigen::VectorXd window = values.tail(need);
    const auto result = forecast::kc_forecast(
        gp::GPDataset::from_time_series(times_for(need), window), fc,
        std::nullopt, config.seed);
    envelope = forecast::envelope_from_posterior(result.posterior, spec);
  } else if (method == "nar") {
    const auto result =
        forecast::nar_forecast(values, 0.0, fc, nullptr, config.seed);
    envelope = forecast::envelope_from_posterior(result.posterior, spec);
  } else if (method == "hybrid") {
    forecast::HybridState state;
    state.delta1 = config.delta1;
    state.delta2 = config.delta2;
    state.ratio_as_printed = config.switch_ratio_as_printed;
    state.rng_seed = config.seed;
    const auto result = forecast::hybrid_forecast(
        gp::GPDataset::from_time_series(times_for(values.size()), values), fc,
        state);
    envelope = result.envelope;
    method_used = result.decision.choice == forecast::SwitchDecision::Choice::NAR
                      ? "nar"
                      : "kc";
  } else {
    throw std::invalid_argument("unknown forecast method '" + method + "'");
  }

  const fs::path out = prepare_out_dir(common);
  io::write_envelope_csv((out / "envelope.csv").string(), envelope, method_used);
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Disturbance-forecasting robust economic MPC harness"};
  app.require_subcommand(1);

  CommonArgs sim_args;
  std::string disturbance_in;
  std::string disturbance_out;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Run one closed loop; writes run.csv and metrics.json");
  add_common(simulate, sim_args);
  simulate->add_option("--disturbance-in", disturbance_in,
                       "drive the run from a t,true,measured CSV");
  simulate->add_option("--disturbance-out", disturbance_out,
                       "also export the disturbance trace as CSV");

  CommonArgs cmp_args;
  std::vector<std::string> cmp_controllers;
  std::vector<std::uint64_t> cmp_seeds;
  CLI::App* compare = app.add_subcommand(
      "compare", "Run a controller lineup on shared seeds; writes table.csv");
  add_common(compare, cmp_args);
  compare->add_option("--controllers", cmp_controllers,
                      "subset of the lineup (default: all seven)")
      ->delimiter(',');
  compare->add_option("--seeds", cmp_seeds,
                      "seed list (default: the single --seed)")
      ->delimiter(',');

  CommonArgs sweep_args;
  std::vector<int> factors{1, 2, 3, 4};
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Scale the training horizon for the hybrids; writes sweep.csv");
  add_common(sweep, sweep_args);
  sweep->add_option("--factors", factors, "training-horizon multipliers")
      ->delimiter(',')
      ->capture_default_str();

  CommonArgs fc_args;
  std::string fc_input;
  std::string fc_method = "hybrid";
  CLI::App* fc = app.add_subcommand(
      "forecast", "Forecast from a history CSV; writes envelope.csv");
  add_common(fc, fc_args);
  fc->add_option("--input", fc_input, "single-column CSV of past disturbance")
      ->required();
  fc->add_option("--method", fc_method, "kc, nar or hybrid")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(simulate)) {
      return run_simulate(sim_args, disturbance_in, disturbance_out);
    }
    if (app.got_subcommand(compare)) {
      return run_compare(cmp_args, cmp_controllers, cmp_seeds);
    }
    if (app.got_subcommand(sweep)) {
      return run_sweep(sweep_args, factors);
    }
    return run_forecast(fc_args, fc_input, fc_method);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace gpmpc::cli

#include "gpmpc/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <json.hpp>

namespace gpmpc::io {

namespace {

using nlohmann::json;

double parse_double(std::string_view field, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw std::invalid_argument(where + ": bad numeric field '" +
                                std::string(field) + "'");
  }
  return v;
}

int parse_int(std::string_view field, const std::string& where) {
  int v = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw std::invalid_argument(where + ": bad integer field '" +
                                std::string(field) + "'");
  }
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!j.is_object()) {
    throw std::invalid_argument(where + ": expected a JSON object");
  }
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument(where + ": unknown key '" + item.key() + "'");
    }
  }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json scenario_to_json(const scenario::ScenarioSpec& s) {
  return json{{"kind", scenario::kind_name(s.kind)},
              {"seed", s.seed},
              {"duration_s", s.duration_s},
              {"preroll_s", s.preroll_s},
              {"horizon_pad_s", s.horizon_pad_s},
              {"sample_period_s", s.sample_period_s},
              {"base_g_s", s.base_g_s},
              {"amplitude_g_s", s.amplitude_g_s},
              {"period_s", s.period_s},
              {"ls_level_g_s", s.ls_level_g_s},
              {"ls_switch_time_s", s.ls_switch_time_s},
              {"cm_level_g_s", s.cm_level_g_s},
              {"cm_offset_g_s", s.cm_offset_g_s},
              {"cm_amplitude_g_s", s.cm_amplitude_g_s},
              {"cm_period_s", s.cm_period_s},
              {"cm_ramp_start_s", s.cm_ramp_start_s},
              {"cm_ramp_peak_s", s.cm_ramp_peak_s},
              {"cm_slope_g_s2", s.cm_slope_g_s2},
              {"rw_step_sigma_g_s", s.rw_step_sigma_g_s},
              {"measurement_sigma_g_s", s.measurement_sigma_g_s},
              {"clip_lo_g_s", s.clip_lo_g_s},
              {"clip_hi_g_s", s.clip_hi_g_s}};
}

scenario::ScenarioSpec scenario_from_json(const json& j) {
  check_keys(j,
             {"kind", "seed", "duration_s", "preroll_s", "horizon_pad_s",
              "sample_period_s", "base_g_s", "amplitude_g_s", "period_s",
              "ls_level_g_s", "ls_switch_time_s", "cm_level_g_s",
              "cm_offset_g_s", "cm_amplitude_g_s", "cm_period_s",
              "cm_ramp_start_s", "cm_ramp_peak_s", "cm_slope_g_s2",
              "rw_step_sigma_g_s", "measurement_sigma_g_s", "clip_lo_g_s",
              "clip_hi_g_s"},
             "scenario");
  scenario::ScenarioSpec s;
  if (j.contains("kind")) s.kind = scenario::kind_from_name(j.at("kind").get<std::string>());
  maybe(j, "seed", s.seed);
  maybe(j, "duration_s", s.duration_s);
  maybe(j, "preroll_s", s.preroll_s);
  maybe(j, "horizon_pad_s", s.horizon_pad_s);
  maybe(j, "sample_period_s", s.sample_period_s);
  maybe(j, "base_g_s", s.base_g_s);
  maybe(j, "amplitude_g_s", s.amplitude_g_s);
  maybe(j, "period_s", s.period_s);
  maybe(j, "ls_level_g_s", s.ls_level_g_s);
  maybe(j, "ls_switch_time_s", s.ls_switch_time_s);
  maybe(j, "cm_level_g_s", s.cm_level_g_s);
  maybe(j, "cm_offset_g_s", s.cm_offset_g_s);
  maybe(j, "cm_amplitude_g_s", s.cm_amplitude_g_s);
  maybe(j, "cm_period_s", s.cm_period_s);
  maybe(j, "cm_ramp_start_s", s.cm_ramp_start_s);
  maybe(j, "cm_ramp_peak_s", s.cm_ramp_peak_s);
  maybe(j, "cm_slope_g_s2", s.cm_slope_g_s2);
  maybe(j, "rw_step_sigma_g_s", s.rw_step_sigma_g_s);
  maybe(j, "measurement_sigma_g_s", s.measurement_sigma_g_s);
  maybe(j, "clip_lo_g_s", s.clip_lo_g_s);
  maybe(j, "clip_hi_g_s", s.clip_hi_g_s);
  return s;
}

json forecast_to_json(const forecast::ForecastConfig& f) {
  json j{{"training_steps", f.training_steps},
         {"horizon_steps", f.horizon_steps},
         {"sample_period_s", f.sample_period_s},
         {"nar_order", f.nar_order},
         {"sigma2", f.sigma2},
         {"beta", f.beta},
         {"kc_restarts", f.kc_restarts},
         {"kc_max_iterations", f.kc_max_iterations},
         {"nar_restarts", f.nar_restarts},
         {"nar_max_iterations", f.nar_max_iterations},
         {"nar_max_rows", f.nar_max_rows}};
  if (f.forgetting.has_value()) {
    j["forgetting"] = json{{"kappa", f.forgetting->kappa},
                           {"lambda", f.forgetting->lambda_ff}};
  } else {
    j["forgetting"] = nullptr;
  }
  return j;
}

forecast::ForecastConfig forecast_from_json(const json& j) {
  check_keys(j,
             {"training_steps", "horizon_steps", "sample_period_s",
              "nar_order", "sigma2", "forgetting", "beta", "kc_restarts",
              "kc_max_iterations", "nar_restarts", "nar_max_iterations",
              "nar_max_rows"},
             "forecast");
  forecast::ForecastConfig f;
  maybe(j, "training_steps", f.training_steps);
  maybe(j, "horizon_steps", f.horizon_steps);
  maybe(j, "sample_period_s", f.sample_period_s);
  maybe(j, "nar_order", f.nar_order);
  maybe(j, "sigma2", f.sigma2);
  maybe(j, "beta", f.beta);
  maybe(j, "kc_restarts", f.kc_restarts);
  maybe(j, "kc_max_iterations", f.kc_max_iterations);
  maybe(j, "nar_restarts", f.nar_restarts);
  maybe(j, "nar_max_iterations", f.nar_max_iterations);
  maybe(j, "nar_max_rows", f.nar_max_rows);
  if (j.contains("forgetting") && !j.at("forgetting").is_null()) {
    const json& w = j.at("forgetting");
    check_keys(w, {"kappa", "lambda"}, "forecast.forgetting");
    gp::ForgettingWeights fw;
    maybe(w, "kappa", fw.kappa);
    maybe(w, "lambda", fw.lambda_ff);
    f.forgetting = fw;
  }
  return f;
}

json control_to_json(const control::ControlConfig& c) {
  json j{{"horizon_steps", c.horizon_steps},
         {"step_s", c.step_s},
         {"u_min_kw", c.u_min_kw},
         {"u_max_kw", c.u_max_kw},
         {"temp_min_c", c.temp_min_c},
         {"eta_lower", c.eta_lower},
         {"eta_upper", c.eta_upper},
         {"beta", c.beta},
         {"max_iterations", c.max_iterations},
         {"tolerance", c.tolerance}};
  j["temp_max_c"] = c.temp_max_c.has_value() ? json(*c.temp_max_c) : json(nullptr);
  return j;
}

control::ControlConfig control_from_json(const json& j) {
  check_keys(j,
             {"horizon_steps", "step_s", "u_min_kw", "u_max_kw", "temp_min_c",
              "temp_max_c", "eta_lower", "eta_upper", "beta", "max_iterations",
              "tolerance"},
             "control");
  control::ControlConfig c;
  maybe(j, "horizon_steps", c.horizon_steps);
  maybe(j, "step_s", c.step_s);
  maybe(j, "u_min_kw", c.u_min_kw);
  maybe(j, "u_max_kw", c.u_max_kw);
  maybe(j, "temp_min_c", c.temp_min_c);
  maybe(j, "eta_lower", c.eta_lower);
  maybe(j, "eta_upper", c.eta_upper);
  maybe(j, "beta", c.beta);
  maybe(j, "max_iterations", c.max_iterations);
  maybe(j, "tolerance", c.tolerance);
  if (j.contains("temp_max_c") && !j.at("temp_max_c").is_null()) {
    c.temp_max_c = j.at("temp_max_c").get<double>();
  }
  return c;
}

json plant_to_json(const plant::PlantParams& p) {
  return json{{"mass_kg", p.mass_kg},
              {"cp_kj_per_kg_k", p.cp_kj_per_kg_k},
              {"inlet_temp_c", p.inlet_temp_c},
              {"ambient_temp_c", p.ambient_temp_c},
              {"heat_loss_kw_per_k", p.heat_loss_kw_per_k}};
}

plant::PlantParams plant_from_json(const json& j) {
  check_keys(j,
             {"mass_kg", "cp_kj_per_kg_k", "inlet_temp_c", "ambient_temp_c",
              "heat_loss_kw_per_k"},
             "plant");
  plant::PlantParams p;
  maybe(j, "mass_kg", p.mass_kg);
  maybe(j, "cp_kj_per_kg_k", p.cp_kj_per_kg_k);
  maybe(j, "inlet_temp_c", p.inlet_temp_c);
  maybe(j, "ambient_temp_c", p.ambient_temp_c);
  maybe(j, "heat_loss_kw_per_k", p.heat_loss_kw_per_k);
  return p;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot rename '" + tmp + "' to '" + path + "'");
  }
}

void write_run_csv(const std::string& path,
                   const std::vector<sim::StepRecord>& steps) {
  std::string out =
      "t,T,u,mdot_true,mdot_meas,env_lo,env_hi,switch,J_step,solve_ms\n";
  for (const sim::StepRecord& s : steps) {
    out += format_double(s.t);
    out += ',';
    out += format_double(s.temp_c);
    out += ',';
    out += format_double(s.u_kw);
    out += ',';
    out += format_double(s.mdot_true);
    out += ',';
    out += format_double(s.mdot_meas);
    out += ',';
    out += format_double(s.env_lo);
    out += ',';
    out += format_double(s.env_hi);
    out += ',';
    out += std::to_string(s.switch_choice);
    out += ',';
    out += format_double(s.j_step);
    out += ',';
    out += format_double(s.solve_ms);
    out += '\n';
  }
  write_text_atomic(path, out);
}

std::vector<sim::StepRecord> read_run_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) ||
      line != "t,T,u,mdot_true,mdot_meas,env_lo,env_hi,switch,J_step,solve_ms") {
    throw std::invalid_argument("run csv: unexpected header in '" + path + "'");
  }
  std::vector<sim::StepRecord> steps;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 10) {
      throw std::invalid_argument("run csv: expected 10 fields per row");
    }
    sim::StepRecord s;
    s.t = parse_double(f[0], "run csv");
    s.temp_c = parse_double(f[1], "run csv");
    s.u_kw = parse_double(f[2], "run csv");
    s.mdot_true = parse_double(f[3], "run csv");
    s.mdot_meas = parse_double(f[4], "run csv");
    s.env_lo = parse_double(f[5], "run csv");
    s.env_hi = parse_double(f[6], "run csv");
    s.switch_choice = parse_int(f[7], "run csv");
    s.j_step = parse_double(f[8], "run csv");
    s.solve_ms = parse_double(f[9], "run csv");
    steps.push_back(s);
  }
  return steps;
}

void write_metrics_json(const std::string& path, const sim::Metrics& metrics) {
  const json j{{"avg_objective", metrics.avg_objective},
               {"violation_degree_seconds", metrics.violation_degree_seconds},
               {"total_heater_energy_kj", metrics.total_heater_energy_kj},
               {"switch_fraction_nar", metrics.switch_fraction_nar},
               {"peak_violation_c", metrics.peak_violation_c}};
  write_text_atomic(path, j.dump(2) + "\n");
}

void write_envelope_csv(const std::string& path,
                        const forecast::Envelope& envelope,
                        const std::string& method) {
  std::string out = "t,lower,mean,upper,variance,method\n";
  for (Eigen::Index i = 0; i < envelope.step_times.size(); ++i) {
    out += format_double(envelope.step_times[i]);
    out += ',';
    out += format_double(envelope.lower[i]);
    out += ',';
    out += format_double(envelope.mean[i]);
    out += ',';
    out += format_double(envelope.upper[i]);
    out += ',';
    out += format_double(envelope.variance[i]);
    out += ',';
    out += method;
    out += '\n';
  }
  write_text_atomic(path, out);
}

void write_disturbance_csv(const std::string& path,
                           const scenario::DisturbanceTrace& trace) {
  std::string out = "t,true,measured\n";
  for (Eigen::Index i = 0; i < trace.times.size(); ++i) {
    out += format_double(trace.times[i]);
    out += ',';
    out += format_double(trace.true_values[i]);
    out += ',';
    out += format_double(trace.measured_values[i]);
    out += '\n';
  }
  write_text_atomic(path, out);
}

scenario::DisturbanceTrace read_disturbance_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "t,true,measured") {
    throw std::invalid_argument("disturbance csv: unexpected header in '" +
                                path + "'");
  }
  std::vector<double> t, tv, mv;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 3) {
      throw std::invalid_argument("disturbance csv: expected 3 fields per row");
    }
    t.push_back(parse_double(f[0], "disturbance csv"));
    tv.push_back(parse_double(f[1], "disturbance csv"));
    mv.push_back(parse_double(f[2], "disturbance csv"));
  }
  scenario::DisturbanceTrace trace;
  trace.times = Eigen::Map<Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
  trace.true_values = Eigen::Map<Eigen::VectorXd>(tv.data(), static_cast<Eigen::Index>(tv.size()));
  trace.measured_values = Eigen::Map<Eigen::VectorXd>(mv.data(), static_cast<Eigen::Index>(mv.size()));
  return trace;
}

void write_comparison_csv(const std::string& path,
                          const std::vector<sim::ComparisonRow>& rows) {
  std::string out =
      "controller,avg_objective_mean,avg_objective_sd,"
      "violation_degree_seconds_mean,violation_degree_seconds_sd,"
      "total_heater_energy_kj_mean,total_heater_energy_kj_sd,"
      "switch_fraction_nar_mean,switch_fraction_nar_sd,"
      "peak_violation_c_mean,peak_violation_c_sd,norm_avg_objective,status\n";
  for (const sim::ComparisonRow& r : rows) {
    out += sim::controller_name(r.controller);
    out += ',';
    out += format_double(r.mean.avg_objective);
    out += ',';
    out += format_double(r.sd.avg_objective);
    out += ',';
    out += format_double(r.mean.violation_degree_seconds);
    out += ',';
    out += format_double(r.sd.violation_degree_seconds);
    out += ',';
    out += format_double(r.mean.total_heater_energy_kj);
    out += ',';
    out += format_double(r.sd.total_heater_energy_kj);
    out += ',';
    out += format_double(r.mean.switch_fraction_nar);
    out += ',';
    out += format_double(r.sd.switch_fraction_nar);
    out += ',';
    out += format_double(r.mean.peak_violation_c);
    out += ',';
    out += format_double(r.sd.peak_violation_c);
    out += ',';
    out += format_double(r.norm_avg_objective);
    out += ',';
    out += sanitize(r.status);
    out += '\n';
  }
  write_text_atomic(path, out);
}

void write_sweep_csv(const std::string& path,
                     const std::vector<sim::SweepRow>& rows) {
  std::string out = "factor,controller,avg_objective,normalized,status\n";
  for (const sim::SweepRow& r : rows) {
    out += std::to_string(r.factor);
    out += ',';
    out += sim::controller_name(r.controller);
    out += ',';
    out += format_double(r.metrics.avg_objective);
    out += ',';
    out += format_double(r.normalized);
    out += ',';
    out += sanitize(r.status);
    out += '\n';
  }
  write_text_atomic(path, out);
}

std::string config_to_json(const sim::SimConfig& config) {
  json j{{"scenario", scenario_to_json(config.scenario)},
         {"controller", sim::controller_name(config.controller)},
         {"forecast", forecast_to_json(config.forecast)},
         {"control", control_to_json(config.control)},
         {"plant", plant_to_json(config.plant)},
         {"delta1", config.delta1},
         {"delta2", config.delta2},
         {"switch_ratio_as_printed", config.switch_ratio_as_printed},
         {"duration_s", config.duration_s},
         {"initial_temp_c", config.initial_temp_c},
         {"seed", config.seed},
         {"measure_solve_time", config.measure_solve_time}};
  return j.dump(2) + "\n";
}

sim::SimConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  try {
    check_keys(j,
               {"scenario", "controller", "forecast", "control", "plant",
                "delta1", "delta2", "switch_ratio_as_printed", "duration_s",
                "initial_temp_c", "seed", "measure_solve_time"},
               "config");
    sim::SimConfig c;
    if (j.contains("scenario")) c.scenario = scenario_from_json(j.at("scenario"));
    if (j.contains("controller")) {
      c.controller = sim::controller_from_name(j.at("controller").get<std::string>());
    }
    if (j.contains("forecast")) c.forecast = forecast_from_json(j.at("forecast"));
    if (j.contains("control")) c.control = control_from_json(j.at("control"));
    if (j.contains("plant")) c.plant = plant_from_json(j.at("plant"));
    maybe(j, "delta1", c.delta1);
    maybe(j, "delta2", c.delta2);
    maybe(j, "switch_ratio_as_printed", c.switch_ratio_as_printed);
    maybe(j, "duration_s", c.duration_s);
    maybe(j, "initial_temp_c", c.initial_temp_c);
    maybe(j, "seed", c.seed);
    maybe(j, "measure_solve_time", c.measure_solve_time);
    return c;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: bad field: ") + e.what());
  }
}

}  // namespace gpmpc::io

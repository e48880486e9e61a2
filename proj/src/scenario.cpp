#include "gpmpc/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "gpmpc/rng.hpp"

namespace gpmpc::scenario {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double clip(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

}  // namespace

Kind kind_from_name(const std::string& name) {
  std::string s;
  s.reserve(name.size());
  for (char c : name) s.push_back(static_cast<char>(std::tolower(c)));
  if (s == "sn") return Kind::SN;
  if (s == "ls") return Kind::LS;
  if (s == "cm") return Kind::CM;
  if (s == "rw") return Kind::RW;
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

std::string kind_name(Kind kind) {
  switch (kind) {
    case Kind::SN: return "sn";
    case Kind::LS: return "ls";
    case Kind::CM: return "cm";
    case Kind::RW: return "rw";
  }
  return "sn";
}

void validate(const ScenarioSpec& spec) {
  if (!(spec.duration_s > 0.0) || spec.preroll_s < 0.0 ||
      spec.horizon_pad_s < 0.0) {
    throw std::invalid_argument("ScenarioSpec: bad time span");
  }
  if (!(spec.sample_period_s > 0.0)) {
    throw std::invalid_argument("ScenarioSpec: sample period must be > 0");
  }
  if (!(spec.clip_lo_g_s < spec.clip_hi_g_s)) {
    throw std::invalid_argument("ScenarioSpec: empty clip range");
  }
  if (spec.measurement_sigma_g_s < 0.0 || spec.rw_step_sigma_g_s < 0.0) {
    throw std::invalid_argument("ScenarioSpec: negative noise level");
  }
  if (!(spec.period_s > 0.0) || !(spec.cm_period_s > 0.0)) {
    throw std::invalid_argument("ScenarioSpec: periods must be positive");
  }
  if (!(spec.cm_ramp_start_s < spec.cm_ramp_peak_s)) {
    throw std::invalid_argument("ScenarioSpec: CM ramp must start before peak");
  }
}

DisturbanceTrace generate(const ScenarioSpec& spec) {
  validate(spec);
  const double t_span = spec.preroll_s + spec.duration_s + spec.horizon_pad_s;
  const int i0 = static_cast<int>(std::lround(spec.preroll_s / spec.sample_period_s));
  const int n = static_cast<int>(std::lround(t_span / spec.sample_period_s)) + 1;

  DisturbanceTrace trace;
  trace.times.resize(n);
  trace.true_values.resize(n);
  trace.measured_values.resize(n);
  for (int i = 0; i < n; ++i) {
    trace.times[i] = (i - i0) * spec.sample_period_s;
  }

  switch (spec.kind) {
    case Kind::SN:
      for (int i = 0; i < n; ++i) {
        const double t = trace.times[i];
        trace.true_values[i] =
            spec.base_g_s + spec.amplitude_g_s * std::sin(kTwoPi * t / spec.period_s);
      }
      break;
    case Kind::LS:
      for (int i = 0; i < n; ++i) {
        const double t = trace.times[i];
        trace.true_values[i] =
            t < spec.ls_switch_time_s
                ? spec.ls_level_g_s
                : spec.ls_level_g_s +
                      spec.amplitude_g_s *
                          std::sin(kTwoPi * (t - spec.ls_switch_time_s) / spec.period_s);
      }
      break;
    case Kind::CM: {
      const double ramp_peak =
          spec.cm_slope_g_s2 * (spec.cm_ramp_peak_s - spec.cm_ramp_start_s);
      for (int i = 0; i < n; ++i) {
        const double t = trace.times[i];
        if (t < spec.cm_ramp_start_s) {
          trace.true_values[i] = spec.cm_level_g_s;
        } else {
          const double ramp =
              t < spec.cm_ramp_peak_s
                  ? spec.cm_slope_g_s2 * (t - spec.cm_ramp_start_s)
                  : ramp_peak - spec.cm_slope_g_s2 * (t - spec.cm_ramp_peak_s);
          trace.true_values[i] =
              spec.cm_offset_g_s +
              spec.cm_amplitude_g_s * std::sin(kTwoPi * t / spec.cm_period_s) +
              ramp;
        }
      }
      break;
    }
    case Kind::RW: {
      Rng walk(mix_seed(spec.seed, 0xA1));
      double w = clip(spec.base_g_s, spec.clip_lo_g_s, spec.clip_hi_g_s);
      for (int i = 0; i < n; ++i) {
        trace.true_values[i] = w;
        w = clip(w + spec.rw_step_sigma_g_s * walk.normal(), spec.clip_lo_g_s,
                 spec.clip_hi_g_s);
      }
      break;
    }
  }

  for (int i = 0; i < n; ++i) {
    trace.true_values[i] =
        clip(trace.true_values[i], spec.clip_lo_g_s, spec.clip_hi_g_s);
  }

  Rng meas(mix_seed(spec.seed, 0xB2));
  for (int i = 0; i < n; ++i) {
    trace.measured_values[i] =
        trace.true_values[i] + spec.measurement_sigma_g_s * meas.normal();
  }
  return trace;
}

}  // namespace gpmpc::scenario

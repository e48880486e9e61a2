#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

namespace gpmpc::scenario {

enum class Kind { SN, LS, CM, RW };

/// Accepts "sn", "ls", "cm", "rw" (case-insensitive); throws
/// std::invalid_argument otherwise.
Kind kind_from_name(const std::string& name);
std::string kind_name(Kind kind);

/// Disturbance generator settings. The functional forms are plumbing chosen
/// to exercise the controllers: a stationary sinusoid (SN), a level shift
/// into a sinusoid (LS), a changing mean with ramps (CM), and a bounded
/// random walk (RW). All magnitudes are configurable.
struct ScenarioSpec {
  Kind kind = Kind::SN;
  std::uint64_t seed = 0;
  double duration_s = 600.0;
  double preroll_s = 100.0;      // history available before t = 0
  double horizon_pad_s = 50.0;   // future beyond the end, for lookahead
  double sample_period_s = 2.0;

  // SN: base + amplitude * sin(2 pi t / period)
  double base_g_s = 35.0;
  double amplitude_g_s = 15.0;
  double period_s = 100.0;

  // LS: level until the switch time, then level + amplitude * sin(...)
  double ls_level_g_s = 30.0;
  double ls_switch_time_s = 300.0;

  // CM: level until ramp_start, then offset + amplitude * sin(2 pi t /
  // period) plus a ramp rising at `slope` until ramp_peak and falling at
  // -`slope` afterwards.
  double cm_level_g_s = 30.0;
  double cm_offset_g_s = 25.0;
  double cm_amplitude_g_s = 12.0;
  double cm_period_s = 80.0;
  double cm_ramp_start_s = 160.0;
  double cm_ramp_peak_s = 400.0;
  double cm_slope_g_s2 = 0.05;

  // RW: w_{k+1} = clip(w_k + N(0, step_sigma^2)), started at base_g_s.
  double rw_step_sigma_g_s = 3.0;

  double measurement_sigma_g_s = 1.5;
  double clip_lo_g_s = 0.0;
  double clip_hi_g_s = 70.0;
};

void validate(const ScenarioSpec& spec);

struct DisturbanceTrace {
  Eigen::VectorXd times;            // seconds, preroll times are negative
  Eigen::VectorXd true_values;      // g/s, clipped to the spec's range
  Eigen::VectorXd measured_values;  // true + measurement noise
};

/// Samples the scenario on the grid -preroll .. duration + horizon_pad.
/// Fully determined by the spec (including the seed).
DisturbanceTrace generate(const ScenarioSpec& spec);

}  // namespace gpmpc::scenario

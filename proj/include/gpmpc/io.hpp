#pragma once

#include <string>
#include <vector>

#include "gpmpc/forecast.hpp"
#include "gpmpc/scenario.hpp"
#include "gpmpc/sim.hpp"

namespace gpmpc::io {

/// Shortest representation that round-trips exactly.
std::string format_double(double v);

/// Writes to a temporary file in the same directory, then renames over the
/// target, so readers never observe a partial file.
void write_text_atomic(const std::string& path, const std::string& content);

// Per-step log: t,T,u,mdot_true,mdot_meas,env_lo,env_hi,switch,J_step,solve_ms
void write_run_csv(const std::string& path,
                   const std::vector<sim::StepRecord>& steps);
std::vector<sim::StepRecord> read_run_csv(const std::string& path);

void write_metrics_json(const std::string& path, const sim::Metrics& metrics);

// Envelope CSV: t, lower, mean, upper, variance, method
void write_envelope_csv(const std::string& path,
                        const forecast::Envelope& envelope,
                        const std::string& method);

// Disturbance CSV: t, true, measured
void write_disturbance_csv(const std::string& path,
                           const scenario::DisturbanceTrace& trace);
scenario::DisturbanceTrace read_disturbance_csv(const std::string& path);

void write_comparison_csv(const std::string& path,
                          const std::vector<sim::ComparisonRow>& rows);
void write_sweep_csv(const std::string& path,
                     const std::vector<sim::SweepRow>& rows);

/// JSON round-trip of the full simulation configuration. Parsing rejects
/// unknown keys so config typos fail loudly. Throws std::invalid_argument
/// on malformed documents.
std::string config_to_json(const sim::SimConfig& config);
sim::SimConfig config_from_json(const std::string& text);

}  // namespace gpmpc::io

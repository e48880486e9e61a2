#pragma once

namespace gpmpc::plant {

/// Tank-heater constants. Defaults are the values used throughout the
/// experiments; heat loss to ambient is essentially negligible.
struct PlantParams {
  double mass_kg = 0.7854;
  double cp_kj_per_kg_k = 6.9244;
  double inlet_temp_c = 20.0;
  double ambient_temp_c = 15.0;
  double heat_loss_kw_per_k = 1e-7;
};

/// dT/dt in K/s from an energy balance on the tank contents. `heater_kw` and
/// `mdot_kg_s` are held constant by the caller (zero-order hold).
double temperature_derivative(const PlantParams& params, double temp_c,
                              double heater_kw, double mdot_kg_s);

/// One classical RK4 step of length `dt_s`.
double rk4_step(const PlantParams& params, double temp_c, double heater_kw,
                double mdot_kg_s, double dt_s);

}  // namespace gpmpc::plant

#include "gpmpc/plant.hpp"

namespace gpmpc::plant {

double temperature_derivative(const PlantParams& params, double temp_c,
                              double heater_kw, double mdot_kg_s) {
  const double convective =
      mdot_kg_s * params.cp_kj_per_kg_k * (temp_c - params.inlet_temp_c);
  const double loss =
      params.heat_loss_kw_per_k * (temp_c - params.ambient_temp_c);
  return (heater_kw - convective - loss) /
         (params.mass_kg * params.cp_kj_per_kg_k);
}

double rk4_step(const PlantParams& params, double temp_c, double heater_kw,
                double mdot_kg_s, double dt_s) {
  const auto f = [&](double t) {
    return temperature_derivative(params, t, heater_kw, mdot_kg_s);
  };
  const double k1 = f(temp_c);
  const double k2 = f(temp_c + 0.5 * dt_s * k1);
  const double k3 = f(temp_c + 0.5 * dt_s * k2);
  const double k4 = f(temp_c + dt_s * k3);
  return temp_c + dt_s / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace gpmpc::plant

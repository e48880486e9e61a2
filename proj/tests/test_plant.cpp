#include <doctest.h>

#include <cmath>

#include "gpmpc/plant.hpp"
#include "gpmpc/rng.hpp"
#include "support/oracles.hpp"

using namespace gpmpc;
using namespace gpmpc::plant;

TEST_CASE("temperature_derivative matches hand arithmetic") {
  const PlantParams p;
  CHECK(p.mass_kg == 0.7854);
  CHECK(p.cp_kj_per_kg_k == 6.9244);
  CHECK(p.inlet_temp_c == 20.0);
  CHECK(p.ambient_temp_c == 15.0);
  CHECK(p.heat_loss_kw_per_k == 1e-7);

  // At T = T_inlet only the tiny ambient loss acts.
  CHECK(temperature_derivative(p, 20.0, 0.0, 0.03) ==
        doctest::Approx(-9.19e-8).epsilon(1e-3));

  // Exact equilibrium by construction.
  const double t = 47.0, mdot = 0.04;
  const double q = mdot * p.cp_kj_per_kg_k * (t - p.inlet_temp_c) +
                   p.heat_loss_kw_per_k * (t - p.ambient_temp_c);
  CHECK(temperature_derivative(p, t, q, mdot) == doctest::Approx(0.0).epsilon(1e-15));

  CHECK(temperature_derivative(p, 55.0, 5.0, 0.02) ==
        doctest::Approx(0.02812).epsilon(1e-3));
}

TEST_CASE("rk4_step holds equilibria and tracks the closed form") {
  const PlantParams p;
  const double t = 47.0, mdot = 0.04;
  const double q = mdot * p.cp_kj_per_kg_k * (t - p.inlet_temp_c) +
                   p.heat_loss_kw_per_k * (t - p.ambient_temp_c);
  CHECK(rk4_step(p, t, q, mdot, 2.0) == doctest::Approx(t).epsilon(1e-14));

  const double exact = oracles::exact_temperature(p, 55.0, 5.0, 0.02, 2.0);
  CHECK(std::abs(rk4_step(p, 55.0, 5.0, 0.02, 2.0) - exact) <= 1e-6);
}

TEST_CASE("rk4 error falls at fourth order when the step halves") {
  const PlantParams p;
  const double t0 = 55.0, q = 5.0, mdot = 0.02;
  const double exact = oracles::exact_temperature(p, t0, q, mdot, 2.0);

  const double coarse = std::abs(rk4_step(p, t0, q, mdot, 2.0) - exact);
  const double fine_mid = rk4_step(p, t0, q, mdot, 1.0);
  const double fine = std::abs(rk4_step(p, fine_mid, q, mdot, 1.0) - exact);
  CHECK(coarse / fine >= 14.0);
}

TEST_CASE("rk4 is monotone in disturbance and input") {
  const PlantParams p;
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const double t0 = rng.uniform(25.0, 90.0);  // above T_inlet
    const double q = rng.uniform(0.0, 10.0);
    const double m1 = rng.uniform(0.0, 0.07);
    const double m2 = m1 + rng.uniform(1e-4, 0.02);
    CHECK(rk4_step(p, t0, q, m2, 2.0) < rk4_step(p, t0, q, m1, 2.0));

    const double q2 = q + rng.uniform(1e-3, 3.0);
    CHECK(rk4_step(p, t0, q2, m1, 2.0) > rk4_step(p, t0, q, m1, 2.0));
  }
}

TEST_CASE("rk4 stays inside the equilibrium band for 1e4 steps") {
  const PlantParams p;
  const double corners[][2] = {
      {0.0, 0.0}, {0.0, 0.07}, {10.0, 0.0}, {10.0, 0.07}, {5.0, 0.03}};
  for (const auto& c : corners) {
    const double q = c[0], mdot = c[1];
    const double t_inf = oracles::exact_temperature(p, 55.0, q, mdot, 1e12);
    const double lo = std::min(55.0, t_inf) - 1e-6;
    const double hi = std::max(55.0, t_inf) + 1e-6;
    double t = 55.0;
    double prev_gap = std::abs(t - t_inf);
    bool inside = true, monotone = true;
    for (int i = 0; i < 10000; ++i) {
      t = rk4_step(p, t, q, mdot, 2.0);
      if (t < lo || t > hi) inside = false;
      const double gap = std::abs(t - t_inf);
      if (gap > prev_gap + 1e-9) monotone = false;
      prev_gap = gap;
    }
    CHECK(inside);
    CHECK(monotone);  // no oscillation: h is inside the stability region
  }
}

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "floeda/ocean_spectral.hpp"
#include "floeda/rng.hpp"
#include "floeda/torus.hpp"

namespace floeda {

/// A free-drifting, non-rotating cylindrical floe.
struct Floe {
  Vec2 x = Vec2::Zero(); ///< position, kept in [0, 2pi)^2
  Vec2 v = Vec2::Zero();
  double radius = 0.0;
  double mass = 0.0;
  double drag = 0.0; ///< quadratic drag coefficient alpha
};

struct FloeState {
  std::vector<Floe> floes;
  double time = 0.0;
};

/// Material constants shared by every floe. Drag scales with wetted area:
/// alpha = drag_coefficient * ocean_density * r^2.
struct FloeMaterial {
  double ice_density = 1.0;
  double thickness = 1.0;
  double ocean_density = 1.0;
  double drag_coefficient = 100.0;
};

enum class Integrator { SemiImplicitEuler, RungeKutta4 };

/// rho * pi * r^2 * h
double floe_mass(double rho, double r, double h);

double drag_for_radius(const FloeMaterial& material, double r);

Floe make_floe(const FloeMaterial& material, double r, const Vec2& x, const Vec2& v);

/// alpha (u_o - v) |u_o - v|
inline Vec2 drag_force(const Vec2& ocean, const Vec2& v, double alpha) {
  const Vec2 rel = ocean - v;
  return alpha * rel.norm() * rel;
}

/// Advances one floe by dt with the ocean velocity supplied by `ocean_at`
/// (frozen over the step).
///
/// Semi-implicit Euler updates the velocity with forward Euler and then moves
/// the floe with the new velocity. The position is wrapped onto the torus.
template <class OceanAt>
void advance_floe(Floe& f, const OceanAt& ocean_at, double dt, Integrator integrator) {
  const double k = f.drag / f.mass;
  if (integrator == Integrator::SemiImplicitEuler) {
    const Vec2 u = ocean_at(f.x);
    f.v += dt * k * (u - f.v).norm() * (u - f.v);
    f.x = wrap_point(f.x + dt * f.v);
    return;
  }
  auto accel = [&](const Vec2& x, const Vec2& v) -> Vec2 {
    const Vec2 rel = ocean_at(wrap_point(x)) - v;
    return k * rel.norm() * rel;
  };
  const Vec2 x0 = f.x, v0 = f.v;
  const Vec2 a1 = accel(x0, v0);
  const Vec2 x2 = x0 + 0.5 * dt * v0, v2 = v0 + 0.5 * dt * a1;
  const Vec2 a2 = accel(x2, v2);
  const Vec2 x3 = x0 + 0.5 * dt * v2, v3 = v0 + 0.5 * dt * a2;
  const Vec2 a3 = accel(x3, v3);
  const Vec2 x4 = x0 + dt * v3, v4 = v0 + dt * a3;
  const Vec2 a4 = accel(x4, v4);
  f.x = wrap_point(x0 + dt / 6.0 * (v0 + 2.0 * v2 + 2.0 * v3 + v4));
  f.v = v0 + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
}

/// One step of every floe driven by the spectral ocean evaluated exactly at
/// each floe position. Floe order is preserved.
FloeState step_floes(const FloeState& state, const ModeSet& modes, const ModeState& ocean, double dt,
                     Integrator integrator = Integrator::SemiImplicitEuler);

/// CDF of the power law N(r) ~ r^-alpha truncated to [r_min, r_max].
double power_law_cdf(double r, double alpha, double r_min, double r_max);

/// i.i.d. radii from the truncated power law by inverse-CDF sampling.
std::vector<double> sample_radii(std::size_t count, double alpha, double r_min, double r_max, Rng& rng);

} // namespace floeda

#include "floeda/floe_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "floeda/errors.hpp"

namespace floeda {

double floe_mass(double rho, double r, double h) {
  if (!(rho > 0.0 && r > 0.0 && h > 0.0)) throw ConfigError("floe density, radius and thickness must be positive");
  return rho * std::numbers::pi * r * r * h;
}

double drag_for_radius(const FloeMaterial& material, double r) {
  return material.drag_coefficient * material.ocean_density * r * r;
}

Floe make_floe(const FloeMaterial& material, double r, const Vec2& x, const Vec2& v) {
  return {wrap_point(x), v, r, floe_mass(material.ice_density, r, material.thickness), drag_for_radius(material, r)};
}

FloeState step_floes(const FloeState& state, const ModeSet& modes, const ModeState& ocean, double dt,
                     Integrator integrator) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  const PointEvaluator eval(modes);
  const auto ocean_at = [&](const Vec2& x) { return eval(ocean.coeffs, x); };
  FloeState next = state;
  for (Floe& f : next.floes) advance_floe(f, ocean_at, dt, integrator);
  next.time += dt;
  return next;
}

double power_law_cdf(double r, double alpha, double r_min, double r_max) {
  if (r <= r_min) return 0.0;
  if (r >= r_max) return 1.0;
  const double e = 1.0 - alpha;
  return (std::pow(r, e) - std::pow(r_min, e)) / (std::pow(r_max, e) - std::pow(r_min, e));
}

std::vector<double> sample_radii(std::size_t count, double alpha, double r_min, double r_max, Rng& rng) {
  if (!(r_min > 0.0) || !(r_min <= r_max)) throw ConfigError("radius bounds must satisfy 0 < r_min <= r_max");
  if (alpha == 1.0) throw ConfigError("power-law exponent 1 is not supported by the inverse-CDF sampler");
  std::vector<double> radii(count, r_min);
  if (r_min == r_max) return radii;
  const double e = 1.0 - alpha;
  const double lo = std::pow(r_min, e);
  const double hi = std::pow(r_max, e);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (auto& r : radii) r = std::clamp(std::pow(lo + unif(rng) * (hi - lo), 1.0 / e), r_min, r_max);
  return radii;
}

} // namespace floeda

#include "floeda/torus.hpp"

#include <cmath>
#include <numbers>

namespace floeda {

double wrap_coordinate(double x) {
  if (x >= 0.0 && x < kTwoPi) return x;
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative value lands exactly on 2pi after the shift.
  if (r >= kTwoPi) r = 0.0;
  return r;
}

double wrap_difference(double dx) {
  double r = std::fmod(dx, kTwoPi);
  if (r > std::numbers::pi) r -= kTwoPi;
  else if (r <= -std::numbers::pi) r += kTwoPi;
  return r;
}

} // namespace floeda

#pragma once

#include <numbers>

#include <Eigen/Core>

namespace floeda {

using Vec2 = Eigen::Vector2d;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Maps a coordinate into [0, 2pi).
double wrap_coordinate(double x);

/// Maps a displacement onto (-pi, pi] (minimum image).
double wrap_difference(double dx);

inline Vec2 wrap_point(const Vec2& p) { return {wrap_coordinate(p.x()), wrap_coordinate(p.y())}; }

inline Vec2 min_image(const Vec2& d) { return {wrap_difference(d.x()), wrap_difference(d.y())}; }

} // namespace floeda

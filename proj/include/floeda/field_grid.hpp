#pragma once

#include <cstddef>
#include <vector>

#include "floeda/torus.hpp"

namespace floeda {

/// A two-component velocity field sampled on the regular n x n grid with
/// nodes x_i = 2 pi i / n, y_j = 2 pi j / n.
///
/// Storage is row-major with shape (n_y, n_x, 2): the value for node (i, j)
/// and component c lives at `((j * n + i) * 2 + c)`. This is also the on-disk
/// layout of the binary field format.
class FieldGrid {
public:
  static constexpr int kComponents = 2;

  FieldGrid() = default;
  explicit FieldGrid(int n, double time = 0.0);

  int n() const { return n_; }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  double spacing() const { return kTwoPi / n_; }
  Vec2 node(int i, int j) const { return {spacing() * i, spacing() * j}; }

  double& at(int i, int j, int c) { return data_[index(i, j, c)]; }
  double at(int i, int j, int c) const { return data_[index(i, j, c)]; }
  Vec2 velocity(int i, int j) const { return {at(i, j, 0), at(i, j, 1)}; }
  void set_velocity(int i, int j, const Vec2& u) {
    at(i, j, 0) = u.x();
    at(i, j, 1) = u.y();
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  /// Largest pointwise speed over all nodes.
  double max_speed() const;

private:
  std::size_t index(int i, int j, int c) const {
    return (static_cast<std::size_t>(j) * n_ + i) * kComponents + c;
  }

  int n_ = 0;
  double time_ = 0.0;
  std::vector<double> data_;
};

} // namespace floeda

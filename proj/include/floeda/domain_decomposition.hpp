#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "floeda/field_grid.hpp"
#include "floeda/floe_dynamics.hpp"
#include "floeda/torus.hpp"

namespace floeda {

/// Uniform nx x ny tiling of [0, 2pi)^2 into half-open rectangles.
/// Subdomain (i, j) has id s = j * nx + i.
class SubdomainLayout {
public:
  struct Bounds {
    double x0, x1, y0, y1;
  };

  SubdomainLayout() = default;
  SubdomainLayout(int nx, int ny);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int count() const { return nx_ * ny_; }
  double hx() const { return kTwoPi / nx_; }
  double hy() const { return kTwoPi / ny_; }

  Vec2 center(int s) const;
  Bounds bounds(int s) const;
  int subdomain_of(const Vec2& p) const;
  bool contains(int s, const Vec2& p) const { return subdomain_of(p) == s; }
  double half_diagonal() const;

private:
  int nx_ = 1;
  int ny_ = 1;
};

SubdomainLayout partition(int nx, int ny);

/// Raised when a subdomain holds fewer floes than requested.
struct SelectionWarning {
  int subdomain = 0;
  std::size_t requested = 0;
  std::size_t available = 0;
};

/// Picks up to `count` floes inside subdomain s, preferring large floes close
/// to the subdomain centre. Floes are ranked by descending
///   (r - r_min) / (r_max - r_min) + (1 - |x - C_s| / half_diagonal)
/// with ties broken by ascending index. If the subdomain holds fewer floes,
/// all are returned and a warning is appended to `warnings` when given.
std::vector<std::size_t> select_observed_floes(const FloeState& floes, const SubdomainLayout& layout, int s,
                                               std::size_t count, double r_min, double r_max,
                                               std::vector<SelectionWarning>* warnings = nullptr);

enum class WeightDistance { Periodic, Planar };

/// Gaussian blending weights of every subdomain on the n x n evaluation grid.
struct WeightGrid {
  int n = 0;
  double sigma_o = 0.0;
  std::vector<std::vector<double>> raw;        ///< [s][j * n + i]
  std::vector<std::vector<double>> normalized; ///< sums to one over s at every node

  double weight(int s, int i, int j) const {
    return normalized[static_cast<std::size_t>(s)][static_cast<std::size_t>(j) * n + i];
  }
};

WeightGrid gaussian_weights(const SubdomainLayout& layout, int grid_n, double sigma_o,
                            WeightDistance distance = WeightDistance::Periodic);

/// Pointwise sum_s W_s^norm u_s, per component.
FieldGrid fuse_fields(std::span<const FieldGrid> local_fields, const WeightGrid& weights);

/// Periodic bilinear interpolation; exact at grid nodes.
Vec2 interp_bilinear(const FieldGrid& field, const Vec2& point);

} // namespace floeda

#include "floeda/domain_decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "floeda/errors.hpp"

namespace floeda {

SubdomainLayout::SubdomainLayout(int nx, int ny) : nx_(nx), ny_(ny) {
  if (nx < 1 || ny < 1) throw ConfigError("subdomain counts must be at least 1");
}

SubdomainLayout partition(int nx, int ny) { return SubdomainLayout(nx, ny); }

Vec2 SubdomainLayout::center(int s) const {
  const int i = s % nx_, j = s / nx_;
  return {(i + 0.5) * hx(), (j + 0.5) * hy()};
}

namespace {

// Cell edges are k * h, with the last one pinned to 2pi so bounds and
// membership agree bit for bit.
double edge(int k, int count) { return k == count ? kTwoPi : k * (kTwoPi / count); }

int cell_of(double x, int count) {
  int i = std::clamp(static_cast<int>(x / (kTwoPi / count)), 0, count - 1);
  if (x < edge(i, count)) --i;
  else if (i + 1 < count && x >= edge(i + 1, count)) ++i;
  return i;
}

} // namespace

SubdomainLayout::Bounds SubdomainLayout::bounds(int s) const {
  const int i = s % nx_, j = s / nx_;
  return {edge(i, nx_), edge(i + 1, nx_), edge(j, ny_), edge(j + 1, ny_)};
}

int SubdomainLayout::subdomain_of(const Vec2& p) const {
  const Vec2 w = wrap_point(p);
  return cell_of(w.y(), ny_) * nx_ + cell_of(w.x(), nx_);
}

double SubdomainLayout::half_diagonal() const { return 0.5 * std::hypot(hx(), hy()); }

std::vector<std::size_t> select_observed_floes(const FloeState& floes, const SubdomainLayout& layout, int s,
                                               std::size_t count, double r_min, double r_max,
                                               std::vector<SelectionWarning>* warnings) {
  if (s < 0 || s >= layout.count()) throw ConfigError("subdomain id out of range");
  const Vec2 c = layout.center(s);
  const double d_max = layout.half_diagonal();
  const double r_span = r_max - r_min;

  struct Candidate {
    double score;
    std::size_t index;
  };
  std::vector<Candidate> candidates;
  for (std::size_t k = 0; k < floes.floes.size(); ++k) {
    const Floe& f = floes.floes[k];
    if (!layout.contains(s, f.x)) continue;
    const double size_term = r_span > 0.0 ? (f.radius - r_min) / r_span : 0.0;
    const double dist = min_image(f.x - c).norm();
    candidates.push_back({size_term + (1.0 - dist / d_max), k});
  }
  if (candidates.size() < count && warnings)
    warnings->push_back({s, count, candidates.size()});
  const std::size_t take = std::min(count, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(),
                    [](const Candidate& a, const Candidate& b) {
                      return a.score != b.score ? a.score > b.score : a.index < b.index;
                    });
  std::vector<std::size_t> out(take);
  for (std::size_t k = 0; k < take; ++k) out[k] = candidates[k].index;
  return out;
}

WeightGrid gaussian_weights(const SubdomainLayout& layout, int grid_n, double sigma_o, WeightDistance distance) {
  if (!(sigma_o > 0.0)) throw ConfigError("sigma_o must be positive");
  if (grid_n < 2) throw ConfigError("grid resolution must be at least 2");
  const int count = layout.count();
  const std::size_t nodes = static_cast<std::size_t>(grid_n) * grid_n;
  WeightGrid w;
  w.n = grid_n;
  w.sigma_o = sigma_o;
  w.raw.assign(count, std::vector<double>(nodes));
  w.normalized.assign(count, std::vector<double>(nodes));
  const double h = kTwoPi / grid_n;
  const double denom = 2.0 * sigma_o * sigma_o;
  std::vector<double> d2(count);
  for (int j = 0; j < grid_n; ++j) {
    for (int i = 0; i < grid_n; ++i) {
      const Vec2 node(i * h, j * h);
      const std::size_t idx = static_cast<std::size_t>(j) * grid_n + i;
      double d2_min = std::numeric_limits<double>::infinity();
      for (int s = 0; s < count; ++s) {
        Vec2 d = node - layout.center(s);
        if (distance == WeightDistance::Periodic) d = min_image(d);
        d2[s] = d.squaredNorm();
        d2_min = std::min(d2_min, d2[s]);
        w.raw[s][idx] = std::exp(-d2[s] / denom);
      }
      // Normalise relative to the nearest centre so tiny sigma_o cannot underflow to 0/0.
      double total = 0.0;
      for (int s = 0; s < count; ++s) total += std::exp(-(d2[s] - d2_min) / denom);
      for (int s = 0; s < count; ++s) w.normalized[s][idx] = std::exp(-(d2[s] - d2_min) / denom) / total;
    }
  }
  return w;
}

FieldGrid fuse_fields(std::span<const FieldGrid> local_fields, const WeightGrid& weights) {
  if (local_fields.size() != weights.normalized.size())
    throw ConfigError("fuse_fields: one local field per subdomain required");
  const int n = weights.n;
  for (const auto& f : local_fields)
    if (f.n() != n) throw ConfigError("fuse_fields: grid resolution mismatch");
  FieldGrid out(n, local_fields.empty() ? 0.0 : local_fields.front().time());
  auto& data = out.data();
  for (std::size_t s = 0; s < local_fields.size(); ++s) {
    const auto& src = local_fields[s].data();
    const auto& ws = weights.normalized[s];
    for (std::size_t node = 0; node < ws.size(); ++node) {
      data[2 * node] += ws[node] * src[2 * node];
      data[2 * node + 1] += ws[node] * src[2 * node + 1];
    }
  }
  return out;
}

Vec2 interp_bilinear(const FieldGrid& field, const Vec2& point) {
  const int n = field.n();
  const double h = field.spacing();
  const Vec2 p = wrap_point(point);
  // Snap to a node when within round-off so nodes are reproduced exactly.
  const auto grid_coord = [&](double x) {
    const double g = x / h, r = std::round(g);
    return std::abs(g - r) < 1e-9 ? r : g;
  };
  const double gx = grid_coord(p.x()), gy = grid_coord(p.y());
  const int i0 = std::min(n - 1, static_cast<int>(gx));
  const int j0 = std::min(n - 1, static_cast<int>(gy));
  const double fx = gx - i0, fy = gy - j0;
  const int i1 = (i0 + 1) % n, j1 = (j0 + 1) % n;
  return (1 - fx) * (1 - fy) * field.velocity(i0, j0) + fx * (1 - fy) * field.velocity(i1, j0) +
         (1 - fx) * fy * field.velocity(i0, j1) + fx * fy * field.velocity(i1, j1);
}

} // namespace floeda

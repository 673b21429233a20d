#include "floeda/ocean_spectral.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include <fftw3.h>

#include "floeda/errors.hpp"

namespace floeda {

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

void check_real(double max_imag, double scale) {
  if (scale > 0.0 && max_imag > 1e-10 * scale)
    throw NumericalError("ocean reconstruction has imaginary residual " + std::to_string(max_imag) +
                         " (state is not conjugate-symmetric)");
}

double coefficient_scale(const ModeState& state) {
  double s = 0.0;
  for (const auto& c : state.coeffs) s += std::abs(c);
  return s;
}

} // namespace

void ModeParams::validate() const {
  if (!(damping > 0.0)) throw ConfigError("mode damping must be positive");
  if (!(noise >= 0.0)) throw ConfigError("mode noise strength must be non-negative");
  if (!std::isfinite(phase_speed) || !std::isfinite(forcing.real()) || !std::isfinite(forcing.imag()))
    throw ConfigError("mode parameters must be finite");
}

double Wavevector::norm() const { return std::hypot(static_cast<double>(kx), static_cast<double>(ky)); }

std::size_t ModeSet::find(Wavevector k) const {
  const auto it = std::find(k_.begin(), k_.end(), k);
  return static_cast<std::size_t>(it - k_.begin());
}

ModeSet build_mode_set(int k_max, Truncation truncation) {
  if (k_max < 1) throw ConfigError("k_max must be at least 1");
  ModeSet set;
  set.k_max_ = k_max;
  for (int ky = -k_max; ky <= k_max; ++ky) {
    for (int kx = -k_max; kx <= k_max; ++kx) {
      if (kx == 0 && ky == 0) continue;
      if (truncation == Truncation::Euclidean && kx * kx + ky * ky > k_max * k_max) continue;
      set.k_.push_back({kx, ky});
    }
  }
  const std::size_t n = set.k_.size();
  set.partner_.resize(n);
  set.eigenvectors_.resize(n);
  set.rep_slot_.assign(n, -1);
  for (std::size_t m = 0; m < n; ++m) {
    const auto [kx, ky] = set.k_[m];
    set.partner_[m] = set.find({-kx, -ky});
    const double norm = set.k_[m].norm();
    set.eigenvectors_[m] = {Complex(0.0, ky / norm), Complex(0.0, -kx / norm)};
    if (ky > 0 || (ky == 0 && kx > 0)) {
      set.rep_slot_[m] = static_cast<long>(set.representatives_.size());
      set.representatives_.push_back(m);
    }
  }
  return set;
}

ModeState zero_state(const ModeSet& modes) { return {std::vector<Complex>(modes.size()), 0.0}; }

void enforce_conjugate_symmetry(const ModeSet& modes, ModeState& state) {
  for (std::size_t m : modes.representatives()) state.coeffs[modes.partner(m)] = std::conj(state.coeffs[m]);
}

double conjugate_symmetry_defect(const ModeSet& modes, const ModeState& state) {
  double worst = 0.0;
  for (std::size_t m = 0; m < modes.size(); ++m)
    worst = std::max(worst, std::abs(state.coeffs[modes.partner(m)] - std::conj(state.coeffs[m])));
  return worst;
}

OuPropagator make_propagator(const ModeParams& params, double dt) {
  params.validate();
  const Complex rate(-params.damping, params.phase_speed);
  const Complex decay = std::exp(rate * dt);
  // f/(d - i phi) = -f/rate is the stationary mean.
  const Complex shift = -params.forcing / rate * (1.0 - decay);
  const double var = -std::expm1(-2.0 * params.damping * dt) / (2.0 * params.damping);
  return {decay, shift, params.noise * std::sqrt(var)};
}

std::vector<OuPropagator> make_propagators(std::span<const ModeParams> params, double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  std::vector<OuPropagator> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(make_propagator(p, dt));
  return out;
}

void advance_modes(const ModeSet& modes, std::span<const OuPropagator> propagators, double dt,
                   std::span<const Complex> noise, ModeState& state) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  const auto& reps = modes.representatives();
  for (std::size_t p = 0; p < reps.size(); ++p) {
    const std::size_t m = reps[p];
    const OuPropagator& op = propagators[m];
    Complex& c = state.coeffs[m];
    c = op.decay * c + op.forced_shift + op.noise_scale * noise[p];
    state.coeffs[modes.partner(m)] = std::conj(c);
  }
  state.time += dt;
}

ModeState step_modes(const ModeSet& modes, const ModeState& state,
                     std::span<const ModeParams> params, double dt,
                     std::span<const Complex> noise) {
  if (params.size() != modes.size()) throw ConfigError("one ModeParams entry per mode required");
  if (noise.size() != modes.pair_count()) throw ConfigError("one noise draw per conjugate pair required");
  const auto props = make_propagators(params, dt);
  ModeState next = state;
  advance_modes(modes, props, dt, noise, next);
  return next;
}

void draw_mode_noise(Rng& rng, std::span<Complex> noise) {
  for (auto& z : noise) z = complex_normal(rng);
}

ModeState sample_stationary(const ModeSet& modes, std::span<const ModeParams> params, Rng& rng) {
  ModeState state = zero_state(modes);
  for (std::size_t m : modes.representatives()) {
    const ModeParams& p = params[m];
    p.validate();
    const Complex mean = p.forcing / Complex(p.damping, -p.phase_speed);
    const double sd = p.noise / std::sqrt(2.0 * p.damping);
    state.coeffs[m] = mean + sd * complex_normal(rng);
  }
  enforce_conjugate_symmetry(modes, state);
  return state;
}

std::vector<Vec2> eval_velocity(const ModeSet& modes, const ModeState& state,
                                std::span<const Vec2> points) {
  std::vector<Vec2> out;
  out.reserve(points.size());
  const double scale = coefficient_scale(state);
  double max_imag = 0.0;
  for (const Vec2& p : points) {
    Complex u(0.0, 0.0), v(0.0, 0.0);
    for (std::size_t m = 0; m < modes.size(); ++m) {
      const auto k = modes.wavevector(m);
      const Complex phase = std::polar(1.0, k.kx * p.x() + k.ky * p.y());
      const Complex a = state.coeffs[m] * phase;
      u += a * modes.eigenvector(m)[0];
      v += a * modes.eigenvector(m)[1];
    }
    max_imag = std::max({max_imag, std::abs(u.imag()), std::abs(v.imag())});
    out.emplace_back(u.real(), v.real());
  }
  check_real(max_imag, scale);
  return out;
}

PointEvaluator::PointEvaluator(const ModeSet& modes) : k_max_(modes.k_max()) {
  for (std::size_t m : modes.representatives()) {
    const auto k = modes.wavevector(m);
    const double norm = k.norm();
    terms_.push_back({m, k.kx, k.ky, Vec2(-2.0 * k.ky / norm, 2.0 * k.kx / norm)});
  }
}

Vec2 PointEvaluator::operator()(std::span<const Complex> coeffs, const Vec2& x) const {
  // Powers exp(i k x) for k in [-k_max, k_max] and exp(i k y) for k in
  // [0, k_max], as separate real and imaginary parts. Plain arrays stay
  // uninitialised, unlike std::complex buffers.
  constexpr int kStack = 64;
  double stack[2 * (3 * kStack + 2)];
  std::vector<double> heap;
  double* buf = stack;
  if (k_max_ > kStack) {
    heap.resize(2 * (3 * static_cast<std::size_t>(k_max_) + 2));
    buf = heap.data();
  }
  const int kx_count = 2 * k_max_ + 1;
  double* xr = buf + k_max_;
  double* xi = buf + kx_count + k_max_;
  double* yr = buf + 2 * kx_count;
  double* yi = yr + k_max_ + 1;
  const double cx = std::cos(x.x()), sx = std::sin(x.x());
  const double cy = std::cos(x.y()), sy = std::sin(x.y());
  xr[0] = 1.0, xi[0] = 0.0, yr[0] = 1.0, yi[0] = 0.0;
  for (int k = 1; k <= k_max_; ++k) {
    xr[k] = xr[k - 1] * cx - xi[k - 1] * sx;
    xi[k] = xr[k - 1] * sx + xi[k - 1] * cx;
    xr[-k] = xr[k], xi[-k] = -xi[k];
    yr[k] = yr[k - 1] * cy - yi[k - 1] * sy;
    yi[k] = yr[k - 1] * sy + yi[k - 1] * cy;
  }
  // Only Im(c e^{i k.x}) is needed.
  double ux = 0.0, uy = 0.0;
  for (const Term& t : terms_) {
    const double ar = xr[t.kx], ai = xi[t.kx], br = yr[t.ky], bi = yi[t.ky];
    const double re = ar * br - ai * bi;
    const double im = ar * bi + ai * br;
    const Complex c = coeffs[t.mode];
    const double s = c.real() * im + c.imag() * re;
    ux += s * t.direction.x();
    uy += s * t.direction.y();
  }
  return {ux, uy};
}

FieldGrid eval_velocity_grid(const ModeSet& modes, const ModeState& state, int n) {
  FieldGrid grid(n, state.time);
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  std::vector<fftw_complex> buf(2 * nn);
  std::fill(reinterpret_cast<double*>(buf.data()), reinterpret_cast<double*>(buf.data() + 2 * nn), 0.0);
  auto bin = [n](int k) { return ((k % n) + n) % n; };
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const auto k = modes.wavevector(m);
    const std::size_t idx = static_cast<std::size_t>(bin(k.ky)) * n + bin(k.kx);
    for (int c = 0; c < 2; ++c) {
      const Complex a = state.coeffs[m] * modes.eigenvector(m)[c];
      buf[c * nn + idx][0] += a.real();
      buf[c * nn + idx][1] += a.imag();
    }
  }
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    const int dims[2] = {n, n};
    plan = fftw_plan_many_dft(2, dims, 2, buf.data(), nullptr, 1, static_cast<int>(nn), buf.data(),
                              nullptr, 1, static_cast<int>(nn), FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  double max_imag = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::size_t idx = static_cast<std::size_t>(j) * n + i;
      for (int c = 0; c < 2; ++c) {
        grid.at(i, j, c) = buf[c * nn + idx][0];
        max_imag = std::max(max_imag, std::abs(buf[c * nn + idx][1]));
      }
    }
  }
  check_real(max_imag, coefficient_scale(state));
  return grid;
}

FieldGrid eval_velocity_grid_direct(const ModeSet& modes, const ModeState& state, int n) {
  FieldGrid grid(n, state.time);
  std::vector<Vec2> nodes;
  nodes.reserve(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) nodes.push_back(grid.node(i, j));
  const auto values = eval_velocity(modes, state, nodes);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) grid.set_velocity(i, j, values[static_cast<std::size_t>(j) * n + i]);
  return grid;
}

} // namespace floeda

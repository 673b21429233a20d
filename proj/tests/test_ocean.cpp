#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"

#include "floeda/errors.hpp"
#include "floeda/ocean_spectral.hpp"

using namespace floeda;

namespace {

ModeState random_state(const ModeSet& modes, std::uint64_t seed) {
  Rng rng(seed);
  ModeState s = zero_state(modes);
  for (std::size_t m : modes.representatives()) s.coeffs[m] = complex_normal(rng);
  enforce_conjugate_symmetry(modes, s);
  return s;
}

ModeState single_pair(const ModeSet& modes, Wavevector k, Complex c) {
  ModeState s = zero_state(modes);
  const std::size_t m = modes.find(k);
  s.coeffs[m] = c;
  s.coeffs[modes.partner(m)] = std::conj(c);
  return s;
}

std::vector<ModeParams> uniform_params(const ModeSet& modes, ModeParams p) { return std::vector<ModeParams>(modes.size(), p); }

} // namespace

TEST_CASE("mode set enumeration") {
  const ModeSet m1 = build_mode_set(1);
  CHECK(m1.size() == 8);
  CHECK(m1.pair_count() == 4);
  CHECK(build_mode_set(9).size() == 360);
  CHECK(build_mode_set(3).size() == 48);
  CHECK_THROWS_AS(build_mode_set(0), ConfigError);

  for (int kmax : {1, 2, 5}) {
    const ModeSet ms = build_mode_set(kmax);
    CHECK(ms.size() == static_cast<std::size_t>((2 * kmax + 1) * (2 * kmax + 1) - 1));
    for (std::size_t m = 0; m < ms.size(); ++m) {
      const auto k = ms.wavevector(m);
      const auto p = ms.partner(m);
      CHECK(ms.wavevector(p) == Wavevector{-k.kx, -k.ky});
      CHECK(ms.partner(p) == m);
      CHECK(ms.is_representative(m) != ms.is_representative(p));
      CHECK(std::max(std::abs(k.kx), std::abs(k.ky)) <= kmax);
      CHECK_FALSE((k.kx == 0 && k.ky == 0));
    }
  }
}

TEST_CASE("euclidean truncation keeps the disc") {
  const ModeSet ms = build_mode_set(3, Truncation::Euclidean);
  std::size_t expected = 0;
  for (int kx = -3; kx <= 3; ++kx)
    for (int ky = -3; ky <= 3; ++ky)
      if ((kx || ky) && kx * kx + ky * ky <= 9) ++expected;
  CHECK(ms.size() == expected);
}

TEST_CASE("eigenvectors are divergence-free unit vectors") {
  const ModeSet ms = build_mode_set(4);
  const std::size_t m = ms.find({1, 0});
  const auto e = ms.eigenvector(m);
  CHECK(std::abs(e[0]) < 1e-15);
  CHECK(std::abs(e[1] - Complex(0.0, -1.0)) < 1e-15);
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const auto k = ms.wavevector(i);
    const auto v = ms.eigenvector(i);
    CHECK(std::abs(std::norm(v[0]) + std::norm(v[1]) - 1.0) < 1e-14);
    CHECK(std::abs(static_cast<double>(k.kx) * v[0] + static_cast<double>(k.ky) * v[1]) < 1e-14);
  }
}

TEST_CASE("deterministic decay") {
  const ModeSet ms = build_mode_set(1);
  ModeParams p;
  p.damping = 0.5;
  p.noise = 0.0;
  const auto params = uniform_params(ms, p);
  ModeState s = zero_state(ms);
  for (auto& c : s.coeffs) c = 1.0;
  const std::vector<Complex> noise(ms.pair_count(), Complex(0.3, -0.2));
  const ModeState next = step_modes(ms, s, params, 1.0, noise);
  for (auto c : next.coeffs) CHECK(std::abs(c - std::exp(-0.5)) < 1e-12);

  const ModeState zero = step_modes(ms, zero_state(ms), params, 1.0, noise);
  for (auto c : zero.coeffs) CHECK(c == Complex(0.0, 0.0));
  CHECK_THROWS_AS(step_modes(ms, s, params, 0.0, noise), ConfigError);
  CHECK_THROWS_AS(step_modes(ms, s, params, -1e-3, noise), ConfigError);
}

TEST_CASE("sigma = 0 matches the analytic forced solution") {
  const ModeSet ms = build_mode_set(2);
  ModeParams p{0.5, 1.7, Complex(0.3, -0.8), 0.0};
  const auto params = uniform_params(ms, p);
  const Complex lambda(-p.damping, p.phase_speed);
  for (double dt : {1e-3, 1e-2, 1.0}) {
    ModeState s = random_state(ms, 11);
    const ModeState s0 = s;
    const int steps = static_cast<int>(std::lround(1.0 / dt));
    const std::vector<Complex> noise(ms.pair_count());
    const auto props = make_propagators(params, dt);
    for (int i = 0; i < steps; ++i) advance_modes(ms, props, dt, noise, s);
    const double t = steps * dt;
    for (std::size_t m : ms.representatives()) {
      const Complex exact = std::exp(lambda * t) * s0.coeffs[m] + p.forcing / (-lambda) * (1.0 - std::exp(lambda * t));
      CHECK(std::abs(s.coeffs[m] - exact) <= 1e-12 * std::abs(exact));
    }
  }
}

TEST_CASE("conjugate symmetry is preserved for any parameters") {
  const ModeSet ms = build_mode_set(3);
  Rng rng(5);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ModeParams> params(ms.size());
    for (auto& p : params) p = {u(rng), u(rng) - 1.0, Complex(u(rng), -u(rng)), u(rng)};
    // Partners must share parameters up to conjugation of the forcing.
    for (std::size_t m : ms.representatives()) {
      params[ms.partner(m)] = params[m];
      params[ms.partner(m)].phase_speed = -params[m].phase_speed;
      params[ms.partner(m)].forcing = std::conj(params[m].forcing);
    }
    ModeState s = random_state(ms, 100 + trial);
    std::vector<Complex> noise(ms.pair_count());
    for (double dt : {1e-3, 0.1, 3.0}) {
      draw_mode_noise(rng, noise);
      s = step_modes(ms, s, params, dt, noise);
      CHECK(conjugate_symmetry_defect(ms, s) < 1e-12);
    }
  }
}

TEST_CASE("stationary variance of the OU update") {
  // AR(1) chain with lag-one correlation rho = exp(-d dt); the variance of the
  // sample variance is 2 v^2 (1 + rho^2) / ((1 - rho^2) n).
  const ModeSet ms = build_mode_set(1);
  ModeParams p{0.5, 0.0, Complex(0.0, 0.0), 0.05};
  const auto params = uniform_params(ms, p);
  const double dt = 1.0;
  const auto props = make_propagators(params, dt);
  Rng rng(2024);
  ModeState s = sample_stationary(ms, params, rng);
  std::vector<Complex> noise(ms.pair_count());
  const std::size_t n = 100000;
  const std::size_t m0 = ms.representatives().front();
  double sum = 0.0, sum2 = 0.0, sum_abs2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    draw_mode_noise(rng, noise);
    advance_modes(ms, props, dt, noise, s);
    const double re = s.coeffs[m0].real();
    sum += re;
    sum2 += re * re;
    sum_abs2 += std::norm(s.coeffs[m0]);
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  const double expected = 0.05 * 0.05 / (2 * 0.5) / 2;
  CHECK(expected == doctest::Approx(1.25e-3));
  const double rho = std::exp(-0.5 * dt);
  const double se = expected * std::sqrt(2.0 * (1 + rho * rho) / ((1 - rho * rho) * n));
  CHECK(std::abs(var - expected) < 3 * se);
  CHECK(std::abs(var - expected) < 0.1 * expected);
  const double second = sum_abs2 / n;
  CHECK(std::abs(second - 2 * expected) < 3 * 2 * se);
}

TEST_CASE("zero state gives zero velocity") {
  const ModeSet ms = build_mode_set(3);
  const std::vector<Vec2> pts = {Vec2(0.1, 0.2), Vec2(3.0, 6.0)};
  for (const Vec2& u : eval_velocity(ms, zero_state(ms), pts)) CHECK(u.norm() == 0.0);
  const FieldGrid g = eval_velocity_grid(ms, zero_state(ms), 16);
  CHECK(g.n() == 16);
  CHECK(g.data().size() == 16u * 16u * 2u);
  for (double v : g.data()) CHECK(v == 0.0);
}

TEST_CASE("single pair closed form") {
  const ModeSet ms = build_mode_set(3);
  const double c = 0.7;
  const ModeState s = single_pair(ms, {1, 0}, c);
  const PointEvaluator fast(ms);
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  std::vector<Vec2> pts;
  for (int i = 0; i < 50; ++i) {
    const double px = u(rng), py = u(rng);
    pts.emplace_back(px, py);
  }
  const auto vel = eval_velocity(ms, s, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2 exact(0.0, 2 * c * std::sin(pts[i].x()));
    CHECK((vel[i] - exact).norm() < 1e-13);
    CHECK((fast(s.coeffs, pts[i]) - exact).norm() < 1e-13);
  }
  const FieldGrid g = eval_velocity_grid(ms, s, 64);
  double err = 0.0;
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i) err = std::max(err, (g.velocity(i, j) - Vec2(0.0, 2 * c * std::sin(g.node(i, j).x()))).norm());
  CHECK(err < 1e-10);
}

TEST_CASE("periodicity and real-valuedness") {
  const ModeSet ms = build_mode_set(4);
  const ModeState s = random_state(ms, 9);
  const std::vector<Vec2> a = {Vec2(0.3, 1.1)};
  const std::vector<Vec2> b = {Vec2(0.3 + kTwoPi, 1.1)};
  const std::vector<Vec2> c = {Vec2(0.3, 1.1 - kTwoPi)};
  CHECK((eval_velocity(ms, s, a)[0] - eval_velocity(ms, s, b)[0]).norm() < 1e-12);
  CHECK((eval_velocity(ms, s, a)[0] - eval_velocity(ms, s, c)[0]).norm() < 1e-12);

  ModeState broken = s;
  broken.coeffs[ms.partner(ms.representatives().front())] += Complex(0.0, 0.5);
  CHECK_THROWS_AS(eval_velocity(ms, broken, a), NumericalError);
}

TEST_CASE("FFT grid agrees with direct summation") {
  for (int kmax : {1, 3, 9}) {
    const ModeSet ms = build_mode_set(kmax);
    const ModeState s = random_state(ms, 40 + kmax);
    for (int n : {2, 17, 32, 64}) {
      const FieldGrid fft = eval_velocity_grid(ms, s, n);
      const FieldGrid direct = eval_velocity_grid_direct(ms, s, n);
      double err = 0.0;
      for (std::size_t i = 0; i < fft.data().size(); ++i) err = std::max(err, std::abs(fft.data()[i] - direct.data()[i]));
      CHECK(err < 1e-8);
    }
  }
  const ModeSet ms = build_mode_set(2);
  CHECK_THROWS_AS(eval_velocity_grid(ms, zero_state(ms), 1), ConfigError);
}

TEST_CASE("point evaluator matches the reference sum") {
  const ModeSet ms = build_mode_set(9);
  const ModeState s = random_state(ms, 77);
  const PointEvaluator fast(ms);
  Rng rng(1);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  std::vector<Vec2> pts;
  for (int i = 0; i < 100; ++i) {
    const double px = u(rng), py = u(rng);
    pts.emplace_back(px, py);
  }
  const auto ref = eval_velocity(ms, s, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK((fast(s.coeffs, pts[i]) - ref[i]).norm() < 1e-10);
}

TEST_CASE("grid field is spectrally divergence-free") {
  // Independent forward DFT of the sampled field, then i (kx u^ + ky v^).
  const int n = 16;
  const ModeSet ms = build_mode_set(3);
  const ModeState s = random_state(ms, 8);
  const FieldGrid g = eval_velocity_grid(ms, s, n);
  double max_div = 0.0;
  for (int ky = -n / 2 + 1; ky < n / 2; ++ky) {
    for (int kx = -n / 2 + 1; kx < n / 2; ++kx) {
      Complex uh = 0.0, vh = 0.0;
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          const Complex ph = std::polar(1.0, -kTwoPi * (kx * i + ky * j) / n);
          uh += g.at(i, j, 0) * ph;
          vh += g.at(i, j, 1) * ph;
        }
      }
      const Complex div = Complex(0.0, 1.0) * (static_cast<double>(kx) * uh + static_cast<double>(ky) * vh) / double(n * n);
      max_div = std::max(max_div, std::abs(div));
    }
  }
  CHECK(max_div < 1e-10);
}

TEST_CASE("stationary sampling") {
  const ModeSet ms = build_mode_set(2);
  ModeParams p{0.5, 0.3, Complex(0.02, 0.01), 0.05};
  const auto params = uniform_params(ms, p);
  Rng rng(12);
  const std::size_t draws = 20000;
  Complex mean = 0.0;
  double second = 0.0;
  const std::size_t m0 = ms.representatives().front();
  for (std::size_t i = 0; i < draws; ++i) {
    const ModeState s = sample_stationary(ms, params, rng);
    CHECK(conjugate_symmetry_defect(ms, s) == 0.0);
    mean += s.coeffs[m0];
    second += std::norm(s.coeffs[m0] - p.forcing / Complex(p.damping, -p.phase_speed));
  }
  mean /= static_cast<double>(draws);
  const Complex expected_mean = p.forcing / Complex(p.damping, -p.phase_speed);
  const double var = p.noise * p.noise / (2 * p.damping);
  CHECK(std::abs(mean - expected_mean) < 4 * std::sqrt(var / draws));
  CHECK(second / draws == doctest::Approx(var).epsilon(0.05));
}

TEST_CASE("parameter validation") {
  ModeParams p;
  p.damping = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.damping = 0.5;
  p.noise = -1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

#pragma once

// Plain single-domain ensemble filter used as an independent oracle for the
// 1x1 pipeline. It shares only the physics primitives with the library; the
// member bookkeeping, the square-root transform and the grid reconstruction
// are written out here.

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "floeda/experiment.hpp"
#include "floeda/rng.hpp"

namespace reference {

using namespace floeda;

struct Member {
  std::vector<Floe> floes;
  ModeState modes;
  Rng forecast_rng;
};

inline double circular_mean(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += wrap_difference(x - v.front());
  return wrap_coordinate(v.front() + acc / static_cast<double>(v.size()));
}

/// Fields of the ensemble-mean ocean at every output step.
inline std::vector<FieldGrid> run_single_filter(const ModelSetup& setup, const ObservationSet& obs, std::uint64_t seed) {
  const RunConfig& cfg = setup.config;
  const ModeSet& ms = setup.modes;
  const auto& ids = obs.epochs.at(0).per_subdomain.at(0);
  const std::size_t nf = ids.size();
  const int ne = cfg.ensemble_size;
  const PointEvaluator eval(ms);
  const auto props = make_propagators(setup.params, cfg.dt);

  auto observed = [&](int step) {
    std::vector<Vec2> y(nf);
    for (std::size_t f = 0; f < nf; ++f)
      for (const auto& r : obs.records)
        if (r.step == step && r.floe == ids[f]) y[f] = r.position;
    return y;
  };

  std::vector<Member> members;
  const std::vector<Vec2> y0 = observed(0);
  for (int i = 0; i < ne; ++i) {
    Rng init = make_rng(seed, Stream::EnsembleInit, 0, static_cast<std::uint64_t>(i));
    Member m{{}, sample_stationary(ms, setup.params, init),
             make_rng(seed, Stream::EnsembleForecast, 0, static_cast<std::uint64_t>(i))};
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t f = 0; f < nf; ++f) {
      Floe fl = setup.floes[ids[f]];
      const double px = normal(init), py = normal(init);
      fl.x = wrap_point(y0[f] + cfg.obs_noise * Vec2(px, py));
      const double vx = normal(init), vy = normal(init);
      fl.v = eval(m.modes.coeffs, fl.x) + cfg.velocity_spread * Vec2(vx, vy);
      m.floes.push_back(fl);
    }
    members.push_back(std::move(m));
  }

  const auto reps = ms.representatives();
  auto mean_field = [&]() {
    ModeState mean = zero_state(ms);
    for (std::size_t r : reps) {
      double re = 0.0, im = 0.0;
      for (const auto& m : members) re += m.modes.coeffs[r].real();
      for (const auto& m : members) im += m.modes.coeffs[r].imag();
      mean.coeffs[r] = Complex(re / ne, im / ne);
    }
    enforce_conjugate_symmetry(ms, mean);
    return eval_velocity_grid(ms, mean, cfg.grid_n);
  };

  // State rows: x, y, vx, vy per floe, then Re/Im per representative.
  const Eigen::Index dim = static_cast<Eigen::Index>(4 * nf + 2 * reps.size());
  auto state_value = [&](const Member& m, Eigen::Index row) -> double {
    const auto f = static_cast<std::size_t>(row / 4);
    if (f < nf) {
      const int c = static_cast<int>(row % 4);
      return c < 2 ? m.floes[f].x[c] : m.floes[f].v[c - 2];
    }
    const auto k = static_cast<std::size_t>(row - 4 * static_cast<Eigen::Index>(nf));
    const Complex z = m.modes.coeffs[reps[k / 2]];
    return k % 2 == 0 ? z.real() : z.imag();
  };

  std::vector<FieldGrid> fields;
  const auto steps = output_steps(cfg);
  std::size_t next = 0;
  if (steps[next] == 0) {
    fields.push_back(mean_field());
    ++next;
  }
  std::vector<Complex> noise(reps.size());
  for (int k = 1; k <= cfg.obs_steps(); ++k) {
    for (auto& m : members) {
      const auto ocean = [&](const Vec2& x) { return eval(m.modes.coeffs, x); };
      for (int s = 0; s < cfg.substeps(); ++s) {
        for (auto& f : m.floes) advance_floe(f, ocean, cfg.dt, cfg.integrator);
        draw_mode_noise(m.forecast_rng, noise);
        advance_modes(ms, props, cfg.dt, noise, m.modes);
      }
    }

    // Mean and anomalies (positions on the circle).
    Eigen::MatrixXd x(dim, ne);
    for (int i = 0; i < ne; ++i)
      for (Eigen::Index r = 0; r < dim; ++r) x(r, i) = state_value(members[static_cast<std::size_t>(i)], r);
    Eigen::VectorXd mean = x.rowwise().mean();
    Eigen::MatrixXd a = x.colwise() - mean;
    for (std::size_t f = 0; f < nf; ++f) {
      for (int c = 0; c < 2; ++c) {
        const Eigen::Index r = static_cast<Eigen::Index>(4 * f) + c;
        std::vector<double> v;
        for (int i = 0; i < ne; ++i) v.push_back(x(r, i));
        mean[r] = circular_mean(v);
        for (int i = 0; i < ne; ++i) a(r, i) = wrap_difference(x(r, i) - mean[r]);
      }
    }
    a *= std::sqrt(cfg.inflation);

    // Ensemble-space solve through A = (N - 1) I + Y'^T R^-1 Y'.
    const std::vector<Vec2> y = observed(k);
    const Eigen::Index p = static_cast<Eigen::Index>(2 * nf);
    Eigen::MatrixXd yp(p, ne);
    Eigen::VectorXd d(p);
    for (std::size_t f = 0; f < nf; ++f)
      for (int c = 0; c < 2; ++c) {
        const Eigen::Index o = static_cast<Eigen::Index>(2 * f) + c, r = static_cast<Eigen::Index>(4 * f) + c;
        yp.row(o) = a.row(r);
        d[o] = wrap_difference(y[f][c] - mean[r]);
      }
    const double rinv = 1.0 / (cfg.obs_noise * cfg.obs_noise);
    const Eigen::MatrixXd big = (ne - 1.0) * Eigen::MatrixXd::Identity(ne, ne) + rinv * yp.transpose() * yp;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(big);
    const Eigen::MatrixXd& q = eig.eigenvectors();
    const Eigen::VectorXd lam = eig.eigenvalues();
    const Eigen::MatrixXd t = std::sqrt(ne - 1.0) * q * lam.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();
    const Eigen::VectorXd w = q * lam.cwiseInverse().asDiagonal() * q.transpose() * (rinv * yp.transpose() * d);
    const Eigen::MatrixXd xa = (a * (t.colwise() + w)).colwise() + mean;

    for (int i = 0; i < ne; ++i) {
      Member& m = members[static_cast<std::size_t>(i)];
      for (std::size_t f = 0; f < nf; ++f) {
        const Eigen::Index r = static_cast<Eigen::Index>(4 * f);
        m.floes[f].x = wrap_point(Vec2(xa(r, i), xa(r + 1, i)));
        m.floes[f].v = Vec2(xa(r + 2, i), xa(r + 3, i));
      }
      for (std::size_t j = 0; j < reps.size(); ++j) {
        const Eigen::Index r = static_cast<Eigen::Index>(4 * nf + 2 * j);
        m.modes.coeffs[reps[j]] = Complex(xa(r, i), xa(r + 1, i));
      }
      enforce_conjugate_symmetry(ms, m.modes);
    }
    if (next < steps.size() && steps[next] == k) {
      fields.push_back(mean_field());
      ++next;
    }
  }
  return fields;
}

} // namespace reference

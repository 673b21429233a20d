#include "floeda/etkf.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "floeda/errors.hpp"
#include "floeda/parallel.hpp"
#include "floeda/torus.hpp"

namespace floeda {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<Index> AugmentedLayout::periodic_components() const {
  std::vector<Index> out;
  out.reserve(2 * floe_count);
  for (std::size_t f = 0; f < floe_count; ++f) {
    out.push_back(position(f, 0));
    out.push_back(position(f, 1));
  }
  return out;
}

VectorXd pack(const AugmentedLayout& layout, const ModeSet& modes, std::span<const Floe> floes,
              const ModeState& state) {
  if (floes.size() != layout.floe_count || modes.pair_count() != layout.pair_count ||
      state.coeffs.size() != modes.size())
    throw ConfigError("pack: dimensions do not match the augmented layout");
  VectorXd x(layout.dim());
  for (std::size_t f = 0; f < floes.size(); ++f) {
    x.segment<2>(layout.position(f, 0)) = floes[f].x;
    x.segment<2>(layout.velocity(f, 0)) = floes[f].v;
  }
  const auto& reps = modes.representatives();
  for (std::size_t p = 0; p < reps.size(); ++p) {
    x[layout.mode_real(p)] = state.coeffs[reps[p]].real();
    x[layout.mode_imag(p)] = state.coeffs[reps[p]].imag();
  }
  return x;
}

void unpack_into(const AugmentedLayout& layout, const ModeSet& modes, const Eigen::Ref<const VectorXd>& x,
                 std::span<Floe> floes, ModeState& state) {
  if (x.size() != layout.dim() || floes.size() != layout.floe_count || modes.pair_count() != layout.pair_count)
    throw ConfigError("unpack: dimensions do not match the augmented layout");
  for (std::size_t f = 0; f < floes.size(); ++f) {
    floes[f].x = x.segment<2>(layout.position(f, 0));
    floes[f].v = x.segment<2>(layout.velocity(f, 0));
  }
  state.coeffs.resize(modes.size());
  const auto& reps = modes.representatives();
  for (std::size_t p = 0; p < reps.size(); ++p) {
    const Complex c(x[layout.mode_real(p)], x[layout.mode_imag(p)]);
    state.coeffs[reps[p]] = c;
    state.coeffs[modes.partner(reps[p])] = std::conj(c);
  }
}

std::pair<std::vector<Floe>, ModeState> unpack(const AugmentedLayout& layout, const ModeSet& modes,
                                               const Eigen::Ref<const VectorXd>& x,
                                               std::vector<Floe> floe_template) {
  ModeState state;
  unpack_into(layout, modes, x, floe_template, state);
  return {std::move(floe_template), std::move(state)};
}

ObsModel ObsModel::floe_positions(const AugmentedLayout& layout, double sigma_obs) {
  if (!(sigma_obs > 0.0)) throw ConfigError("observation noise must be positive for assimilation");
  ObsModel obs;
  obs.components = layout.periodic_components();
  obs.variance = VectorXd::Constant(static_cast<Index>(obs.components.size()), sigma_obs * sigma_obs);
  obs.periodic = true;
  return obs;
}

VectorXd ensemble_mean(const Ensemble& ensemble) {
  VectorXd mean = ensemble.members.rowwise().mean();
  const Index n = ensemble.size();
  for (Index c : ensemble.periodic) {
    const double ref = ensemble.members(c, 0);
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) acc += wrap_difference(ensemble.members(c, i) - ref);
    mean[c] = wrap_coordinate(ref + acc / static_cast<double>(n));
  }
  return mean;
}

MatrixXd ensemble_anomalies(const Ensemble& ensemble, const VectorXd& mean) {
  MatrixXd a = ensemble.members.colwise() - mean;
  for (Index c : ensemble.periodic)
    for (Index i = 0; i < a.cols(); ++i) a(c, i) = wrap_difference(a(c, i));
  return a;
}

double ensemble_spread(const Ensemble& ensemble) {
  const MatrixXd a = ensemble_anomalies(ensemble, ensemble_mean(ensemble));
  return a.squaredNorm() / static_cast<double>(ensemble.size() - 1);
}

EtkfTransform etkf_transform(const MatrixXd& obs_anomalies, const VectorXd& innovation, const VectorXd& variance) {
  const Index n = obs_anomalies.cols();
  const double scale = 1.0 / static_cast<double>(n - 1);
  const VectorXd inv_sd = variance.cwiseSqrt().cwiseInverse();
  const MatrixXd yw = inv_sd.asDiagonal() * obs_anomalies;

  EtkfTransform out;
  out.s = MatrixXd::Zero(n, n);
  out.s.selfadjointView<Eigen::Lower>().rankUpdate(yw.transpose(), scale);
  out.s.triangularView<Eigen::StrictlyUpper>() = out.s.transpose();

  const VectorXd b = scale * (yw.transpose() * inv_sd.cwiseProduct(innovation));

  const Index p = obs_anomalies.rows();
  if (p < n) {
    // S has rank <= p: diagonalise the p x p Gram matrix instead and apply
    // (I + S)^-1/2 = I + U ((1 + L)^-1/2 - 1) U^T on its column space.
    const MatrixXd gram = scale * (yw * yw.transpose());
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) throw NumericalError("ETKF eigendecomposition failed");
    const VectorXd& lambda = eig.eigenvalues();
    const double cutoff = 1e-14 * std::max(1.0, lambda.maxCoeff());
    out.t = MatrixXd::Identity(n, n);
    out.w_mean = b;
    for (Index k = 0; k < p; ++k) {
      if (lambda[k] <= cutoff) continue;
      const VectorXd u = std::sqrt(scale / lambda[k]) * (yw.transpose() * eig.eigenvectors().col(k));
      out.t.noalias() += (1.0 / std::sqrt(1.0 + lambda[k]) - 1.0) * (u * u.transpose());
      out.w_mean -= (lambda[k] / (1.0 + lambda[k]) * u.dot(b)) * u;
    }
    return out;
  }

  const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(out.s);
  if (eig.info() != Eigen::Success) throw NumericalError("ETKF eigendecomposition failed");
  // S is positive semi-definite; clip round-off below zero.
  const VectorXd lambda = eig.eigenvalues().cwiseMax(0.0);
  const MatrixXd& q = eig.eigenvectors();
  const VectorXd inv_sqrt = (lambda.array() + 1.0).rsqrt().matrix();
  const VectorXd inv = (lambda.array() + 1.0).inverse().matrix();

  out.t = q * inv_sqrt.asDiagonal() * q.transpose();
  out.w_mean = q * (inv.asDiagonal() * (q.transpose() * b));
  return out;
}

Ensemble etkf_analysis(const Ensemble& ensemble, const VectorXd& y, const ObsModel& obs, double inflation,
                       AnalysisDiagnostics* diagnostics) {
  const Index n = ensemble.size();
  const Index p = static_cast<Index>(obs.components.size());
  if (n < 2) throw ConfigError("ETKF needs at least two ensemble members");
  if (!(inflation >= 1.0)) throw ConfigError("inflation must be >= 1");
  if (y.size() != p || obs.variance.size() != p) throw ConfigError("observation vector does not match ObsModel");
  if (!ensemble.members.allFinite() || !y.allFinite()) throw NumericalError("non-finite input to ETKF analysis");
  if ((obs.variance.array() <= 0.0).any()) throw ConfigError("observation variances must be positive");

  const VectorXd mean = ensemble_mean(ensemble);
  MatrixXd anomalies = ensemble_anomalies(ensemble, mean);
  if (diagnostics) diagnostics->spread_before = anomalies.squaredNorm() / static_cast<double>(n - 1);
  if (inflation != 1.0) anomalies *= std::sqrt(inflation);

  MatrixXd obs_anomalies(p, n);
  VectorXd innovation(p);
  for (Index r = 0; r < p; ++r) {
    const Index c = obs.components[static_cast<std::size_t>(r)];
    obs_anomalies.row(r) = anomalies.row(c);
    innovation[r] = obs.periodic ? wrap_difference(y[r] - mean[c]) : y[r] - mean[c];
  }

  const EtkfTransform tr = etkf_transform(obs_anomalies, innovation, obs.variance);
  MatrixXd weights = tr.t;
  weights.colwise() += tr.w_mean;

  Ensemble out;
  out.periodic = ensemble.periodic;
  out.members.noalias() = anomalies * weights;
  out.members.colwise() += mean;
  for (Index c : out.periodic)
    for (Index i = 0; i < n; ++i) out.members(c, i) = wrap_coordinate(out.members(c, i));
  if (!out.members.allFinite()) throw NumericalError("ETKF analysis produced non-finite members");

  if (diagnostics) {
    diagnostics->innovation_rms = p > 0 ? std::sqrt(innovation.squaredNorm() / static_cast<double>(p)) : 0.0;
    diagnostics->spread_after = ensemble_spread(out);
  }
  return out;
}

Ensemble forecast(const Ensemble& ensemble, const ForecastModel& model, double dt_obs, int substeps,
                  std::span<Rng> member_rngs, std::size_t workers) {
  if (substeps < 1 || !(model.dt > 0.0) ||
      std::abs(substeps * model.dt - dt_obs) > 1e-9 * std::max(1.0, std::abs(dt_obs)))
    throw ConfigError("forecast: dt_obs must equal substeps * dt");
  if (static_cast<Index>(member_rngs.size()) != ensemble.size())
    throw ConfigError("forecast: one random stream per member required");
  if (ensemble.dim() != model.layout.dim()) throw ConfigError("forecast: ensemble does not match layout");

  const ModeSet& modes = *model.modes;
  const PointEvaluator eval(modes);
  Ensemble out = ensemble;
  parallel_for(static_cast<std::size_t>(ensemble.size()), workers, [&](std::size_t i) {
    std::vector<Floe> floes = model.floe_template;
    ModeState state;
    unpack_into(model.layout, modes, ensemble.members.col(static_cast<Index>(i)), floes, state);
    std::vector<Complex> noise(modes.pair_count());
    const auto ocean_at = [&](const Vec2& x) { return eval(state.coeffs, x); };
    for (int s = 0; s < substeps; ++s) {
      for (Floe& f : floes) advance_floe(f, ocean_at, model.dt, model.integrator);
      draw_mode_noise(member_rngs[i], noise);
      advance_modes(modes, model.propagators, model.dt, noise, state);
    }
    out.members.col(static_cast<Index>(i)) = pack(model.layout, modes, floes, state);
  });
  if (!out.members.allFinite()) throw NumericalError("forecast produced non-finite state");
  return out;
}

Ensemble initial_ensemble(const AugmentedLayout& layout, const ModeSet& modes, std::span<const ModeParams> params,
                          std::span<const Floe> floe_template, std::span<const Vec2> observed, double position_sd,
                          double velocity_sd, std::span<Rng> init_rngs) {
  if (init_rngs.size() < 2) throw ConfigError("ensemble size must be at least 2");
  if (observed.size() != layout.floe_count || floe_template.size() != layout.floe_count)
    throw ConfigError("initial_ensemble: floe counts do not match layout");
  const PointEvaluator eval(modes);
  Ensemble ens;
  ens.periodic = layout.periodic_components();
  ens.members.resize(layout.dim(), static_cast<Index>(init_rngs.size()));
  std::vector<Floe> floes(floe_template.begin(), floe_template.end());
  for (std::size_t i = 0; i < init_rngs.size(); ++i) {
    Rng& rng = init_rngs[i];
    const ModeState state = sample_stationary(modes, params, rng);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t f = 0; f < floes.size(); ++f) {
      const double px = normal(rng), py = normal(rng);
      const Vec2 x = wrap_point(observed[f] + position_sd * Vec2(px, py));
      const double vx = normal(rng), vy = normal(rng);
      floes[f].x = x;
      floes[f].v = eval(state.coeffs, x) + velocity_sd * Vec2(vx, vy);
    }
    ens.members.col(static_cast<Index>(i)) = pack(layout, modes, floes, state);
  }
  return ens;
}

ModeState mean_modes(const Ensemble& ensemble, const AugmentedLayout& layout, const ModeSet& modes) {
  ModeState state = zero_state(modes);
  const auto& reps = modes.representatives();
  for (std::size_t p = 0; p < reps.size(); ++p) {
    const Complex c(ensemble.members.row(layout.mode_real(p)).mean(),
                    ensemble.members.row(layout.mode_imag(p)).mean());
    state.coeffs[reps[p]] = c;
    state.coeffs[modes.partner(reps[p])] = std::conj(c);
  }
  return state;
}

} // namespace floeda

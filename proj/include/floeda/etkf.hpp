#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "floeda/floe_dynamics.hpp"
#include "floeda/ocean_spectral.hpp"
#include "floeda/rng.hpp"

namespace floeda {

/// Layout of the real augmented state vector:
///   [x_0, y_0, vx_0, vy_0, x_1, ..., Re c_p0, Im c_p0, Re c_p1, ...]
/// with one (Re, Im) pair per conjugate-pair representative.
struct AugmentedLayout {
  std::size_t floe_count = 0;
  std::size_t pair_count = 0;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(4 * floe_count + 2 * pair_count); }
  Eigen::Index position(std::size_t floe, int c) const { return static_cast<Eigen::Index>(4 * floe + c); }
  Eigen::Index velocity(std::size_t floe, int c) const { return static_cast<Eigen::Index>(4 * floe + 2 + c); }
  Eigen::Index mode_real(std::size_t pair) const { return static_cast<Eigen::Index>(4 * floe_count + 2 * pair); }
  Eigen::Index mode_imag(std::size_t pair) const { return mode_real(pair) + 1; }

  /// Position components, which live on the torus.
  std::vector<Eigen::Index> periodic_components() const;
};

Eigen::VectorXd pack(const AugmentedLayout& layout, const ModeSet& modes, std::span<const Floe> floes,
                     const ModeState& state);

/// Writes positions/velocities into `floes` (other floe fields untouched) and
/// all coefficients into `state`, rebuilding partners by conjugation.
void unpack_into(const AugmentedLayout& layout, const ModeSet& modes, const Eigen::Ref<const Eigen::VectorXd>& x,
                 std::span<Floe> floes, ModeState& state);

std::pair<std::vector<Floe>, ModeState> unpack(const AugmentedLayout& layout, const ModeSet& modes,
                                               const Eigen::Ref<const Eigen::VectorXd>& x,
                                               std::vector<Floe> floe_template);

/// Ensemble stored column-wise: members.col(i) is member i.
struct Ensemble {
  Eigen::MatrixXd members;
  std::vector<Eigen::Index> periodic; ///< components on [0, 2pi)

  Eigen::Index size() const { return members.cols(); }
  Eigen::Index dim() const { return members.rows(); }
};

/// Linear observation of selected state components with diagonal error covariance.
struct ObsModel {
  std::vector<Eigen::Index> components;
  Eigen::VectorXd variance;
  bool periodic = false; ///< innovations are minimum-image wrapped

  /// Every floe position of `layout`, each component with variance sigma_obs^2.
  static ObsModel floe_positions(const AugmentedLayout& layout, double sigma_obs);
};

/// Ensemble mean; periodic components use the minimum-image mean about member 0.
Eigen::VectorXd ensemble_mean(const Ensemble& ensemble);

/// Columns x_i - mean, minimum-image on periodic components.
Eigen::MatrixXd ensemble_anomalies(const Ensemble& ensemble, const Eigen::VectorXd& mean);

/// Ensemble-space quantities of one ETKF analysis.
struct EtkfTransform {
  Eigen::MatrixXd s;      ///< Y'^T R^-1 Y' / (N - 1)
  Eigen::MatrixXd t;      ///< (I + S)^-1/2, symmetric
  Eigen::VectorXd w_mean; ///< (I + S)^-1 Y'^T R^-1 d / (N - 1)
};

/// `obs_anomalies` is Y' (p x N), `innovation` is d = y - H xbar.
EtkfTransform etkf_transform(const Eigen::MatrixXd& obs_anomalies, const Eigen::VectorXd& innovation,
                             const Eigen::VectorXd& variance);

struct AnalysisDiagnostics {
  double innovation_rms = 0.0;
  double spread_before = 0.0; ///< trace of the forecast sample covariance
  double spread_after = 0.0;
};

/// Symmetric square-root ETKF analysis with multiplicative inflation.
Ensemble etkf_analysis(const Ensemble& ensemble, const Eigen::VectorXd& y, const ObsModel& obs,
                       double inflation = 1.0, AnalysisDiagnostics* diagnostics = nullptr);

/// Trace of the sample covariance.
double ensemble_spread(const Ensemble& ensemble);

/// Dynamics applied to each member between observation times.
struct ForecastModel {
  const ModeSet* modes = nullptr;
  std::vector<OuPropagator> propagators; ///< per mode, for dt
  AugmentedLayout layout;
  std::vector<Floe> floe_template; ///< mass and drag of each tracked floe
  double dt = 1e-3;
  Integrator integrator = Integrator::SemiImplicitEuler;
};

/// Advances every member by `substeps` model steps: floes move in the member's
/// own ocean, then its modes take an OU step with noise from the member's stream.
/// `member_rngs` holds one stream per member and is advanced.
Ensemble forecast(const Ensemble& ensemble, const ForecastModel& model, double dt_obs, int substeps,
                  std::span<Rng> member_rngs, std::size_t workers = 1);

/// Initial ensemble: modes from the stationary law, tracked floes at
/// `observed` plus N(0, position_sd) and moving with the member's ocean plus
/// N(0, velocity_sd). `init_rngs` holds one stream per member.
Ensemble initial_ensemble(const AugmentedLayout& layout, const ModeSet& modes, std::span<const ModeParams> params,
                          std::span<const Floe> floe_template, std::span<const Vec2> observed, double position_sd,
                          double velocity_sd, std::span<Rng> init_rngs);

/// Mean mode coefficients of the ensemble (partners conjugated).
ModeState mean_modes(const Ensemble& ensemble, const AugmentedLayout& layout, const ModeSet& modes);

} // namespace floeda

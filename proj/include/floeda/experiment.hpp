#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "floeda/config.hpp"
#include "floeda/domain_decomposition.hpp"
#include "floeda/etkf.hpp"
#include "floeda/field_grid.hpp"
#include "floeda/floe_dynamics.hpp"
#include "floeda/ocean_spectral.hpp"

namespace floeda {

/// Everything the assimilation is allowed to know about the model: the mode
/// set, the (amplitude-scaled) mode climatology and the static properties of
/// every floe. Positions and velocities in `floes` are not used by the filter.
struct ModelSetup {
  RunConfig config;
  ModeSet modes;
  std::vector<ModeParams> params;
  double amplitude_scale = 1.0;
  std::vector<Floe> floes;
};

ModelSetup make_model_setup(const RunConfig& config, double amplitude_scale, std::vector<Floe> floes);

/// Observation step indices at which fields are recorded: 0, output_every, ..., and the final step.
std::vector<int> output_steps(const RunConfig& config);

struct TruthRun {
  ModelSetup setup;
  std::uint64_t seed = 0;
  std::vector<double> obs_times;             ///< k * dt_obs for k = 0..K
  std::vector<ModeState> modes;              ///< truth modes at each observation time
  std::vector<std::vector<Vec2>> positions;  ///< all floe positions at each observation time
  std::vector<int> field_steps;              ///< see output_steps()
  std::vector<FieldGrid> fields;             ///< truth velocity on the grid at field_steps
  FloeState initial_floes;
};

/// Scale that brings the largest grid speed of `state` to `target`.
double amplitude_scale_for(const ModeSet& modes, const ModeState& state, int grid_n, double target);

/// Generates the truth: power-law floes placed uniformly at random and moving
/// with the ocean, modes drawn from the stationary law and scaled to the
/// target speed (unless config.amplitude_scale > 0), then integrated to
/// t_final. Deterministic in (config, seed).
TruthRun run_truth(const RunConfig& config, std::uint64_t seed);

struct ObservationRecord {
  int step = 0;
  double time = 0.0;
  std::size_t floe = 0;
  Vec2 position = Vec2::Zero();
};

/// Floes observed in each subdomain from observation step `step` onwards.
struct SelectionEpoch {
  int step = 0;
  std::vector<std::vector<std::size_t>> per_subdomain;
};

struct ObservationSet {
  int nx = 1;
  int ny = 1;
  std::vector<double> times;
  std::vector<SelectionEpoch> epochs;
  std::vector<ObservationRecord> records; ///< ordered by step, then epoch order
  std::vector<SelectionWarning> warnings;

  std::size_t records_at(int step) const;
};

/// Noisy positions (N(0, obs_noise) per component, added before wrapping) of
/// the floes chosen by select_observed_floes for every subdomain of the
/// config's layout, at every observation time including t = 0.
ObservationSet generate_observations(const TruthRun& truth, const RunConfig& config, std::uint64_t seed);

struct SkillReport {
  double nrmse = 0.0;
  double pcc = 0.0;
  double runtime_s = 0.0;  ///< forecast + analysis + fusion wall-clock
  double forecast_s = 0.0;
  double analysis_s = 0.0;
  double fusion_s = 0.0;
  double control_nrmse = 0.0;
  double control_pcc = 0.0;
  std::vector<double> times;
  std::vector<double> nrmse_series;
  std::vector<double> pcc_series;
  std::vector<double> control_nrmse_series;
  std::string config_hash;
  std::uint64_t seed = 0;
};

struct DiagnosticRecord {
  int step = 0;
  int subdomain = 0;
  std::size_t observations = 0;
  double innovation_rms = 0.0;
  double spread_before = 0.0;
  double spread_after = 0.0;
};

struct AssimilationResult {
  std::vector<int> field_steps;
  std::vector<FieldGrid> fields;          ///< fused estimate at field_steps
  std::vector<FieldGrid> control_fields;  ///< forecast-only ensemble mean
  std::vector<ModeState> final_local_modes; ///< per subdomain ensemble-mean modes at t_final
  std::vector<DiagnosticRecord> diagnostics;
  std::optional<SkillReport> report;      ///< present when truth fields were supplied
};

/// Runs the decomposed forecast/analysis cycle of every subdomain, fuses the
/// local ensemble-mean fields with Gaussian weights at each field step and,
/// when `truth_fields` (aligned with output_steps()) is given, scores the
/// estimate and the forecast-only control.
AssimilationResult run_assimilation(const ModelSetup& setup, const ObservationSet& observations, std::uint64_t seed,
                                    const std::vector<FieldGrid>* truth_fields = nullptr, std::size_t workers = 1);

/// One grid size with its per-subdomain observation budgets.
struct SweepCase {
  int nx = 1;
  int ny = 1;
  std::vector<std::size_t> obs_per_subdomain;
};

/// The twelve configurations: 1x1 {20,50,100,200}, 2x2 {10,20,50,100}, 4x4 {5,10,20,50}.
std::vector<SweepCase> standard_sweep_cases();

struct SweepRow {
  bool aggregated = false;
  int nx = 1;
  int ny = 1;
  std::size_t obs_per_subdomain = 0;
  std::size_t total_obs = 0;
  std::uint64_t seed = 0; ///< meaningless for aggregated rows
  double nrmse = 0.0;
  double pcc = 0.0;
  double runtime_s = 0.0;
  double analysis_s = 0.0;
  double control_nrmse = 0.0;
  double control_pcc = 0.0;

  std::string grid() const { return std::to_string(nx) + "x" + std::to_string(ny); }
};

/// For each case and budget: one row per seed followed by the seed-mean row.
/// Truth runs are shared across configurations of the same seed. Jobs run on
/// up to `workers` threads; row order does not depend on scheduling.
std::vector<SweepRow> sweep(const RunConfig& config_template, const std::vector<SweepCase>& cases,
                            const std::vector<std::uint64_t>& seeds, std::size_t workers = 1);

struct CalibrationReport {
  double amplitude_scale = 0.0;           ///< mean over samples
  std::vector<double> amplitude_samples;
  double drag_coefficient = 0.0;
  double max_ice_speed = 0.0;             ///< at the chosen drag coefficient
  double ice_speed_target = 5.0;
  bool ice_target_reached = false;
};

/// Chooses the ocean amplitude scale (mean over `samples` stationary draws)
/// and the drag coefficient whose short free-drift run from rest comes
/// closest to `ice_speed_target`, among stable coefficients.
CalibrationReport calibrate(const RunConfig& config, std::uint64_t seed, int samples = 16,
                            double ice_speed_target = 5.0);

} // namespace floeda

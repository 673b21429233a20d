#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "floeda/domain_decomposition.hpp"
#include "floeda/floe_dynamics.hpp"
#include "floeda/ocean_spectral.hpp"

namespace floeda {

/// How the truth model samples the ocean at floe positions.
enum class OceanSampling { Spectral, GridBilinear };

/// Every knob of a twin experiment. Defaults are the full-scale values
/// (40,000 floes, 1000 members, k_max = 9); see desk_scale_config() for the
/// small scenario used by the acceptance suite.
struct RunConfig {
  // ocean
  int k_max = 9;
  Truncation truncation = Truncation::MaxNorm;
  double damping = 0.5;
  double phase_speed = 0.0;
  double forcing_re = 0.0;
  double forcing_im = 0.0;
  double noise = 0.05;
  double ocean_speed_target = 2.0;
  double amplitude_scale = 0.0; ///< <= 0: calibrate on the truth's initial sample

  // floes
  std::size_t floe_count = 40000;
  double radius_exponent = 1.3;
  double r_min = 0.004;
  double r_max = 0.016;
  double ice_density = 1.0;
  double thickness = 1.0;
  double ocean_density = 1.0;
  double drag_coefficient = 100.0;
  Integrator integrator = Integrator::SemiImplicitEuler;
  OceanSampling ocean_sampling = OceanSampling::Spectral;

  // time
  double dt = 1e-3;
  double dt_obs = 1e-2;
  double t_final = 20.0;

  // filter
  int ensemble_size = 1000;
  double obs_noise = 0.01;
  double inflation = 1.0;
  double velocity_spread = 0.05;

  // decomposition
  int nx = 1;
  int ny = 1;
  std::size_t obs_per_subdomain = 20;
  double sigma_o = 2.6;
  int grid_n = 64;
  WeightDistance weight_distance = WeightDistance::Periodic;
  int selection_refresh = 0; ///< observation intervals between re-selections; 0 = select once

  // output
  int output_every = 10; ///< observation intervals between recorded fields
  std::uint64_t seed = 1;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  int substeps() const;   ///< dt_obs / dt
  int obs_steps() const;  ///< t_final / dt_obs
  int subdomain_count() const { return nx * ny; }

  /// Per-mode parameters with noise and forcing multiplied by `scale`.
  std::vector<ModeParams> mode_params(const ModeSet& modes, double scale) const;
  FloeMaterial material() const;
};

/// L = 2000, k_max = 3, N_e = 100, T = 2, grid 32; everything else at defaults.
RunConfig desk_scale_config();

RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string to_json_string(const RunConfig& config, int indent = 2);

/// 16-hex-digit FNV-1a hash of the canonical JSON form.
std::string config_hash(const RunConfig& config);

} // namespace floeda

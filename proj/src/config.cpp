#include "floeda/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "floeda/errors.hpp"

namespace floeda {

using nlohmann::json;

namespace {

bool is_integer_multiple(double big, double small) {
  const double ratio = big / small;
  return std::abs(ratio - std::round(ratio)) < 1e-9 * std::max(1.0, ratio) && std::round(ratio) >= 1.0;
}

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw ConfigError(std::string("config field '") + field + "': " + what);
}

template <class E>
struct EnumNames;

template <>
struct EnumNames<Truncation> {
  static constexpr std::pair<Truncation, const char*> values[] = {{Truncation::MaxNorm, "max_norm"},
                                                                  {Truncation::Euclidean, "euclidean"}};
};
template <>
struct EnumNames<Integrator> {
  static constexpr std::pair<Integrator, const char*> values[] = {{Integrator::SemiImplicitEuler, "semi_implicit_euler"},
                                                                  {Integrator::RungeKutta4, "rk4"}};
};
template <>
struct EnumNames<OceanSampling> {
  static constexpr std::pair<OceanSampling, const char*> values[] = {{OceanSampling::Spectral, "spectral"},
                                                                     {OceanSampling::GridBilinear, "grid_bilinear"}};
};
template <>
struct EnumNames<WeightDistance> {
  static constexpr std::pair<WeightDistance, const char*> values[] = {{WeightDistance::Periodic, "periodic"},
                                                                      {WeightDistance::Planar, "planar"}};
};

template <class E>
std::string enum_name(E e) {
  for (const auto& [v, name] : EnumNames<E>::values)
    if (v == e) return name;
  return "?";
}

template <class E>
E enum_value(const std::string& key, const std::string& name) {
  for (const auto& [v, n] : EnumNames<E>::values)
    if (name == n) return v;
  throw ConfigError("config field '" + key + "': unknown value '" + name + "'");
}

json to_json(const RunConfig& c) {
  return json{
      {"k_max", c.k_max},
      {"truncation", enum_name(c.truncation)},
      {"damping", c.damping},
      {"phase_speed", c.phase_speed},
      {"forcing_re", c.forcing_re},
      {"forcing_im", c.forcing_im},
      {"noise", c.noise},
      {"ocean_speed_target", c.ocean_speed_target},
      {"amplitude_scale", c.amplitude_scale},
      {"floe_count", c.floe_count},
      {"radius_exponent", c.radius_exponent},
      {"r_min", c.r_min},
      {"r_max", c.r_max},
      {"ice_density", c.ice_density},
      {"thickness", c.thickness},
      {"ocean_density", c.ocean_density},
      {"drag_coefficient", c.drag_coefficient},
      {"integrator", enum_name(c.integrator)},
      {"ocean_sampling", enum_name(c.ocean_sampling)},
      {"dt", c.dt},
      {"dt_obs", c.dt_obs},
      {"t_final", c.t_final},
      {"ensemble_size", c.ensemble_size},
      {"obs_noise", c.obs_noise},
      {"inflation", c.inflation},
      {"velocity_spread", c.velocity_spread},
      {"nx", c.nx},
      {"ny", c.ny},
      {"obs_per_subdomain", c.obs_per_subdomain},
      {"sigma_o", c.sigma_o},
      {"grid_n", c.grid_n},
      {"weight_distance", enum_name(c.weight_distance)},
      {"selection_refresh", c.selection_refresh},
      {"output_every", c.output_every},
      {"seed", c.seed},
  };
}

template <class T>
void read_field(const json& j, const std::string& key, T& out) {
  try {
    out = j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + key + "': wrong type");
  }
}

} // namespace

void RunConfig::validate() const {
  require(k_max >= 1, "k_max", "must be >= 1");
  require(damping > 0.0, "damping", "must be > 0");
  require(noise >= 0.0, "noise", "must be >= 0");
  require(std::isfinite(phase_speed) && std::isfinite(forcing_re) && std::isfinite(forcing_im), "forcing",
          "must be finite");
  require(ocean_speed_target > 0.0, "ocean_speed_target", "must be > 0");
  require(std::isfinite(amplitude_scale), "amplitude_scale", "must be finite");
  require(floe_count >= 1, "floe_count", "must be >= 1");
  require(radius_exponent != 1.0, "radius_exponent", "must differ from 1");
  require(r_min > 0.0 && r_min <= r_max, "r_min", "must satisfy 0 < r_min <= r_max");
  require(ice_density > 0.0, "ice_density", "must be > 0");
  require(thickness > 0.0, "thickness", "must be > 0");
  require(ocean_density > 0.0, "ocean_density", "must be > 0");
  require(drag_coefficient >= 0.0, "drag_coefficient", "must be >= 0");
  require(dt > 0.0, "dt", "must be > 0");
  require(dt_obs > 0.0 && is_integer_multiple(dt_obs, dt), "dt_obs", "must be a positive integer multiple of dt");
  require(t_final > 0.0 && is_integer_multiple(t_final, dt_obs), "t_final",
          "must be a positive integer multiple of dt_obs");
  require(ensemble_size >= 2, "ensemble_size", "must be >= 2");
  require(obs_noise >= 0.0, "obs_noise", "must be >= 0");
  require(inflation >= 1.0, "inflation", "must be >= 1");
  require(velocity_spread >= 0.0, "velocity_spread", "must be >= 0");
  require(nx >= 1, "nx", "must be >= 1");
  require(ny >= 1, "ny", "must be >= 1");
  require(obs_per_subdomain >= 1, "obs_per_subdomain", "must be >= 1");
  require(sigma_o > 0.0, "sigma_o", "must be > 0");
  require(grid_n >= 2, "grid_n", "must be >= 2");
  require(selection_refresh >= 0, "selection_refresh", "must be >= 0");
  require(output_every >= 1, "output_every", "must be >= 1");
}

int RunConfig::substeps() const { return static_cast<int>(std::lround(dt_obs / dt)); }
int RunConfig::obs_steps() const { return static_cast<int>(std::lround(t_final / dt_obs)); }

std::vector<ModeParams> RunConfig::mode_params(const ModeSet& modes, double scale) const {
  ModeParams p;
  p.damping = damping;
  p.phase_speed = phase_speed;
  p.forcing = scale * Complex(forcing_re, forcing_im);
  p.noise = scale * noise;
  p.validate();
  return std::vector<ModeParams>(modes.size(), p);
}

FloeMaterial RunConfig::material() const { return {ice_density, thickness, ocean_density, drag_coefficient}; }

RunConfig desk_scale_config() {
  RunConfig c;
  c.floe_count = 2000;
  c.k_max = 3;
  c.ensemble_size = 100;
  c.t_final = 2.0;
  c.grid_n = 32;
  return c;
}

RunConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  std::string name;
  for (const auto& [key, value] : j.items()) {
    if (key == "k_max") read_field(value, key, c.k_max);
    else if (key == "truncation") { read_field(value, key, name); c.truncation = enum_value<Truncation>(key, name); }
    else if (key == "damping") read_field(value, key, c.damping);
    else if (key == "phase_speed") read_field(value, key, c.phase_speed);
    else if (key == "forcing_re") read_field(value, key, c.forcing_re);
    else if (key == "forcing_im") read_field(value, key, c.forcing_im);
    else if (key == "noise") read_field(value, key, c.noise);
    else if (key == "ocean_speed_target") read_field(value, key, c.ocean_speed_target);
    else if (key == "amplitude_scale") read_field(value, key, c.amplitude_scale);
    else if (key == "floe_count") read_field(value, key, c.floe_count);
    else if (key == "radius_exponent") read_field(value, key, c.radius_exponent);
    else if (key == "r_min") read_field(value, key, c.r_min);
    else if (key == "r_max") read_field(value, key, c.r_max);
    else if (key == "ice_density") read_field(value, key, c.ice_density);
    else if (key == "thickness") read_field(value, key, c.thickness);
    else if (key == "ocean_density") read_field(value, key, c.ocean_density);
    else if (key == "drag_coefficient") read_field(value, key, c.drag_coefficient);
    else if (key == "integrator") { read_field(value, key, name); c.integrator = enum_value<Integrator>(key, name); }
    else if (key == "ocean_sampling") { read_field(value, key, name); c.ocean_sampling = enum_value<OceanSampling>(key, name); }
    else if (key == "dt") read_field(value, key, c.dt);
    else if (key == "dt_obs") read_field(value, key, c.dt_obs);
    else if (key == "t_final") read_field(value, key, c.t_final);
    else if (key == "ensemble_size") read_field(value, key, c.ensemble_size);
    else if (key == "obs_noise") read_field(value, key, c.obs_noise);
    else if (key == "inflation") read_field(value, key, c.inflation);
    else if (key == "velocity_spread") read_field(value, key, c.velocity_spread);
    else if (key == "nx") read_field(value, key, c.nx);
    else if (key == "ny") read_field(value, key, c.ny);
    else if (key == "obs_per_subdomain") read_field(value, key, c.obs_per_subdomain);
    else if (key == "sigma_o") read_field(value, key, c.sigma_o);
    else if (key == "grid_n") read_field(value, key, c.grid_n);
    else if (key == "weight_distance") { read_field(value, key, name); c.weight_distance = enum_value<WeightDistance>(key, name); }
    else if (key == "selection_refresh") read_field(value, key, c.selection_refresh);
    else if (key == "output_every") read_field(value, key, c.output_every);
    else if (key == "seed") read_field(value, key, c.seed);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json_string(const RunConfig& config, int indent) { return to_json(config).dump(indent); }

std::string config_hash(const RunConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace floeda

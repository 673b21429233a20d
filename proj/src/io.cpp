#include "floeda/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "floeda/errors.hpp"

namespace floeda::io {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "field files are written in native little-endian order");

namespace {

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw ConfigError("cannot read " + path.string());
  return in;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, const fs::path& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(path.string() + ": not a number: '" + s + "'");
  }
}

std::uint64_t to_u64(const std::string& s, const fs::path& path) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(path.string() + ": not an unsigned integer: '" + s + "'");
  }
}

/// Reads a CSV with the exact `header`; returns data rows of `header` width.
std::vector<std::vector<std::string>> read_table(const fs::path& path, const std::string& header) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw ConfigError(path.string() + ": expected header '" + header + "'");
  const std::size_t width = split_csv(header).size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != width) throw ConfigError(path.string() + ": row with wrong column count");
    rows.push_back(std::move(cells));
  }
  return rows;
}

json read_json(const fs::path& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_nan(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

template <class T>
void put_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get_pod(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

} // namespace

void write_field_binary(const fs::path& path, const FieldGrid& field) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out.write(kFieldMagic, sizeof kFieldMagic);
  put_pod(out, kFieldVersion);
  put_pod(out, static_cast<std::uint32_t>(field.n()));
  put_pod(out, static_cast<std::uint32_t>(FieldGrid::kComponents));
  put_pod(out, std::uint32_t{0});
  put_pod(out, field.time());
  out.write(reinterpret_cast<const char*>(field.data().data()),
            static_cast<std::streamsize>(field.data().size() * sizeof(double)));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

FieldGrid read_field_binary(const fs::path& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < kFieldHeaderBytes) throw ConfigError(path.string() + ": truncated field header");
  if (std::memcmp(bytes.data(), kFieldMagic, sizeof kFieldMagic) != 0)
    throw ConfigError(path.string() + ": not a field file (bad magic)");
  const auto version = get_pod<std::uint32_t>(bytes.data() + 8);
  const auto n = get_pod<std::uint32_t>(bytes.data() + 12);
  const auto components = get_pod<std::uint32_t>(bytes.data() + 16);
  const auto time = get_pod<double>(bytes.data() + 24);
  if (version != kFieldVersion) throw ConfigError(path.string() + ": unsupported field version " + std::to_string(version));
  if (components != FieldGrid::kComponents) throw ConfigError(path.string() + ": expected 2 components");
  if (n < 2 || n > 65536) throw ConfigError(path.string() + ": bad grid size");
  const std::size_t expected = kFieldHeaderBytes + std::size_t{n} * n * components * sizeof(double);
  if (bytes.size() != expected)
    throw ConfigError(path.string() + ": length " + std::to_string(bytes.size()) + " does not match header (" +
                      std::to_string(expected) + ")");
  FieldGrid field(static_cast<int>(n), time);
  std::memcpy(field.data().data(), bytes.data() + kFieldHeaderBytes, expected - kFieldHeaderBytes);
  return field;
}

void write_field_csv(const fs::path& path, const FieldGrid& field) {
  auto out = open_out(path);
  out << "time,i,j,x,y,u,v\n";
  const std::string t = fmt(field.time());
  for (int j = 0; j < field.n(); ++j) {
    for (int i = 0; i < field.n(); ++i) {
      const Vec2 p = field.node(i, j);
      out << t << ',' << i << ',' << j << ',' << fmt(p.x()) << ',' << fmt(p.y()) << ',' << fmt(field.at(i, j, 0))
          << ',' << fmt(field.at(i, j, 1)) << '\n';
    }
  }
}

FieldGrid read_field_csv(const fs::path& path) {
  const auto rows = read_table(path, "time,i,j,x,y,u,v");
  const auto n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rows.size()))));
  if (n < 2 || static_cast<std::size_t>(n) * n != rows.size())
    throw ConfigError(path.string() + ": row count is not a square grid");
  FieldGrid field(n, to_double(rows.front()[0], path));
  std::vector<bool> seen(rows.size(), false);
  for (const auto& r : rows) {
    const auto i = static_cast<int>(to_u64(r[1], path));
    const auto j = static_cast<int>(to_u64(r[2], path));
    if (i >= n || j >= n) throw ConfigError(path.string() + ": node index out of range");
    const auto idx = static_cast<std::size_t>(j) * n + i;
    if (seen[idx]) throw ConfigError(path.string() + ": duplicate node");
    seen[idx] = true;
    field.set_velocity(i, j, Vec2(to_double(r[5], path), to_double(r[6], path)));
  }
  return field;
}

fs::path write_field(const fs::path& stem, const FieldGrid& field, FieldFormat format) {
  fs::path path = stem;
  if (format == FieldFormat::Binary) {
    path += ".bin";
    write_field_binary(path, field);
  } else {
    path += ".csv";
    write_field_csv(path, field);
  }
  return path;
}

FieldGrid read_field(const fs::path& path) {
  if (path.extension() == ".csv") return read_field_csv(path);
  return read_field_binary(path);
}

void write_observations_csv(const fs::path& path, const std::vector<ObservationRecord>& records) {
  auto out = open_out(path);
  out << "time,floe_id,x,y\n";
  for (const auto& r : records)
    out << fmt(r.time) << ',' << r.floe << ',' << fmt(r.position.x()) << ',' << fmt(r.position.y()) << '\n';
}

std::vector<ObservationRecord> read_observations_csv(const fs::path& path, double dt_obs) {
  if (!(dt_obs > 0.0)) throw ConfigError("dt_obs must be positive");
  std::vector<ObservationRecord> out;
  for (const auto& r : read_table(path, "time,floe_id,x,y")) {
    ObservationRecord rec;
    rec.time = to_double(r[0], path);
    const double k = rec.time / dt_obs;
    rec.step = static_cast<int>(std::lround(k));
    if (std::abs(k - rec.step) > 1e-6) throw ConfigError(path.string() + ": time " + r[0] + " is not an observation time");
    rec.floe = to_u64(r[1], path);
    rec.position = Vec2(to_double(r[2], path), to_double(r[3], path));
    out.push_back(rec);
  }
  return out;
}

void write_floes_csv(const fs::path& path, const std::vector<Floe>& floes) {
  auto out = open_out(path);
  out << "floe_id,radius,mass,drag,x,y,vx,vy\n";
  for (std::size_t i = 0; i < floes.size(); ++i) {
    const Floe& f = floes[i];
    out << i << ',' << fmt(f.radius) << ',' << fmt(f.mass) << ',' << fmt(f.drag) << ',' << fmt(f.x.x()) << ','
        << fmt(f.x.y()) << ',' << fmt(f.v.x()) << ',' << fmt(f.v.y()) << '\n';
  }
}

std::vector<Floe> read_floes_csv(const fs::path& path) {
  std::vector<Floe> out;
  for (const auto& r : read_table(path, "floe_id,radius,mass,drag,x,y,vx,vy")) {
    if (to_u64(r[0], path) != out.size()) throw ConfigError(path.string() + ": floe ids must be 0..n-1 in order");
    Floe f;
    f.radius = to_double(r[1], path);
    f.mass = to_double(r[2], path);
    f.drag = to_double(r[3], path);
    f.x = Vec2(to_double(r[4], path), to_double(r[5], path));
    f.v = Vec2(to_double(r[6], path), to_double(r[7], path));
    out.push_back(f);
  }
  return out;
}

void write_selection_json(const fs::path& path, const ObservationSet& obs) {
  json j;
  j["nx"] = obs.nx;
  j["ny"] = obs.ny;
  j["epochs"] = json::array();
  for (const auto& e : obs.epochs) j["epochs"].push_back({{"step", e.step}, {"per_subdomain", e.per_subdomain}});
  j["warnings"] = json::array();
  for (const auto& w : obs.warnings)
    j["warnings"].push_back({{"subdomain", w.subdomain}, {"requested", w.requested}, {"available", w.available}});
  write_json(path, j);
}

void read_selection_json(const fs::path& path, ObservationSet& obs) {
  const json j = read_json(path);
  try {
    obs.nx = j.at("nx").get<int>();
    obs.ny = j.at("ny").get<int>();
    obs.epochs.clear();
    for (const auto& e : j.at("epochs"))
      obs.epochs.push_back({e.at("step").get<int>(), e.at("per_subdomain").get<std::vector<std::vector<std::size_t>>>()});
    obs.warnings.clear();
    for (const auto& w : j.at("warnings")) {
      SelectionWarning sw;
      sw.subdomain = w.at("subdomain").get<int>();
      sw.requested = w.at("requested").get<std::size_t>();
      sw.available = w.at("available").get<std::size_t>();
      obs.warnings.push_back(sw);
    }
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_manifest(const fs::path& path, const RunManifest& m) {
  json j;
  j["config"] = json::parse(to_json_string(m.config));
  j["seed"] = m.seed;
  j["amplitude_scale"] = m.amplitude_scale;
  j["config_hash"] = m.config_hash.empty() ? config_hash(m.config) : m.config_hash;
  write_json(path, j);
}

RunManifest read_manifest(const fs::path& path) {
  const json j = read_json(path);
  RunManifest m;
  try {
    m.config = parse_config(j.at("config").dump());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.amplitude_scale = j.at("amplitude_scale").get<double>();
    m.config_hash = j.at("config_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return m;
}

void write_skill_report(const fs::path& path, const SkillReport& r) {
  auto series = [](const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(finite_or_null(x));
    return a;
  };
  json j;
  j["nrmse"] = finite_or_null(r.nrmse);
  j["pcc"] = finite_or_null(r.pcc);
  j["runtime_s"] = r.runtime_s;
  j["forecast_s"] = r.forecast_s;
  j["analysis_s"] = r.analysis_s;
  j["fusion_s"] = r.fusion_s;
  j["control_nrmse"] = finite_or_null(r.control_nrmse);
  j["control_pcc"] = finite_or_null(r.control_pcc);
  j["times"] = r.times;
  j["nrmse_series"] = series(r.nrmse_series);
  j["pcc_series"] = series(r.pcc_series);
  j["control_nrmse_series"] = series(r.control_nrmse_series);
  j["config_hash"] = r.config_hash;
  j["seed"] = r.seed;
  write_json(path, j);
}

SkillReport read_skill_report(const fs::path& path) {
  const json j = read_json(path);
  auto series = [](const json& a) {
    std::vector<double> v;
    for (const auto& x : a) v.push_back(number_or_nan(x));
    return v;
  };
  SkillReport r;
  try {
    r.nrmse = number_or_nan(j.at("nrmse"));
    r.pcc = number_or_nan(j.at("pcc"));
    r.runtime_s = j.at("runtime_s").get<double>();
    r.forecast_s = j.at("forecast_s").get<double>();
    r.analysis_s = j.at("analysis_s").get<double>();
    r.fusion_s = j.at("fusion_s").get<double>();
    r.control_nrmse = number_or_nan(j.at("control_nrmse"));
    r.control_pcc = number_or_nan(j.at("control_pcc"));
    r.times = j.at("times").get<std::vector<double>>();
    r.nrmse_series = series(j.at("nrmse_series"));
    r.pcc_series = series(j.at("pcc_series"));
    r.control_nrmse_series = series(j.at("control_nrmse_series"));
    r.config_hash = j.at("config_hash").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return r;
}

namespace {
constexpr const char* kSweepHeader =
    "kind,grid,l_obs,total_obs,seed,nrmse,pcc,runtime_s,analysis_s,control_nrmse,control_pcc";
}

void write_sweep_csv(const fs::path& path, const std::vector<SweepRow>& rows) {
  auto out = open_out(path);
  out << kSweepHeader << '\n';
  for (const auto& r : rows) {
    out << (r.aggregated ? "mean" : "seed") << ',' << r.grid() << ',' << r.obs_per_subdomain << ',' << r.total_obs
        << ',';
    if (!r.aggregated) out << r.seed;
    out << ',' << fmt(r.nrmse) << ',' << fmt(r.pcc) << ',' << fmt(r.runtime_s) << ',' << fmt(r.analysis_s) << ','
        << fmt(r.control_nrmse) << ',' << fmt(r.control_pcc) << '\n';
  }
}

std::vector<SweepRow> read_sweep_csv(const fs::path& path) {
  const auto rows = read_table(path, kSweepHeader);
  if (rows.empty()) throw ConfigError(path.string() + ": no sweep rows");
  std::vector<SweepRow> out;
  for (const auto& c : rows) {
    SweepRow r;
    if (c[0] != "seed" && c[0] != "mean") throw ConfigError(path.string() + ": unknown row kind '" + c[0] + "'");
    r.aggregated = c[0] == "mean";
    const auto x = c[1].find('x');
    if (x == std::string::npos) throw ConfigError(path.string() + ": bad grid '" + c[1] + "'");
    r.nx = static_cast<int>(to_u64(c[1].substr(0, x), path));
    r.ny = static_cast<int>(to_u64(c[1].substr(x + 1), path));
    r.obs_per_subdomain = to_u64(c[2], path);
    r.total_obs = to_u64(c[3], path);
    r.seed = r.aggregated ? 0 : to_u64(c[4], path);
    r.nrmse = to_double(c[5], path);
    r.pcc = to_double(c[6], path);
    r.runtime_s = to_double(c[7], path);
    r.analysis_s = to_double(c[8], path);
    r.control_nrmse = to_double(c[9], path);
    r.control_pcc = to_double(c[10], path);
    out.push_back(r);
  }
  return out;
}

void write_diagnostics_csv(const fs::path& path, const std::vector<DiagnosticRecord>& records) {
  auto out = open_out(path);
  out << "step,subdomain,observations,innovation_rms,spread_before,spread_after\n";
  for (const auto& d : records)
    out << d.step << ',' << d.subdomain << ',' << d.observations << ',' << fmt(d.innovation_rms) << ','
        << fmt(d.spread_before) << ',' << fmt(d.spread_after) << '\n';
}

} // namespace floeda::io

// floeda: command-line front end for truth generation, observation,
// assimilation, scoring, sweeps and calibration.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "floeda/config.hpp"
#include "floeda/errors.hpp"
#include "floeda/experiment.hpp"
#include "floeda/io.hpp"
#include "floeda/metrics.hpp"

namespace fs = std::filesystem;
using namespace floeda;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t workers = 1;
  std::string format = "binary";
};

io::FieldFormat field_format(const Globals& g) {
  return g.format == "csv" ? io::FieldFormat::Csv : io::FieldFormat::Binary;
}

RunConfig base_config(const Globals& g) {
  RunConfig cfg = g.config_path.empty() ? desk_scale_config() : load_config(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  cfg.validate();
  return cfg;
}

fs::path require_out(const Globals& g) {
  if (g.out.empty()) throw ConfigError("--out <dir> is required for this command");
  return g.out;
}

std::string step_name(int step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "field_%05d", step);
  return buf;
}

void write_series(const fs::path& dir, const std::vector<int>& steps, const std::vector<FieldGrid>& fields,
                  io::FieldFormat format) {
  for (std::size_t i = 0; i < steps.size(); ++i) io::write_field(dir / step_name(steps[i]), fields[i], format);
}

/// Loads the field recorded at `step` in `dir`, whichever format it was written in.
std::optional<FieldGrid> find_field(const fs::path& dir, int step) {
  for (const char* ext : {".bin", ".csv"}) {
    const fs::path p = dir / (step_name(step) + ext);
    if (fs::exists(p)) return io::read_field(p);
  }
  return std::nullopt;
}

/// Manifest of an existing run directory, or a fresh one from the config.
io::RunManifest run_manifest(const Globals& g, const fs::path& dir) {
  if (fs::exists(dir / "manifest.json")) {
    io::RunManifest m = io::read_manifest(dir / "manifest.json");
    if (g.seed) m.seed = *g.seed;
    return m;
  }
  io::RunManifest m;
  m.config = base_config(g);
  m.seed = m.config.seed;
  return m;
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

int cmd_simulate(const Globals& g) {
  const fs::path dir = require_out(g);
  const RunConfig cfg = base_config(g);
  const TruthRun truth = run_truth(cfg, cfg.seed);
  io::write_manifest(dir / "manifest.json", {cfg, cfg.seed, truth.setup.amplitude_scale, config_hash(cfg)});
  io::write_floes_csv(dir / "floes.csv", truth.initial_floes.floes);
  write_series(dir / "truth", truth.field_steps, truth.fields, field_format(g));
  print_json({{"amplitude_scale", truth.setup.amplitude_scale},
              {"initial_max_speed", truth.fields.front().max_speed()},
              {"fields", truth.fields.size()}});
  return 0;
}

int cmd_observe(const Globals& g) {
  const fs::path dir = require_out(g);
  io::RunManifest m = run_manifest(g, dir);
  if (!g.config_path.empty()) m.config = base_config(g);
  const TruthRun truth = run_truth(m.config, m.seed);
  const ObservationSet obs = generate_observations(truth, m.config, m.seed);
  m.amplitude_scale = truth.setup.amplitude_scale;
  m.config_hash = config_hash(m.config);
  io::write_manifest(dir / "manifest.json", m);
  if (!fs::exists(dir / "floes.csv")) io::write_floes_csv(dir / "floes.csv", truth.initial_floes.floes);
  io::write_observations_csv(dir / "observations.csv", obs.records);
  io::write_selection_json(dir / "selection.json", obs);
  for (const auto& w : obs.warnings)
    std::cerr << "warning: subdomain " << w.subdomain << " has " << w.available << " floes in range, "
              << w.requested << " requested\n";
  print_json({{"records", obs.records.size()}, {"per_time", obs.records_at(0)}, {"warnings", obs.warnings.size()}});
  return 0;
}

int cmd_assimilate(const Globals& g) {
  const fs::path dir = require_out(g);
  if (!fs::exists(dir / "manifest.json")) throw ConfigError(dir.string() + " has no manifest.json; run observe first");
  io::RunManifest m = io::read_manifest(dir / "manifest.json");
  if (g.seed) m.seed = *g.seed;
  const RunConfig& cfg = m.config;
  const ModelSetup setup = make_model_setup(cfg, m.amplitude_scale, io::read_floes_csv(dir / "floes.csv"));

  ObservationSet obs;
  io::read_selection_json(dir / "selection.json", obs);
  obs.records = io::read_observations_csv(dir / "observations.csv", cfg.dt_obs);
  for (int k = 0; k <= cfg.obs_steps(); ++k) obs.times.push_back(k * cfg.dt_obs);

  std::vector<FieldGrid> truth;
  for (int step : output_steps(cfg)) {
    auto f = find_field(dir / "truth", step);
    if (!f) {
      truth.clear();
      break;
    }
    truth.push_back(std::move(*f));
  }
  const AssimilationResult result = run_assimilation(setup, obs, m.seed, truth.empty() ? nullptr : &truth, g.workers);
  write_series(dir / "estimate", result.field_steps, result.fields, field_format(g));
  write_series(dir / "control", result.field_steps, result.control_fields, field_format(g));
  io::write_diagnostics_csv(dir / "diagnostics.csv", result.diagnostics);
  if (result.report) {
    io::write_skill_report(dir / "skill.json", *result.report);
    const auto& r = *result.report;
    print_json({{"nrmse", r.nrmse},
                {"pcc", r.pcc},
                {"control_nrmse", r.control_nrmse},
                {"control_pcc", r.control_pcc},
                {"runtime_s", r.runtime_s},
                {"analysis_s", r.analysis_s}});
  } else {
    std::cerr << "no truth fields in " << (dir / "truth").string() << "; skill not computed\n";
  }
  return 0;
}

int cmd_evaluate(const Globals&, const std::string& est, const std::string& truth, const std::string& run_dir) {
  FieldGrid e, t;
  if (!run_dir.empty()) {
    const io::RunManifest m = io::read_manifest(fs::path(run_dir) / "manifest.json");
    const int last = output_steps(m.config).back();
    auto fe = find_field(fs::path(run_dir) / "estimate", last);
    auto ft = find_field(fs::path(run_dir) / "truth", last);
    if (!fe || !ft) throw ConfigError("run directory lacks final estimate or truth field");
    e = std::move(*fe);
    t = std::move(*ft);
  } else {
    if (est.empty() || truth.empty()) throw ConfigError("evaluate needs --est and --truth, or --dir");
    e = io::read_field(est);
    t = io::read_field(truth);
  }
  print_json({{"nrmse", nrmse(e, t)}, {"pcc", pcc(e, t)}, {"time", t.time()}});
  return 0;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      seeds.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw ConfigError("bad seed '" + item + "'");
    }
  }
  return seeds;
}

int cmd_sweep(const Globals& g, const std::string& seeds_text, int seed_count) {
  const fs::path dir = require_out(g);
  const RunConfig cfg = base_config(g);
  std::vector<std::uint64_t> seeds = parse_seeds(seeds_text);
  if (seeds.empty())
    for (int i = 0; i < seed_count; ++i) seeds.push_back(cfg.seed + static_cast<std::uint64_t>(i));
  const auto rows = sweep(cfg, standard_sweep_cases(), seeds, g.workers);
  io::write_sweep_csv(dir / "sweep.csv", rows);
  std::printf("%-5s %6s %7s %8s %8s %10s %10s\n", "grid", "l_obs", "total", "nrmse", "pcc", "runtime_s", "ctrl_nrmse");
  for (const auto& r : rows)
    if (r.aggregated)
      std::printf("%-5s %6zu %7zu %8.3f %8.3f %10.3f %10.3f\n", r.grid().c_str(), r.obs_per_subdomain, r.total_obs,
                  r.nrmse, r.pcc, r.runtime_s, r.control_nrmse);
  return 0;
}

int cmd_calibrate(const Globals& g, int samples, double ice_target) {
  const RunConfig cfg = base_config(g);
  const CalibrationReport rep = calibrate(cfg, cfg.seed, samples, ice_target);
  const nlohmann::json j = {{"amplitude_scale", rep.amplitude_scale},
                            {"amplitude_samples", rep.amplitude_samples},
                            {"drag_coefficient", rep.drag_coefficient},
                            {"max_ice_speed", rep.max_ice_speed},
                            {"ice_speed_target", rep.ice_speed_target},
                            {"ice_target_reached", rep.ice_target_reached}};
  if (!g.out.empty()) {
    fs::create_directories(g.out);
    std::ofstream(fs::path(g.out) / "calibration.json") << j.dump(2) << '\n';
  }
  print_json(j);
  if (!rep.ice_target_reached)
    std::cerr << "warning: ice speed target " << ice_target << " not reachable; closest max speed "
              << rep.max_ice_speed << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Domain-decomposed Lagrangian data assimilation of sea-ice floes"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON run configuration (default: desk-scale scenario)");
  app.add_option("--seed", g.seed, "Base seed, overrides the config");
  app.add_option("--out", g.out, "Run or output directory");
  app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--format", g.format, "Field output format")->check(CLI::IsMember({"csv", "binary"}));

  auto* simulate = app.add_subcommand("simulate", "Generate the truth run");
  auto* observe = app.add_subcommand("observe", "Select floes and write noisy observations");
  auto* assimilate = app.add_subcommand("assimilate", "Run the decomposed filter on a run directory");
  auto* evaluate = app.add_subcommand("evaluate", "Score an estimate field against the truth");
  std::string est, truth, run_dir;
  evaluate->add_option("--est", est, "Estimate field file");
  evaluate->add_option("--truth", truth, "Truth field file");
  evaluate->add_option("--dir", run_dir, "Run directory (final step)");
  auto* sweep_cmd = app.add_subcommand("sweep", "Run the grid-size / observation-budget sweep");
  std::string seeds_text;
  int seed_count = 5;
  sweep_cmd->add_option("--seeds", seeds_text, "Comma-separated seeds");
  sweep_cmd->add_option("--seed-count", seed_count, "Consecutive seeds from the base seed")->check(CLI::PositiveNumber);
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Calibrate ocean amplitude and drag");
  int samples = 16;
  double ice_target = 5.0;
  calibrate_cmd->add_option("--samples", samples, "Stationary draws averaged for the amplitude")
      ->check(CLI::PositiveNumber);
  calibrate_cmd->add_option("--ice-target", ice_target, "Target maximum ice speed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(g);
    if (observe->parsed()) return cmd_observe(g);
    if (assimilate->parsed()) return cmd_assimilate(g);
    if (evaluate->parsed()) return cmd_evaluate(g, est, truth, run_dir);
    if (sweep_cmd->parsed()) return cmd_sweep(g, seeds_text, seed_count);
    if (calibrate_cmd->parsed()) return cmd_calibrate(g, samples, ice_target);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

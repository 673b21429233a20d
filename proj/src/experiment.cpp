#include "floeda/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "floeda/errors.hpp"
#include "floeda/metrics.hpp"
#include "floeda/parallel.hpp"
#include "floeda/rng.hpp"

namespace floeda {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double metric_or_nan(double (*metric)(const FieldGrid&, const FieldGrid&), const FieldGrid& est,
                     const FieldGrid& truth) {
  try {
    return metric(est, truth);
  } catch (const NumericalError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

/// Moves every floe one model step through the ocean `state`.
void advance_truth_floes(std::vector<Floe>& floes, const RunConfig& config, const ModeSet& modes,
                         const PointEvaluator& eval, const ModeState& state) {
  if (config.ocean_sampling == OceanSampling::GridBilinear) {
    const FieldGrid grid = eval_velocity_grid(modes, state, config.grid_n);
    const auto ocean_at = [&](const Vec2& x) { return interp_bilinear(grid, x); };
    for (Floe& f : floes) advance_floe(f, ocean_at, config.dt, config.integrator);
  } else {
    const auto ocean_at = [&](const Vec2& x) { return eval(state.coeffs, x); };
    for (Floe& f : floes) advance_floe(f, ocean_at, config.dt, config.integrator);
  }
}

/// Observation positions indexed by step and floe id.
class ObservationTable {
public:
  ObservationTable(const ObservationSet& obs, int steps) : by_step_(static_cast<std::size_t>(steps) + 1) {
    if (obs.times.size() != by_step_.size())
      throw ConfigError("observation set covers " + std::to_string(obs.times.size()) +
                        " observation times, the config needs " + std::to_string(by_step_.size()));
    for (const auto& r : obs.records) {
      if (r.step < 0 || r.step > steps) throw ConfigError("observation record outside the run");
      by_step_[static_cast<std::size_t>(r.step)][r.floe] = r.position;
    }
  }

  Vec2 at(int step, std::size_t floe) const {
    const auto& m = by_step_[static_cast<std::size_t>(step)];
    const auto it = m.find(floe);
    if (it == m.end())
      throw ConfigError("missing observation of floe " + std::to_string(floe) + " at step " + std::to_string(step));
    return it->second;
  }

private:
  std::vector<std::unordered_map<std::size_t, Vec2>> by_step_;
};

const SelectionEpoch& epoch_at(const ObservationSet& obs, int step) {
  const SelectionEpoch* current = nullptr;
  for (const auto& e : obs.epochs)
    if (e.step <= step) current = &e;
  if (!current) throw ConfigError("observation set has no floe selection at step " + std::to_string(step));
  return *current;
}

/// Filter state of one subdomain.
struct SubdomainFilter {
  int subdomain = 0;
  std::vector<std::size_t> floe_ids;
  ForecastModel model;
  ObsModel obs;
  Ensemble ensemble;
  std::vector<Rng> forecast_rngs;

  std::vector<ModeState> control;
  std::vector<Rng> control_rngs;
};

std::vector<Floe> floe_template(const ModelSetup& setup, const std::vector<std::size_t>& ids) {
  std::vector<Floe> out;
  out.reserve(ids.size());
  for (std::size_t id : ids) {
    if (id >= setup.floes.size()) throw ConfigError("observed floe id " + std::to_string(id) + " is unknown");
    out.push_back(setup.floes[id]);
  }
  return out;
}

std::vector<Vec2> observed_positions(const ObservationTable& table, int step, const std::vector<std::size_t>& ids) {
  std::vector<Vec2> out;
  out.reserve(ids.size());
  for (std::size_t id : ids) out.push_back(table.at(step, id));
  return out;
}

/// (Re)builds the floe block for `ids`, keeping each member's modes.
void reset_floe_block(SubdomainFilter& f, const ModelSetup& setup, const ObservationTable& table, int step,
                      const std::vector<std::size_t>& ids, std::uint64_t seed, std::uint64_t epoch_index) {
  const RunConfig& cfg = setup.config;
  const AugmentedLayout layout{ids.size(), setup.modes.pair_count()};
  const std::vector<Floe> tmpl = floe_template(setup, ids);
  const std::vector<Vec2> y0 = observed_positions(table, step, ids);
  const auto n = static_cast<std::size_t>(cfg.ensemble_size);
  const std::uint64_t stream_a = static_cast<std::uint64_t>(f.subdomain) | (epoch_index << 32);
  std::vector<Rng> init;
  init.reserve(n);
  for (std::size_t i = 0; i < n; ++i) init.push_back(make_rng(seed, Stream::EnsembleInit, stream_a, i));

  if (epoch_index == 0) {
    f.ensemble = initial_ensemble(layout, setup.modes, setup.params, tmpl, y0, cfg.obs_noise, cfg.velocity_spread, init);
  } else {
    // Keep the mode block of every member, re-seed the tracked floes.
    const AugmentedLayout old_layout = f.model.layout;
    const PointEvaluator eval(setup.modes);
    Ensemble next;
    next.periodic = layout.periodic_components();
    next.members.resize(layout.dim(), static_cast<Eigen::Index>(n));
    std::vector<Floe> floes = tmpl;
    std::vector<Floe> old_floes = f.model.floe_template;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      ModeState state;
      unpack_into(old_layout, setup.modes, f.ensemble.members.col(static_cast<Eigen::Index>(i)), old_floes, state);
      for (std::size_t k = 0; k < floes.size(); ++k) {
        const double px = normal(init[i]), py = normal(init[i]);
        floes[k].x = wrap_point(y0[k] + cfg.obs_noise * Vec2(px, py));
        const double vx = normal(init[i]), vy = normal(init[i]);
        floes[k].v = eval(state.coeffs, floes[k].x) + cfg.velocity_spread * Vec2(vx, vy);
      }
      next.members.col(static_cast<Eigen::Index>(i)) = pack(layout, setup.modes, floes, state);
    }
    f.ensemble = std::move(next);
  }
  f.floe_ids = ids;
  f.model.layout = layout;
  f.model.floe_template = tmpl;
  f.obs = ObsModel::floe_positions(layout, cfg.obs_noise);
}

SubdomainFilter make_filter(int s, const ModelSetup& setup, const ObservationTable& table,
                            const ObservationSet& observations, std::uint64_t seed) {
  const RunConfig& cfg = setup.config;
  SubdomainFilter f;
  f.subdomain = s;
  f.model.modes = &setup.modes;
  f.model.propagators = make_propagators(setup.params, cfg.dt);
  f.model.dt = cfg.dt;
  f.model.integrator = cfg.integrator;
  const auto& ids = epoch_at(observations, 0).per_subdomain.at(static_cast<std::size_t>(s));
  reset_floe_block(f, setup, table, 0, ids, seed, 0);

  const auto n = static_cast<std::size_t>(cfg.ensemble_size);
  for (std::size_t i = 0; i < n; ++i) {
    f.forecast_rngs.push_back(make_rng(seed, Stream::EnsembleForecast, static_cast<std::uint64_t>(s), i));
    // The control replays the same initial modes and forecast noise without analysis.
    Rng init = make_rng(seed, Stream::EnsembleInit, static_cast<std::uint64_t>(s), i);
    f.control.push_back(sample_stationary(setup.modes, setup.params, init));
  }
  f.control_rngs = f.forecast_rngs;
  return f;
}

void forecast_control(SubdomainFilter& f, const ModelSetup& setup) {
  std::vector<Complex> noise(setup.modes.pair_count());
  const int substeps = setup.config.substeps();
  for (std::size_t i = 0; i < f.control.size(); ++i) {
    for (int s = 0; s < substeps; ++s) {
      // Same draw sequence per step as forecast(): floes consume no randomness.
      draw_mode_noise(f.control_rngs[i], noise);
      advance_modes(setup.modes, f.model.propagators, setup.config.dt, noise, f.control[i]);
    }
  }
}

ModeState control_mean(const SubdomainFilter& f, const ModeSet& modes) {
  ModeState mean = zero_state(modes);
  for (const auto& m : f.control)
    for (std::size_t k = 0; k < modes.size(); ++k) mean.coeffs[k] += m.coeffs[k];
  for (auto& c : mean.coeffs) c /= static_cast<double>(f.control.size());
  return mean;
}

} // namespace

ModelSetup make_model_setup(const RunConfig& config, double amplitude_scale, std::vector<Floe> floes) {
  config.validate();
  if (!(amplitude_scale > 0.0)) throw ConfigError("amplitude scale must be positive");
  ModelSetup setup;
  setup.config = config;
  setup.modes = build_mode_set(config.k_max, config.truncation);
  setup.params = config.mode_params(setup.modes, amplitude_scale);
  setup.amplitude_scale = amplitude_scale;
  setup.floes = std::move(floes);
  return setup;
}

std::vector<int> output_steps(const RunConfig& config) {
  std::vector<int> steps;
  const int total = config.obs_steps();
  for (int k = 0; k <= total; k += config.output_every) steps.push_back(k);
  if (steps.back() != total) steps.push_back(total);
  return steps;
}

double amplitude_scale_for(const ModeSet& modes, const ModeState& state, int grid_n, double target) {
  const double speed = eval_velocity_grid(modes, state, grid_n).max_speed();
  if (!(speed > 0.0)) return 1.0;
  return target / speed;
}

TruthRun run_truth(const RunConfig& config, std::uint64_t seed) {
  config.validate();
  TruthRun truth;
  truth.seed = seed;
  const ModeSet modes = build_mode_set(config.k_max, config.truncation);
  const FloeMaterial material = config.material();

  Rng floe_rng = make_rng(seed, Stream::TruthFloes);
  const auto radii = sample_radii(config.floe_count, config.radius_exponent, config.r_min, config.r_max, floe_rng);
  std::uniform_real_distribution<double> unif(0.0, kTwoPi);
  std::vector<Floe> floes;
  floes.reserve(radii.size());
  for (double r : radii) {
    const double x = unif(floe_rng);
    const double y = unif(floe_rng);
    floes.push_back(make_floe(material, r, Vec2(x, y), Vec2::Zero()));
  }

  Rng mode_rng = make_rng(seed, Stream::TruthModes);
  ModeState state = sample_stationary(modes, config.mode_params(modes, 1.0), mode_rng);
  double scale = config.amplitude_scale;
  if (!(scale > 0.0)) scale = amplitude_scale_for(modes, state, config.grid_n, config.ocean_speed_target);
  for (auto& c : state.coeffs) c *= scale;

  truth.setup = make_model_setup(config, scale, floes);
  const ModeSet& set = truth.setup.modes;
  const PointEvaluator eval(set);
  for (Floe& f : floes) f.v = eval(state.coeffs, f.x);
  truth.initial_floes = {floes, 0.0};

  const auto props = make_propagators(truth.setup.params, config.dt);
  Rng noise_rng = make_rng(seed, Stream::TruthNoise);
  std::vector<Complex> noise(set.pair_count());

  const int steps = config.obs_steps();
  const int substeps = config.substeps();
  truth.field_steps = output_steps(config);
  auto record = [&](int k) {
    truth.obs_times.push_back(k * config.dt_obs);
    truth.modes.push_back(state);
    truth.modes.back().time = k * config.dt_obs;
    std::vector<Vec2> pos(floes.size());
    for (std::size_t i = 0; i < floes.size(); ++i) pos[i] = floes[i].x;
    truth.positions.push_back(std::move(pos));
    if (std::find(truth.field_steps.begin(), truth.field_steps.end(), k) != truth.field_steps.end()) {
      FieldGrid g = eval_velocity_grid(set, state, config.grid_n);
      g.set_time(k * config.dt_obs);
      truth.fields.push_back(std::move(g));
    }
  };
  record(0);
  for (int k = 1; k <= steps; ++k) {
    for (int s = 0; s < substeps; ++s) {
      advance_truth_floes(floes, config, set, eval, state);
      draw_mode_noise(noise_rng, noise);
      advance_modes(set, props, config.dt, noise, state);
    }
    record(k);
  }
  return truth;
}

std::size_t ObservationSet::records_at(int step) const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [step](const ObservationRecord& r) { return r.step == step; }));
}

ObservationSet generate_observations(const TruthRun& truth, const RunConfig& config, std::uint64_t seed) {
  config.validate();
  const int steps = config.obs_steps();
  if (truth.positions.size() != static_cast<std::size_t>(steps) + 1)
    throw ConfigError("truth run does not cover every observation time of the config");
  const SubdomainLayout layout = partition(config.nx, config.ny);

  ObservationSet obs;
  obs.nx = config.nx;
  obs.ny = config.ny;
  obs.times = truth.obs_times;
  FloeState snapshot{truth.setup.floes, 0.0};
  // A refresh at the final time would never be forecast, so it is skipped.
  for (int k = 0; k == 0 || k < steps; k += (config.selection_refresh > 0 ? config.selection_refresh : steps + 1)) {
    for (std::size_t i = 0; i < snapshot.floes.size(); ++i) snapshot.floes[i].x = truth.positions[k][i];
    SelectionEpoch epoch;
    epoch.step = k;
    for (int s = 0; s < layout.count(); ++s)
      epoch.per_subdomain.push_back(select_observed_floes(snapshot, layout, s, config.obs_per_subdomain, config.r_min,
                                                          config.r_max, &obs.warnings));
    obs.epochs.push_back(std::move(epoch));
  }

  Rng rng = make_rng(seed, Stream::ObservationNoise);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k <= steps; ++k) {
    const SelectionEpoch& epoch = epoch_at(obs, k);
    for (const auto& ids : epoch.per_subdomain) {
      for (std::size_t id : ids) {
        const double nx = normal(rng), ny = normal(rng);
        const Vec2 noisy = truth.positions[k][id] + config.obs_noise * Vec2(nx, ny);
        obs.records.push_back({k, truth.obs_times[k], id, wrap_point(noisy)});
      }
    }
  }
  return obs;
}

AssimilationResult run_assimilation(const ModelSetup& setup, const ObservationSet& observations, std::uint64_t seed,
                                    const std::vector<FieldGrid>* truth_fields, std::size_t workers) {
  const RunConfig& cfg = setup.config;
  cfg.validate();
  if (!(cfg.obs_noise > 0.0)) throw ConfigError("config field 'obs_noise': must be > 0 for assimilation");
  if (observations.nx != cfg.nx || observations.ny != cfg.ny)
    throw ConfigError("observation set layout does not match the config layout");
  const int steps = cfg.obs_steps();
  const ObservationTable table(observations, steps);
  const SubdomainLayout layout = partition(cfg.nx, cfg.ny);
  const WeightGrid weights = gaussian_weights(layout, cfg.grid_n, cfg.sigma_o, cfg.weight_distance);
  const auto field_steps = output_steps(cfg);
  if (truth_fields && truth_fields->size() != field_steps.size())
    throw ConfigError("truth fields do not match the output steps of the config");

  const auto count = static_cast<std::size_t>(layout.count());
  std::vector<SubdomainFilter> filters(count);
  parallel_for(count, workers, [&](std::size_t s) {
    filters[s] = make_filter(static_cast<int>(s), setup, table, observations, seed);
  });

  AssimilationResult result;
  result.field_steps = field_steps;
  double forecast_s = 0.0, analysis_s = 0.0, fusion_s = 0.0;
  std::vector<std::vector<DiagnosticRecord>> diag(count);

  auto record_fields = [&](int k) {
    const auto start = Clock::now();
    std::vector<FieldGrid> local(count);
    parallel_for(count, workers, [&](std::size_t s) {
      const auto& f = filters[s];
      local[s] = eval_velocity_grid(setup.modes, mean_modes(f.ensemble, f.model.layout, setup.modes), cfg.grid_n);
    });
    FieldGrid fused = fuse_fields(local, weights);
    fused.set_time(k * cfg.dt_obs);
    result.fields.push_back(std::move(fused));
    fusion_s += seconds_since(start);

    std::vector<FieldGrid> control(count);
    for (std::size_t s = 0; s < count; ++s)
      control[s] = eval_velocity_grid(setup.modes, control_mean(filters[s], setup.modes), cfg.grid_n);
    FieldGrid fused_control = fuse_fields(control, weights);
    fused_control.set_time(k * cfg.dt_obs);
    result.control_fields.push_back(std::move(fused_control));
  };

  std::size_t next_field = 0;
  if (field_steps[next_field] == 0) {
    record_fields(0);
    ++next_field;
  }
  std::uint64_t epoch_index = 0;
  const SelectionEpoch* epoch = &epoch_at(observations, 0);
  for (int k = 1; k <= steps; ++k) {
    auto start = Clock::now();
    for (auto& f : filters)
      f.ensemble = forecast(f.ensemble, f.model, cfg.dt_obs, cfg.substeps(), f.forecast_rngs, workers);
    forecast_s += seconds_since(start);
    parallel_for(count, workers, [&](std::size_t s) { forecast_control(filters[s], setup); });

    const SelectionEpoch* now = &epoch_at(observations, k);
    if (now != epoch) {
      epoch = now;
      ++epoch_index;
      parallel_for(count, workers, [&](std::size_t s) {
        reset_floe_block(filters[s], setup, table, k, epoch->per_subdomain.at(s), seed, epoch_index);
      });
    }

    start = Clock::now();
    parallel_for(count, workers, [&](std::size_t s) {
      auto& f = filters[s];
      if (f.floe_ids.empty()) return;
      const auto y_pos = observed_positions(table, k, f.floe_ids);
      Eigen::VectorXd y(static_cast<Eigen::Index>(2 * y_pos.size()));
      for (std::size_t j = 0; j < y_pos.size(); ++j) y.segment<2>(static_cast<Eigen::Index>(2 * j)) = y_pos[j];
      AnalysisDiagnostics d;
      f.ensemble = etkf_analysis(f.ensemble, y, f.obs, cfg.inflation, &d);
      diag[s].push_back({k, static_cast<int>(s), y_pos.size(), d.innovation_rms, d.spread_before, d.spread_after});
    });
    analysis_s += seconds_since(start);

    if (next_field < field_steps.size() && field_steps[next_field] == k) {
      record_fields(k);
      ++next_field;
    }
  }

  for (auto& d : diag) result.diagnostics.insert(result.diagnostics.end(), d.begin(), d.end());
  std::stable_sort(result.diagnostics.begin(), result.diagnostics.end(),
                   [](const DiagnosticRecord& a, const DiagnosticRecord& b) { return a.step < b.step; });
  for (const auto& f : filters) result.final_local_modes.push_back(mean_modes(f.ensemble, f.model.layout, setup.modes));

  if (truth_fields) {
    SkillReport rep;
    rep.seed = seed;
    rep.config_hash = config_hash(cfg);
    rep.forecast_s = forecast_s;
    rep.analysis_s = analysis_s;
    rep.fusion_s = fusion_s;
    rep.runtime_s = forecast_s + analysis_s + fusion_s;
    for (std::size_t i = 0; i < field_steps.size(); ++i) {
      rep.times.push_back(field_steps[i] * cfg.dt_obs);
      rep.nrmse_series.push_back(metric_or_nan(nrmse, result.fields[i], (*truth_fields)[i]));
      rep.pcc_series.push_back(metric_or_nan(pcc, result.fields[i], (*truth_fields)[i]));
      rep.control_nrmse_series.push_back(metric_or_nan(nrmse, result.control_fields[i], (*truth_fields)[i]));
    }
    rep.nrmse = rep.nrmse_series.back();
    rep.pcc = rep.pcc_series.back();
    rep.control_nrmse = rep.control_nrmse_series.back();
    rep.control_pcc = metric_or_nan(pcc, result.control_fields.back(), truth_fields->back());
    result.report = std::move(rep);
  }
  return result;
}

std::vector<SweepCase> standard_sweep_cases() {
  return {{1, 1, {20, 50, 100, 200}}, {2, 2, {10, 20, 50, 100}}, {4, 4, {5, 10, 20, 50}}};
}

std::vector<SweepRow> sweep(const RunConfig& config_template, const std::vector<SweepCase>& cases,
                            const std::vector<std::uint64_t>& seeds, std::size_t workers) {
  struct Job {
    std::size_t config_index;
    std::size_t seed_index;
    RunConfig config;
  };
  std::vector<RunConfig> configs;
  for (const auto& c : cases) {
    for (std::size_t budget : c.obs_per_subdomain) {
      RunConfig cfg = config_template;
      cfg.nx = c.nx;
      cfg.ny = c.ny;
      cfg.obs_per_subdomain = budget;
      cfg.validate();
      configs.push_back(cfg);
    }
  }
  if (configs.empty() || seeds.empty()) return {};

  std::vector<TruthRun> truths(seeds.size());
  parallel_for(seeds.size(), workers, [&](std::size_t i) { truths[i] = run_truth(config_template, seeds[i]); });

  std::vector<Job> jobs;
  for (std::size_t c = 0; c < configs.size(); ++c)
    for (std::size_t s = 0; s < seeds.size(); ++s) jobs.push_back({c, s, configs[c]});

  std::vector<SweepRow> per_job(jobs.size());
  parallel_for(jobs.size(), workers, [&](std::size_t j) {
    const Job& job = jobs[j];
    const TruthRun& truth = truths[job.seed_index];
    const std::uint64_t seed = seeds[job.seed_index];
    ModelSetup setup = truth.setup;
    setup.config = job.config;
    const ObservationSet obs = generate_observations(truth, job.config, seed);
    const auto result = run_assimilation(setup, obs, seed, &truth.fields, 1);
    const SkillReport& rep = *result.report;
    SweepRow row;
    row.nx = job.config.nx;
    row.ny = job.config.ny;
    row.obs_per_subdomain = job.config.obs_per_subdomain;
    row.total_obs = obs.records_at(0);
    row.seed = seed;
    row.nrmse = rep.nrmse;
    row.pcc = rep.pcc;
    row.runtime_s = rep.runtime_s;
    row.analysis_s = rep.analysis_s;
    row.control_nrmse = rep.control_nrmse;
    row.control_pcc = rep.control_pcc;
    per_job[j] = row;
  });

  std::vector<SweepRow> rows;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    SweepRow mean;
    mean.aggregated = true;
    const double n = static_cast<double>(seeds.size());
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const SweepRow& r = per_job[c * seeds.size() + s];
      rows.push_back(r);
      mean.nx = r.nx;
      mean.ny = r.ny;
      mean.obs_per_subdomain = r.obs_per_subdomain;
      mean.total_obs += r.total_obs;
      mean.nrmse += r.nrmse / n;
      mean.pcc += r.pcc / n;
      mean.runtime_s += r.runtime_s / n;
      mean.analysis_s += r.analysis_s / n;
      mean.control_nrmse += r.control_nrmse / n;
      mean.control_pcc += r.control_pcc / n;
    }
    mean.total_obs = static_cast<std::size_t>(std::lround(static_cast<double>(mean.total_obs) / n));
    rows.push_back(mean);
  }
  return rows;
}

CalibrationReport calibrate(const RunConfig& config, std::uint64_t seed, int samples, double ice_speed_target) {
  config.validate();
  if (samples < 1) throw ConfigError("calibration needs at least one sample");
  CalibrationReport rep;
  rep.ice_speed_target = ice_speed_target;
  const ModeSet modes = build_mode_set(config.k_max, config.truncation);
  const auto unit_params = config.mode_params(modes, 1.0);
  for (int i = 0; i < samples; ++i) {
    Rng rng = make_rng(seed, Stream::Calibration, static_cast<std::uint64_t>(i));
    const ModeState s = sample_stationary(modes, unit_params, rng);
    rep.amplitude_samples.push_back(amplitude_scale_for(modes, s, config.grid_n, config.ocean_speed_target));
  }
  for (double a : rep.amplitude_samples) rep.amplitude_scale += a / samples;

  // Explicit drag is stable while K dt |u - v| < 1 with K = c_d rho_o / (rho pi h);
  // |u - v| is bounded by twice the target ocean speed for floes starting at rest.
  const double k_per_cd = config.ocean_density / (config.ice_density * std::numbers::pi * config.thickness);
  const double cd_max = 1.0 / (k_per_cd * config.dt * 2.0 * config.ocean_speed_target);
  const auto params = config.mode_params(modes, rep.amplitude_scale);
  const auto props = make_propagators(params, config.dt);
  const PointEvaluator eval(modes);
  const int steps = static_cast<int>(std::lround(std::min(config.t_final, 1.0) / config.dt));
  constexpr int kCandidates = 24;
  constexpr std::size_t kFloes = 200;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int c = 0; c < kCandidates; ++c) {
    const double cd = cd_max * std::pow(1e-3, 1.0 - static_cast<double>(c) / (kCandidates - 1));
    Rng rng = make_rng(seed, Stream::Calibration, 1000);
    ModeState state = sample_stationary(modes, params, rng);
    FloeMaterial material = config.material();
    material.drag_coefficient = cd;
    std::uniform_real_distribution<double> unif(0.0, kTwoPi);
    std::vector<Floe> floes;
    for (std::size_t f = 0; f < kFloes; ++f) {
      const double x = unif(rng), y = unif(rng);
      floes.push_back(make_floe(material, config.r_max, Vec2(x, y), Vec2::Zero()));
    }
    std::vector<Complex> noise(modes.pair_count());
    double vmax = 0.0;
    const auto ocean_at = [&](const Vec2& x) { return eval(state.coeffs, x); };
    for (int s = 0; s < steps; ++s) {
      for (Floe& f : floes) {
        advance_floe(f, ocean_at, config.dt, config.integrator);
        vmax = std::max(vmax, f.v.norm());
      }
      draw_mode_noise(rng, noise);
      advance_modes(modes, props, config.dt, noise, state);
    }
    const double gap = std::abs(vmax - ice_speed_target);
    if (gap < best_gap) {
      best_gap = gap;
      rep.drag_coefficient = cd;
      rep.max_ice_speed = vmax;
    }
  }
  rep.ice_target_reached = best_gap <= 0.1 * ice_speed_target;
  return rep;
}

} // namespace floeda

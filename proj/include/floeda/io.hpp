#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "floeda/config.hpp"
#include "floeda/experiment.hpp"
#include "floeda/field_grid.hpp"

namespace floeda::io {

/// Binary field file: a 32-byte little-endian header followed by the
/// row-major (n, n, components) float64 payload.
///
///   offset  size  field
///        0     8  magic "FLOEGRID"
///        8     4  version (uint32, currently 1)
///       12     4  grid_n (uint32)
///       16     4  components (uint32, 2)
///       20     4  reserved (uint32, 0)
///       24     8  time (float64)
inline constexpr char kFieldMagic[8] = {'F', 'L', 'O', 'E', 'G', 'R', 'I', 'D'};
inline constexpr std::uint32_t kFieldVersion = 1;
inline constexpr std::size_t kFieldHeaderBytes = 32;

enum class FieldFormat { Binary, Csv };

void write_field_binary(const std::filesystem::path& path, const FieldGrid& field);
FieldGrid read_field_binary(const std::filesystem::path& path);

/// CSV with header `time,i,j,x,y,u,v`, one row per node.
void write_field_csv(const std::filesystem::path& path, const FieldGrid& field);
FieldGrid read_field_csv(const std::filesystem::path& path);

/// Writes `<stem>.bin` or `<stem>.csv`; returns the path written.
std::filesystem::path write_field(const std::filesystem::path& stem, const FieldGrid& field, FieldFormat format);
/// Dispatches on the extension.
FieldGrid read_field(const std::filesystem::path& path);

/// CSV with header `time,floe_id,x,y`; values round-trip exactly.
void write_observations_csv(const std::filesystem::path& path, const std::vector<ObservationRecord>& records);
/// Steps are recovered as round(time / dt_obs).
std::vector<ObservationRecord> read_observations_csv(const std::filesystem::path& path, double dt_obs);

/// CSV with header `floe_id,radius,mass,drag,x,y,vx,vy`.
void write_floes_csv(const std::filesystem::path& path, const std::vector<Floe>& floes);
std::vector<Floe> read_floes_csv(const std::filesystem::path& path);

/// Selection epochs, layout and warnings as JSON.
void write_selection_json(const std::filesystem::path& path, const ObservationSet& obs);
/// Fills nx, ny, epochs and warnings of `obs`.
void read_selection_json(const std::filesystem::path& path, ObservationSet& obs);

struct RunManifest {
  RunConfig config;
  std::uint64_t seed = 0;
  double amplitude_scale = 1.0;
  std::string config_hash;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

void write_skill_report(const std::filesystem::path& path, const SkillReport& report);
SkillReport read_skill_report(const std::filesystem::path& path);

/// CSV with header
/// `kind,grid,l_obs,total_obs,seed,nrmse,pcc,runtime_s,analysis_s,control_nrmse,control_pcc`
/// where kind is `seed` or `mean` (seed left empty on mean rows).
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path);

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticRecord>& records);

} // namespace floeda::io

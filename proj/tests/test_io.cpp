#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "floeda/errors.hpp"
#include "floeda/io.hpp"

using namespace floeda;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "floeda_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

FieldGrid random_field(int n, std::uint64_t seed, double time) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  FieldGrid g(n, time);
  for (double& v : g.data()) v = normal(rng);
  return g;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

} // namespace

TEST_CASE("binary field layout is byte-exact") {
  const FieldGrid g = random_field(5, 1, 1.25);
  const fs::path p = scratch("layout.bin");
  io::write_field_binary(p, g);
  const std::string bytes = read_bytes(p);
  REQUIRE(bytes.size() == 32 + 5 * 5 * 2 * 8);
  CHECK(bytes.substr(0, 8) == "FLOEGRID");
  std::uint32_t u[4];
  std::memcpy(u, bytes.data() + 8, sizeof u);
  CHECK(u[0] == 1);
  CHECK(u[1] == 5);
  CHECK(u[2] == 2);
  CHECK(u[3] == 0);
  double t;
  std::memcpy(&t, bytes.data() + 24, 8);
  CHECK(t == 1.25);
  // Node (i=3, j=1), component v lives at ((1 * 5 + 3) * 2 + 1).
  double v;
  std::memcpy(&v, bytes.data() + 32 + 8 * ((1 * 5 + 3) * 2 + 1), 8);
  CHECK(v == g.at(3, 1, 1));

  const FieldGrid back = io::read_field_binary(p);
  CHECK(back.n() == 5);
  CHECK(back.time() == 1.25);
  CHECK(back.data() == g.data());
}

TEST_CASE("corrupt binary fields are rejected") {
  const FieldGrid g = random_field(4, 2, 0.0);
  const fs::path p = scratch("corrupt.bin");
  io::write_field_binary(p, g);
  const std::string good = read_bytes(p);

  write_bytes(p, good.substr(0, good.size() - 1));
  CHECK_THROWS_AS(io::read_field_binary(p), ConfigError);
  write_bytes(p, good + "x");
  CHECK_THROWS_AS(io::read_field_binary(p), ConfigError);
  write_bytes(p, good.substr(0, 20));
  CHECK_THROWS_AS(io::read_field_binary(p), ConfigError);
  std::string bad = good;
  bad[0] = 'X';
  write_bytes(p, bad);
  CHECK_THROWS_AS(io::read_field_binary(p), ConfigError);
  bad = good;
  bad[8] = 2;
  write_bytes(p, bad);
  CHECK_THROWS_AS(io::read_field_binary(p), ConfigError);
  bad = good;
  bad[16] = 3;
  write_bytes(p, bad);
  CHECK_THROWS_AS(io::read_field_binary(p), ConfigError);
  bad = good;
  bad[12] = 5;
  write_bytes(p, bad);
  CHECK_THROWS_AS(io::read_field_binary(p), ConfigError);
  CHECK_THROWS_AS(io::read_field_binary(scratch("missing.bin")), ConfigError);
}

TEST_CASE("CSV fields round trip") {
  const FieldGrid g = random_field(6, 3, 0.5);
  const fs::path stem = scratch("field");
  const fs::path p = io::write_field(stem, g, io::FieldFormat::Csv);
  CHECK(p.extension() == ".csv");
  std::ifstream in(p);
  std::string header;
  std::getline(in, header);
  CHECK(header == "time,i,j,x,y,u,v");
  const FieldGrid back = io::read_field(p);
  CHECK(back.time() == 0.5);
  CHECK(back.data() == g.data());

  const fs::path b = io::write_field(stem, g, io::FieldFormat::Binary);
  CHECK(b.extension() == ".bin");
  CHECK(io::read_field(b).data() == g.data());
}

TEST_CASE("observation CSV round trips exactly") {
  Rng rng(4);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  std::vector<ObservationRecord> recs;
  for (int k = 0; k < 5; ++k)
    for (std::size_t f : {3u, 17u, 1999u}) {
      const double x = u(rng), y = u(rng);
      recs.push_back({k, k * 1e-2, f, Vec2(x, y)});
    }
  const fs::path p = scratch("obs.csv");
  io::write_observations_csv(p, recs);
  std::ifstream in(p);
  std::string header;
  std::getline(in, header);
  CHECK(header == "time,floe_id,x,y");
  const auto back = io::read_observations_csv(p, 1e-2);
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(back[i].step == recs[i].step);
    CHECK(back[i].time == recs[i].time);
    CHECK(back[i].floe == recs[i].floe);
    CHECK(back[i].position == recs[i].position);
  }
  CHECK_THROWS_AS(io::read_observations_csv(p, 3e-2), ConfigError);
}

TEST_CASE("floe CSV round trip") {
  FloeMaterial mat;
  std::vector<Floe> floes = {make_floe(mat, 0.004, Vec2(1, 2), Vec2(0.1, -0.2)),
                             make_floe(mat, 0.0123456789, Vec2(6.2, 0.001), Vec2(3, 4))};
  const fs::path p = scratch("floes.csv");
  io::write_floes_csv(p, floes);
  const auto back = io::read_floes_csv(p);
  REQUIRE(back.size() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(back[i].radius == floes[i].radius);
    CHECK(back[i].mass == floes[i].mass);
    CHECK(back[i].drag == floes[i].drag);
    CHECK(back[i].x == floes[i].x);
    CHECK(back[i].v == floes[i].v);
  }
}

TEST_CASE("sweep CSV schema") {
  std::vector<SweepRow> rows(3);
  rows[0].nx = rows[0].ny = 2;
  rows[0].obs_per_subdomain = 50;
  rows[0].total_obs = 200;
  rows[0].seed = 7;
  rows[0].nrmse = 0.65;
  rows[0].pcc = 0.76;
  rows[0].runtime_s = 12.5;
  rows[1] = rows[0];
  rows[1].seed = 8;
  rows[2] = rows[0];
  rows[2].aggregated = true;
  const fs::path p = scratch("sweep.csv");
  io::write_sweep_csv(p, rows);
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  CHECK(line == "kind,grid,l_obs,total_obs,seed,nrmse,pcc,runtime_s,analysis_s,control_nrmse,control_pcc");
  std::getline(in, line);
  CHECK(line.rfind("seed,2x2,50,200,7,", 0) == 0);
  std::getline(in, line);
  std::getline(in, line);
  CHECK(line.rfind("mean,2x2,50,200,,", 0) == 0);
  const auto back = io::read_sweep_csv(p);
  REQUIRE(back.size() == 3);
  CHECK(back[1].seed == 8);
  CHECK(back[2].aggregated);
  CHECK(back[0].nrmse == 0.65);
  CHECK(back[0].grid() == "2x2");

  io::write_sweep_csv(p, {});
  CHECK_THROWS_AS(io::read_sweep_csv(p), ConfigError);
  std::ofstream(p) << "kind,grid\nseed,1x1\n";
  CHECK_THROWS_AS(io::read_sweep_csv(p), ConfigError);
}

TEST_CASE("manifest, selection and skill reports round trip") {
  io::RunManifest m;
  m.config = desk_scale_config();
  m.config.nx = 4;
  m.seed = 42;
  m.amplitude_scale = 3.25;
  const fs::path mp = scratch("manifest.json");
  io::write_manifest(mp, m);
  const auto mb = io::read_manifest(mp);
  CHECK(mb.seed == 42);
  CHECK(mb.amplitude_scale == 3.25);
  CHECK(mb.config.nx == 4);
  CHECK(mb.config_hash == config_hash(m.config));

  ObservationSet obs;
  obs.nx = 2;
  obs.ny = 2;
  obs.epochs.push_back({0, {{1, 2}, {3}, {}, {9, 8, 7}}});
  obs.warnings.push_back({2, 5, 0});
  const fs::path sp = scratch("selection.json");
  io::write_selection_json(sp, obs);
  ObservationSet back;
  io::read_selection_json(sp, back);
  CHECK(back.nx == 2);
  CHECK(back.epochs.size() == 1);
  CHECK(back.epochs[0].per_subdomain == obs.epochs[0].per_subdomain);
  CHECK(back.warnings.size() == 1);
  CHECK(back.warnings[0].requested == 5);

  SkillReport r;
  r.nrmse = 0.5;
  r.pcc = std::nan("");
  r.times = {0.0, 0.1};
  r.nrmse_series = {1.0, 0.5};
  r.pcc_series = {std::nan(""), 0.8};
  r.control_nrmse_series = {1.0, 1.0};
  r.config_hash = "abc";
  r.seed = 3;
  const fs::path rp = scratch("skill.json");
  io::write_skill_report(rp, r);
  const auto rb = io::read_skill_report(rp);
  CHECK(rb.nrmse == 0.5);
  CHECK(std::isnan(rb.pcc));
  CHECK(std::isnan(rb.pcc_series[0]));
  CHECK(rb.pcc_series[1] == 0.8);
  CHECK(rb.config_hash == "abc");
}

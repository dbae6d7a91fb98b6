#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qvdp/io.hpp"
#include "qvdp/scenarios.hpp"

using namespace qvdp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream o;
  o << in.rdbuf();
  return o.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("qvdp_harness_" + name);
  fs::remove_all(p);
  return p;
}

// All CSV files of a run directory, by name.
std::map<std::string, std::string> csvs(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".csv") out[e.path().filename().string()] = slurp(e.path());
  return out;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Io;
}

ExperimentConfig small_quantum(Scenario s) {
  ExperimentConfig c = default_config(s, 11);
  c.effective = reference_effective(Regime::Quantum);
  c.cutoffs = {8, 8};
  c.readout.shots = 0;
  c.noise.shots = 0;
  c.noise.ensemble_size = 3;
  return c;
}

}  // namespace

TEST_CASE("config parsing and defaults") {
  auto c = config_from_json(json::parse(R"({"scenario": "sync", "seed": 5,
      "effective": {"preset": "classical", "V_hz": 50}, "scan": {"phis": [0]}})"));
  CHECK(c.scenario == Scenario::Sync);
  CHECK(c.seed == 5);
  CHECK(c.effective->kappa_plus == doctest::Approx(2 * M_PI * 120));
  CHECK(c.effective->kappa_minus == doctest::Approx(2 * M_PI * 17));
  CHECK(c.effective->V == doctest::Approx(2 * M_PI * 50));
  CHECK(c.cutoffs == std::vector<int>{18, 18});
  CHECK(c.n_uncoupled == 15);
  CHECK(c.n_coupled == 10);
  CHECK(c.noise.coupling_rel_sigma == 0.02);
  CHECK(c.noise.freq_sigma_hz == 37.0);
  CHECK(c.noise.ensemble_size == 20);
  CHECK(c.noise.shots == c.readout.shots);

  auto bad = [](const char* text) {
    return kind_of([&] { config_from_json(json::parse(text)); });
  };
  CHECK(bad(R"({"scenario": "sync", "effective": {}, "scan": {"phis": [0]}})") == ErrorKind::Config);
  CHECK(bad(R"({"scenario": "sync", "seed": 1, "effective": {}, "scan": {"phis": [0]}, "colour": 1})") ==
        ErrorKind::Config);
  CHECK(bad(R"({"scenario": "sync", "seed": 1, "scan": {"phis": [0]}})") == ErrorKind::Config);
  CHECK(bad(R"({"scenario": "sync", "seed": 1, "effective": {}, "schedule": {"preset": "quantum"},
               "scan": {"phis": [0]}})") == ErrorKind::Config);
  CHECK(bad(R"({"scenario": "sync", "seed": 1, "effective": {"V": 1, "V_hz": 1}, "scan": {"phis": [0]}})") ==
        ErrorKind::Config);
  CHECK(bad(R"({"scenario": "arnold", "seed": 1, "effective": {}})") == ErrorKind::Config);
  CHECK(bad(R"({"scenario": "sense", "seed": 1, "engine": "stroboscopic",
               "schedule": {"preset": "quantum"}, "scan": {"detuning_hz": [0]}})") == ErrorKind::Config);
  CHECK(bad(R"({"scenario": "sync", "seed": -3, "effective": {}, "scan": {"phis": [0]}})") ==
        ErrorKind::Config);
  CHECK(bad(R"({"scenario": "waltz", "seed": 1})") == ErrorKind::Config);
}

TEST_CASE("config round trip is lossless") {
  auto c = default_config(Scenario::Sync, 0xfedcba9876543210ULL);
  c.engine = Engine::Stroboscopic;
  c.effective.reset();
  c.schedule = reference_schedule(Regime::NearClassical, 0.3, 12.5, -7.25);
  c.readout.phi2 = 0.1;
  c.noise.shots = 77;
  c.phase_method = PhaseMethod::WignerMarginal;
  const json j = config_to_json(c);
  const auto back = config_from_json(j);
  CHECK(config_to_json(back).dump() == j.dump());
  CHECK(back.seed == 0xfedcba9876543210ULL);
  REQUIRE(back.schedule->segments.size() == c.schedule->segments.size());
  for (std::size_t i = 0; i < c.schedule->segments.size(); ++i) {
    const auto &a = c.schedule->segments[i], &b = back.schedule->segments[i];
    CHECK(a.kind == b.kind);
    CHECK(a.mode == b.mode);
    CHECK(a.rabi == b.rabi);
    CHECK(a.rabi2 == b.rabi2);
    CHECK(a.eta == b.eta);
    CHECK(a.eta2 == b.eta2);
    CHECK(a.phase == b.phase);
    CHECK(a.duration == b.duration);
  }
  CHECK(back.schedule->delta1 == c.schedule->delta1);
  CHECK(back.schedule->delta2 == c.schedule->delta2);
  CHECK(back.schedule->quoted_kappa_plus == c.schedule->quoted_kappa_plus);

  auto sched = schedule_from_json(schedule_to_json(*c.schedule));
  CHECK(schedule_to_json(sched).dump() == schedule_to_json(*c.schedule).dump());
}

TEST_CASE("config hash tracks meaningful fields only") {
  auto c = default_config(Scenario::Arnold, 1);
  const auto h = config_hash(c);
  auto d = c;
  d.output_dir = "elsewhere";
  d.threads = 4;
  CHECK(config_hash(d) == h);
  d = c;
  d.seed = 2;
  CHECK(config_hash(d) != h);
  d = c;
  d.effective->kappa_minus *= 1.0 + 1e-15;
  CHECK(config_hash(d) != h);
  d = c;
  d.scan.detuning_hz.back() = 201;
  CHECK(config_hash(d) != h);
  d = c;
  d.noise.shots = 1;
  CHECK(config_hash(d) != h);
}

TEST_CASE("noise ensemble") {
  EffectiveParams base = reference_effective(Regime::NearClassical);
  base.delta2 = 3.0;
  NoiseSpec none;
  none.coupling_rel_sigma = 0.0;
  none.freq_sigma_hz = 0.0;
  none.ensemble_size = 5;
  for (const auto& p : noise_ensemble(base, none, 9)) {
    CHECK(p.V == base.V);
    CHECK(p.delta2 == base.delta2);
    CHECK(p.kappa_plus == base.kappa_plus);
  }

  NoiseSpec big;
  big.ensemble_size = 10000;
  auto e = noise_ensemble(base, big, 42);
  std::vector<double> v, f;
  for (const auto& p : e) {
    v.push_back(p.V / base.V);
    f.push_back((p.delta2 - base.delta2) / (2 * M_PI));
    CHECK(p.delta1 == base.delta1);
  }
  CHECK(stats(v).std == doctest::Approx(0.02).epsilon(0.05));
  CHECK(stats(v).mean == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(stats(f).std == doctest::Approx(37.0).epsilon(0.05));

  auto again = noise_ensemble(base, big, 42);
  for (std::size_t i = 0; i < e.size(); ++i) {
    CHECK(again[i].V == e[i].V);
    CHECK(again[i].delta2 == e[i].delta2);
  }
  CHECK(noise_ensemble(base, big, 42, 1)[0].V != e[0].V);
  CHECK(noise_ensemble(base, big, 43)[0].V != e[0].V);

  NoiseSpec empty;
  empty.ensemble_size = 0;
  CHECK(kind_of([&] { noise_ensemble(base, empty, 1); }) == ErrorKind::Config);
}

TEST_CASE("stats and parallel_for") {
  auto s = stats({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == 2.5);
  CHECK(s.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(stats({7.0}).std == 0.0);

  std::vector<double> a(50), b(50);
  parallel_for(50, 1, [&](int i) { a[i] = std::sin(i); });
  parallel_for(50, 4, [&](int i) { b[i] = std::sin(i); });
  CHECK(a == b);
  CHECK_THROWS_AS(parallel_for(10, 3, [](int i) {
                    if (i == 7) throw Error(ErrorKind::Range, "x");
                  }),
                  Error);
}

TEST_CASE("contour on a linear field") {
  std::vector<double> v{0, 1, 2}, d{-1, 0, 1};
  std::vector<std::vector<double>> z(3, std::vector<double>(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) z[i][j] = 0.1 * v[i];  // level 0.05 crosses at v = 0.5
  auto segs = contour(v, d, z, 0.05);
  REQUIRE(segs.size() == 2);
  for (const auto& s : segs) {
    CHECK(s.v0 == doctest::Approx(0.5));
    CHECK(s.v1 == doctest::Approx(0.5));
    CHECK(std::abs(s.d1 - s.d0) == doctest::Approx(1.0));
  }
  // no crossing
  for (auto& row : z)
    for (auto& x : row) x = 1.0;
  CHECK(contour(v, d, z, 0.05).empty());
}

TEST_CASE("csv formatting") {
  CHECK(fmt_double(0.1) == "0.1");
  CHECK(fmt_double(-0.0) == "0");
  CHECK(std::stod(fmt_double(M_PI)) == M_PI);
  CsvTable t({"a", "b"});
  t.meta("k", 2.5);
  t.row({1.0, 2.0});
  CHECK(t.str() == "# k: 2.5\na,b\n1,2\n");
  CHECK_THROWS_AS(t.row({1.0}), Error);
}

TEST_CASE("sync scenario reruns are byte identical, including threads") {
  auto c = small_quantum(Scenario::Sync);
  c.readout.shots = 100;
  const auto da = scratch("sync_a"), db = scratch("sync_b");
  c.output_dir = da.string();
  REQUIRE(run_scenario(c).exit_code == 0);
  c.output_dir = db.string();
  c.threads = 3;
  REQUIRE(run_scenario(c).exit_code == 0);
  auto a = csvs(da), b = csvs(db);
  CHECK(a.size() >= 7);
  CHECK(a == b);
  auto m = json::parse(slurp(fs::path(c.output_dir) / "manifest.json"));
  CHECK(m["status"] == "ok");
  CHECK(m["seed"] == 11);
  CHECK(m["config_hash"] == hex64(config_hash(c)));
  CHECK(m["checks"].size() > 0);
}

TEST_CASE("arnold sweep: trends, offset, reproducibility") {
  auto c = small_quantum(Scenario::Arnold);
  c.scan.v_over_v0 = {0.0, 0.25, 1.0};
  c.scan.detuning_hz = {0.0, 150.0};
  auto r = arnold_sweep(c, c.scan.v_over_v0, c.scan.detuning_hz);
  REQUIRE(r.points.size() == 6);
  for (const auto& p : r.points) {
    CHECK(p.error.empty());
    CHECK(p.I.std >= 0.0);
    CHECK(p.members.size() == 3);
  }
  auto I = [&](int iv, int id) { return r.points[iv * 2 + id].I.mean; };
  CHECK(I(2, 0) > I(1, 0));
  CHECK(I(2, 0) > I(2, 1));
  CHECK(I(0, 0) < 0.02);
  CHECK(r.offset == doctest::Approx(0.5 * (I(0, 0) + I(0, 1))));

  const auto da = scratch("arn_a"), db = scratch("arn_b");
  c.output_dir = da.string();
  c.readout.shots = c.noise.shots = 50;
  REQUIRE(run_scenario(c).exit_code == 0);
  c.output_dir = db.string();
  c.threads = 4;
  REQUIRE(run_scenario(c).exit_code == 0);
  CHECK(csvs(da) == csvs(db));
}

TEST_CASE("sense sweep: drive on and off") {
  auto c = small_quantum(Scenario::Sense);
  c.effective = reference_effective(Regime::Quantum, M_PI);
  c.effective->drive_amp = c.effective->kappa_plus;
  c.scan.detuning_hz = {0.0, 200.0};
  auto pts = sense_sweep(c, c.scan.detuning_hz);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].error.empty());
  CHECK(pts[0].S2.mean > pts[1].S2.mean);
  CHECK(pts[0].S1.mean > 0.3);
  c.effective->drive_amp = 0.0;
  for (const auto& p : sense_sweep(c, c.scan.detuning_hz)) {
    CHECK(p.S1.mean < 1e-10);
    CHECK(p.S2.mean < 1e-10);
  }
}

TEST_CASE("exit codes and failing stage") {
  auto c = default_config(Scenario::TomoCheck, 1);
  c.cutoffs = {8};  // too small for coherent(2)
  c.output_dir = scratch("fail").string();
  auto r = run_scenario(c);
  CHECK(r.exit_code == 3);
  CHECK(r.failed_stage == "tomo coherent2");
  auto m = json::parse(slurp(fs::path(c.output_dir) / "manifest.json"));
  CHECK(m["status"] == "failed");
  CHECK(m["failed_stage"] == "tomo coherent2");

  auto bad = default_config(Scenario::Arnold, 1);
  bad.scan.v_over_v0.clear();
  bad.output_dir = scratch("bad").string();
  CHECK(run_scenario(bad).exit_code == 2);
}

TEST_CASE("stroboscopic member steady state reduces to the modes") {
  ExperimentConfig c = default_config(Scenario::Arnold, 4);
  c.engine = Engine::Stroboscopic;
  c.effective.reset();
  c.schedule = reference_schedule(Regime::Quantum, 0.0);
  c.cutoffs = {4, 4};
  c.n_uncoupled = 2;
  c.n_coupled = 2;
  auto s = member_steady_state(c, nullptr, 1.0, 0.0, 1.0, 0.0);
  CHECK(s.layout() == SpaceLayout::modes({4, 4}));
  CHECK(std::abs(s.rho().trace() - 1.0) < 1e-10);
  auto z = member_steady_state(c, nullptr, 0.0, 0.0, 1.0, 0.0);
  // V = 0 switches the coupling off: the modes stay uncorrelated
  CHECK(von_neumann_mi(z) < 1e-8);
}

TEST_CASE("shipped configs load") {
  int n = 0;
  for (const auto& e : fs::directory_iterator(fs::path(QVDP_SOURCE_DIR) / "configs")) {
    if (e.path().extension() != ".json") continue;
    INFO(e.path().string());
    auto c = load_config(e.path().string());
    CHECK(config_hash(c) == config_hash(config_from_json(config_to_json(c))));
    ++n;
  }
  CHECK(n >= 7);
}

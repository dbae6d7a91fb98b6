#include "qvdp/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "qvdp/io.hpp"

namespace qvdp {

using nlohmann::json;

namespace {

const double kTwoPi = 2 * M_PI;

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

void check_keys(const json& j, const std::string& where, std::set<std::string> allowed) {
  if (!j.is_object()) bad(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) bad("unknown key '" + it.key() + "' in " + where);
}

double num(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number()) bad(where + "." + key + " must be a number");
  return v.get<double>();
}

int integer(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) bad(where + "." + key + " must be an integer");
  return v.get<int>();
}

std::vector<double> numbers(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_array()) bad(where + "." + key + " must be an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) bad(where + "." + key + " must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

// Reads `key` in rad/s or `key_hz` in Hz. Both present is an error.
void rate(const json& j, const std::string& key, const std::string& where, double& out) {
  bool si = j.contains(key), hz = j.contains(key + "_hz");
  if (si && hz) bad(where + ": give either " + key + " or " + key + "_hz");
  if (si) out = num(j, key, where);
  if (hz) out = kTwoPi * num(j, key + "_hz", where);
}

Regime parse_regime(const std::string& s) {
  if (s == "classical") return Regime::NearClassical;
  if (s == "quantum") return Regime::Quantum;
  bad("preset must be 'classical' or 'quantum', got '" + s + "'");
}

EffectiveParams effective_from_json(const json& j) {
  const std::string w = "effective";
  check_keys(j, w,
             {"preset", "kappa_plus", "kappa_plus_hz", "kappa_minus", "kappa_minus_hz", "V", "V_hz",
              "phi", "delta1", "delta1_hz", "delta2", "delta2_hz", "drive_amp", "drive_amp_hz",
              "drive_phase"});
  EffectiveParams p;
  if (j.contains("preset")) p = reference_effective(parse_regime(j.at("preset").get<std::string>()));
  rate(j, "kappa_plus", w, p.kappa_plus);
  rate(j, "kappa_minus", w, p.kappa_minus);
  rate(j, "V", w, p.V);
  rate(j, "delta1", w, p.delta1);
  rate(j, "delta2", w, p.delta2);
  rate(j, "drive_amp", w, p.drive_amp);
  if (j.contains("phi")) p.phi = num(j, "phi", w);
  if (j.contains("drive_phase")) p.drive_phase = num(j, "drive_phase", w);
  try {
    p.validate();
  } catch (const Error& e) {
    bad(std::string("effective: ") + e.what());
  }
  return p;
}

json effective_to_json(const EffectiveParams& p) {
  return {{"kappa_plus", p.kappa_plus}, {"kappa_minus", p.kappa_minus}, {"V", p.V},
          {"phi", p.phi},               {"delta1", p.delta1},           {"delta2", p.delta2},
          {"drive_amp", p.drive_amp},   {"drive_phase", p.drive_phase}};
}

}  // namespace

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::SingleVdp: return "single-vdp";
    case Scenario::LimitCycle: return "limit-cycle";
    case Scenario::Sync: return "sync";
    case Scenario::Arnold: return "arnold";
    case Scenario::Sense: return "sense";
    case Scenario::Meanfield: return "meanfield";
    case Scenario::TomoCheck: return "tomo-check";
  }
  return "?";
}

Scenario parse_scenario(const std::string& s) {
  for (auto k : {Scenario::SingleVdp, Scenario::LimitCycle, Scenario::Sync, Scenario::Arnold,
                 Scenario::Sense, Scenario::Meanfield, Scenario::TomoCheck})
    if (s == scenario_name(k)) return k;
  bad("unknown scenario '" + s + "'");
}

const char* engine_name(Engine e) { return e == Engine::Effective ? "effective" : "stroboscopic"; }

Engine parse_engine(const std::string& s) {
  if (s == "effective") return Engine::Effective;
  if (s == "stroboscopic") return Engine::Stroboscopic;
  bad("unknown engine '" + s + "'");
}

void NoiseSpec::validate() const {
  if (coupling_rel_sigma < 0 || freq_sigma_hz < 0) bad("noise sigmas must be >= 0");
  if (ensemble_size < 1) bad("noise.ensemble_size must be >= 1");
  if (shots < 0) bad("noise.shots must be >= 0");
}

void ExperimentConfig::validate() const {
  if (engine == Engine::Effective && (!effective || schedule))
    bad("engine 'effective' needs an 'effective' block and no 'schedule'");
  if (engine == Engine::Stroboscopic && (!schedule || effective))
    bad("engine 'stroboscopic' needs a 'schedule' block and no 'effective'");
  if (cutoffs.empty() || cutoffs.size() > 2) bad("cutoffs must list one or two values");
  for (int c : cutoffs)
    if (c < 2) bad("cutoffs must be >= 2");
  if (n_uncoupled < 0 || n_coupled < 0) bad("cycle counts must be >= 0");
  if (threads < 1) bad("threads must be >= 1");
  if (scan.phase_bins < 8) bad("scan.phase_bins must be >= 8");
  if (!(scan.V0_hz > 0)) bad("scan.V0_hz must be > 0");
  try {
    readout.validate();
    if (effective) effective->validate();
    if (schedule) schedule->validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  noise.validate();
  const bool two = scenario == Scenario::Sync || scenario == Scenario::Arnold ||
                   scenario == Scenario::Sense;
  if (two && cutoffs.size() != 2) bad(std::string(scenario_name(scenario)) + " needs two cutoffs");
  if (scenario == Scenario::Arnold && (scan.v_over_v0.empty() || scan.detuning_hz.empty()))
    bad("arnold needs scan.v_over_v0 and scan.detuning_hz");
  if (scenario == Scenario::Sense && scan.detuning_hz.empty()) bad("sense needs scan.detuning_hz");
  if (scenario == Scenario::Sync && scan.phis.empty()) bad("sync needs scan.phis");
  if (scenario == Scenario::SingleVdp && scan.ratios.empty()) bad("single-vdp needs scan.ratios");
  if ((scenario == Scenario::Meanfield || scenario == Scenario::Sense) && engine != Engine::Effective)
    bad(std::string(scenario_name(scenario)) + " needs the effective engine");
}

EffectiveParams reference_effective(Regime r, double phi) {
  EffectiveParams p;
  const bool cl = r == Regime::NearClassical;
  p.kappa_plus = kTwoPi * (cl ? 120.0 : 100.0);
  p.kappa_minus = kTwoPi * (cl ? 17.0 : 42.0);
  p.V = kTwoPi * 100.0;
  p.phi = phi;
  return p;
}

json schedule_to_json(const PulseSchedule& s) {
  json segs = json::array();
  for (const auto& g : s.segments)
    segs.push_back({{"kind", segment_kind_name(g.kind)},
                    {"mode", g.mode},
                    {"rabi", g.rabi},
                    {"rabi2", g.rabi2},
                    {"eta", g.eta},
                    {"eta2", g.eta2},
                    {"phase", g.phase},
                    {"duration", g.duration}});
  return {{"segments", segs},
          {"delta1", s.delta1},
          {"delta2", s.delta2},
          {"quoted_kappa_plus", s.quoted_kappa_plus}};
}

PulseSchedule schedule_from_json(const json& j) {
  const std::string w = "schedule";
  check_keys(j, w,
             {"preset", "phi", "segments", "delta1", "delta1_hz", "delta2", "delta2_hz",
              "quoted_kappa_plus", "quoted_kappa_plus_hz"});
  PulseSchedule s;
  if (j.contains("preset") == j.contains("segments"))
    bad("schedule needs exactly one of 'preset' and 'segments'");
  if (j.contains("preset")) {
    double phi = j.contains("phi") ? num(j, "phi", w) : 0.0;
    s = reference_schedule(parse_regime(j.at("preset").get<std::string>()), phi);
  } else {
    if (j.contains("phi")) bad("schedule.phi applies to presets only");
    if (!j.at("segments").is_array()) bad("schedule.segments must be an array");
    for (const auto& e : j.at("segments")) {
      check_keys(e, "segment", {"kind", "mode", "rabi", "rabi2", "eta", "eta2", "phase", "duration"});
      PulseSegment g;
      try {
        g.kind = parse_segment_kind(e.at("kind").get<std::string>());
      } catch (const Error& err) {
        bad(err.what());
      }
      if (e.contains("mode")) g.mode = integer(e, "mode", "segment");
      if (e.contains("rabi")) g.rabi = num(e, "rabi", "segment");
      if (e.contains("rabi2")) g.rabi2 = num(e, "rabi2", "segment");
      if (e.contains("eta")) g.eta = num(e, "eta", "segment");
      if (e.contains("eta2")) g.eta2 = num(e, "eta2", "segment");
      if (e.contains("phase")) g.phase = num(e, "phase", "segment");
      if (e.contains("duration")) g.duration = num(e, "duration", "segment");
      s.segments.push_back(g);
    }
  }
  rate(j, "delta1", w, s.delta1);
  rate(j, "delta2", w, s.delta2);
  rate(j, "quoted_kappa_plus", w, s.quoted_kappa_plus);
  try {
    s.validate();
  } catch (const Error& e) {
    bad(std::string("schedule: ") + e.what());
  }
  return s;
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j, "config",
             {"scenario", "engine", "effective", "schedule", "readout", "cutoffs", "cycles", "seed",
              "noise", "scan", "phase_method", "output_dir", "threads"});
  ExperimentConfig c;
  try {
    if (!j.contains("scenario")) bad("missing 'scenario'");
    if (!j.contains("seed")) bad("missing 'seed' (mandatory)");
    c.scenario = parse_scenario(j.at("scenario").get<std::string>());
    if (j.contains("engine")) c.engine = parse_engine(j.at("engine").get<std::string>());
    if (!j.at("seed").is_number_unsigned()) bad("seed must be a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("effective")) c.effective = effective_from_json(j.at("effective"));
    if (j.contains("schedule")) c.schedule = schedule_from_json(j.at("schedule"));
    if (j.contains("readout")) {
      const auto& r = j.at("readout");
      check_keys(r, "readout", {"beta_max", "points", "shots", "zero_pad_factor", "phi1", "phi2"});
      if (r.contains("beta_max")) c.readout.beta_max = num(r, "beta_max", "readout");
      if (r.contains("points")) c.readout.points = integer(r, "points", "readout");
      if (r.contains("shots")) c.readout.shots = integer(r, "shots", "readout");
      if (r.contains("zero_pad_factor")) c.readout.zero_pad_factor = integer(r, "zero_pad_factor", "readout");
      if (r.contains("phi1")) c.readout.phi1 = num(r, "phi1", "readout");
      if (r.contains("phi2")) c.readout.phi2 = num(r, "phi2", "readout");
    }
    c.noise.shots = c.readout.shots;
    if (j.contains("cutoffs")) {
      c.cutoffs.clear();
      for (double v : numbers(j, "cutoffs", "config")) {
        if (v != std::floor(v)) bad("cutoffs must be integers");
        c.cutoffs.push_back(int(v));
      }
    } else if (c.scenario == Scenario::SingleVdp || c.scenario == Scenario::LimitCycle ||
               c.scenario == Scenario::TomoCheck || c.scenario == Scenario::Meanfield) {
      c.cutoffs = {30};
    }
    if (j.contains("cycles")) {
      const auto& y = j.at("cycles");
      check_keys(y, "cycles", {"uncoupled", "coupled"});
      if (y.contains("uncoupled")) c.n_uncoupled = integer(y, "uncoupled", "cycles");
      if (y.contains("coupled")) c.n_coupled = integer(y, "coupled", "cycles");
    }
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      check_keys(n, "noise", {"coupling_rel_sigma", "freq_sigma_hz", "ensemble_size", "shots"});
      if (n.contains("coupling_rel_sigma")) c.noise.coupling_rel_sigma = num(n, "coupling_rel_sigma", "noise");
      if (n.contains("freq_sigma_hz")) c.noise.freq_sigma_hz = num(n, "freq_sigma_hz", "noise");
      if (n.contains("ensemble_size")) c.noise.ensemble_size = integer(n, "ensemble_size", "noise");
      if (n.contains("shots")) c.noise.shots = integer(n, "shots", "noise");
    }
    if (j.contains("scan")) {
      const auto& s = j.at("scan");
      check_keys(s, "scan",
                 {"phis", "v_over_v0", "detuning_hz", "ratios", "V0_hz", "contour_level",
                  "crosscheck_bound", "phase_bins"});
      if (s.contains("phis")) c.scan.phis = numbers(s, "phis", "scan");
      if (s.contains("v_over_v0")) c.scan.v_over_v0 = numbers(s, "v_over_v0", "scan");
      if (s.contains("detuning_hz")) c.scan.detuning_hz = numbers(s, "detuning_hz", "scan");
      if (s.contains("ratios")) c.scan.ratios = numbers(s, "ratios", "scan");
      if (s.contains("V0_hz")) c.scan.V0_hz = num(s, "V0_hz", "scan");
      if (s.contains("contour_level")) c.scan.contour_level = num(s, "contour_level", "scan");
      if (s.contains("crosscheck_bound")) c.scan.crosscheck_bound = num(s, "crosscheck_bound", "scan");
      if (s.contains("phase_bins")) c.scan.phase_bins = integer(s, "phase_bins", "scan");
    }
    if (j.contains("phase_method")) {
      auto m = j.at("phase_method").get<std::string>();
      if (m == "canonical")
        c.phase_method = PhaseMethod::Canonical;
      else if (m == "wigner")
        c.phase_method = PhaseMethod::WignerMarginal;
      else
        bad("phase_method must be 'canonical' or 'wigner'");
    }
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("threads")) c.threads = integer(j, "threads", "config");
  } catch (const json::exception& e) {
    bad(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    bad(path + ": " + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["scenario"] = scenario_name(c.scenario);
  j["engine"] = engine_name(c.engine);
  j["seed"] = c.seed;
  if (c.effective) j["effective"] = effective_to_json(*c.effective);
  if (c.schedule) j["schedule"] = schedule_to_json(*c.schedule);
  const auto& r = c.readout;
  j["readout"] = {{"beta_max", r.beta_max}, {"points", r.points},   {"shots", r.shots},
                  {"zero_pad_factor", r.zero_pad_factor},          {"phi1", r.phi1},
                  {"phi2", r.phi2}};
  j["cutoffs"] = c.cutoffs;
  j["cycles"] = {{"uncoupled", c.n_uncoupled}, {"coupled", c.n_coupled}};
  j["noise"] = {{"coupling_rel_sigma", c.noise.coupling_rel_sigma},
                {"freq_sigma_hz", c.noise.freq_sigma_hz},
                {"ensemble_size", c.noise.ensemble_size},
                {"shots", c.noise.shots}};
  j["scan"] = {{"phis", c.scan.phis},
               {"v_over_v0", c.scan.v_over_v0},
               {"detuning_hz", c.scan.detuning_hz},
               {"ratios", c.scan.ratios},
               {"V0_hz", c.scan.V0_hz},
               {"contour_level", c.scan.contour_level},
               {"crosscheck_bound", c.scan.crosscheck_bound},
               {"phase_bins", c.scan.phase_bins}};
  j["phase_method"] = c.phase_method == PhaseMethod::Canonical ? "canonical" : "wigner";
  j["output_dir"] = c.output_dir;
  j["threads"] = c.threads;
  return j;
}

std::uint64_t config_hash(const ExperimentConfig& c) {
  json j = config_to_json(c);
  j.erase("output_dir");
  j.erase("threads");
  return fnv1a64(j.dump());
}

}  // namespace qvdp

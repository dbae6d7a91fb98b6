#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qvdp/lindblad.hpp"
#include "qvdp/pulses.hpp"
#include "qvdp/syncmetrics.hpp"
#include "qvdp/tomography.hpp"

namespace qvdp {

enum class Scenario { SingleVdp, LimitCycle, Sync, Arnold, Sense, Meanfield, TomoCheck };
enum class Engine { Effective, Stroboscopic };

const char* scenario_name(Scenario s);
Scenario parse_scenario(const std::string& s);
const char* engine_name(Engine e);
Engine parse_engine(const std::string& s);

struct NoiseSpec {
  double coupling_rel_sigma = 0.02;
  double freq_sigma_hz = 37.0;  // on delta omega / 2pi
  int ensemble_size = 20;
  int shots = 0;  // readout shots for ensemble members

  void validate() const;
};

// Scenario-specific axes. Frequencies in Hz, couplings relative to V0.
struct ScanSpec {
  std::vector<double> phis;
  std::vector<double> v_over_v0;
  std::vector<double> detuning_hz;
  std::vector<double> ratios;  // kappa_-/kappa_+
  double V0_hz = 100.0;
  double contour_level = 0.05;
  double crosscheck_bound = 0.1;  // stroboscopic vs effective trace distance
  int phase_bins = 64;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::Sync;
  Engine engine = Engine::Effective;
  std::optional<EffectiveParams> effective;
  std::optional<PulseSchedule> schedule;
  ReadoutSettings readout;
  std::vector<int> cutoffs{18, 18};
  int n_uncoupled = 15;
  int n_coupled = 10;
  std::uint64_t seed = 0;
  NoiseSpec noise;
  ScanSpec scan;
  PhaseMethod phase_method = PhaseMethod::Canonical;
  std::string output_dir = "out";
  int threads = 1;  // does not affect results

  void validate() const;
};

// Reference effective rates (rad/s). V is V0 = 2pi * 0.1 kHz.
EffectiveParams reference_effective(Regime r, double phi = 0.0);

ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
// Canonical form: SI units (rad/s, s, rad), explicit schedule segments.
nlohmann::json config_to_json(const ExperimentConfig& c);
// FNV-1a over the canonical JSON, excluding output_dir and threads.
std::uint64_t config_hash(const ExperimentConfig& c);

nlohmann::json schedule_to_json(const PulseSchedule& s);
PulseSchedule schedule_from_json(const nlohmann::json& j);

}  // namespace qvdp

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "qvdp/config.hpp"
#include "qvdp/sweep.hpp"

namespace qvdp {

constexpr const char* kVersion = "0.1.0";

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double bound = 0.0;
  std::string detail;
};

struct RunResult {
  int exit_code = 0;  // 0 ok, 2 config error, 3 numerical failure
  std::string failed_stage;
  std::string error;
  std::vector<CheckResult> checks;
  std::vector<Checkpoint> checkpoints;
  std::vector<std::string> outputs;  // file names relative to output_dir
  nlohmann::json manifest;
};

// Runs the configured scenario and writes CSVs plus manifest.json into
// config.output_dir. Errors are caught and reported through the exit code.
RunResult run_scenario(const ExperimentConfig& config);

// Default configuration of each scenario (reference settings).
ExperimentConfig default_config(Scenario s, std::uint64_t seed);

}  // namespace qvdp

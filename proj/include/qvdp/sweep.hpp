#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qvdp/config.hpp"
#include "qvdp/syncmetrics.hpp"

namespace qvdp {

// V <- V (1 + N(0, coupling_rel_sigma)); delta2 <- delta2 + 2pi N(0, freq_sigma_hz).
// Deterministic in (seed, index).
std::vector<EffectiveParams> noise_ensemble(const EffectiveParams& base, const NoiseSpec& spec,
                                            std::uint64_t seed, std::uint64_t index = 0);

// Runs body(i) for i in [0, n) on `threads` workers. Results must be written by index.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

// State validation record for the conservation-law checks.
struct Checkpoint {
  std::string stage;
  double trace_error = 0.0;
  double hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  double top_population = 0.0;  // top two Fock levels, worst mode
};
Checkpoint checkpoint(const std::string& stage, const QuantumState& s);

struct Stats {
  double mean = 0.0, std = 0.0;  // std is the sample standard deviation
};
Stats stats(const std::vector<double>& v);

struct ArnoldPoint {
  double v_over_v0 = 0.0;
  double detuning_hz = 0.0;
  Stats I, I_xx, I_xp, I_vn;
  std::vector<SyncReport> members;
  std::vector<Checkpoint> checkpoints;
  std::string error;  // empty on success
};

struct ContourSegment {
  double v0, d0, v1, d1;  // (V/V0, detuning Hz) endpoints
};

struct ArnoldResult {
  std::vector<ArnoldPoint> points;  // row-major over (v_over_v0, detuning_hz)
  std::vector<ContourSegment> contour;
  double offset = 0.0;  // mean I over the V = 0 column, when present
};

// Steady state of two-mode config at (v, detuning) for one ensemble member.
QuantumState member_steady_state(const ExperimentConfig& c, const EffectiveParams* eff,
                                 double v_over_v0, double detuning_hz, double v_factor,
                                 double extra_detuning);

ArnoldResult arnold_sweep(const ExperimentConfig& c, const std::vector<double>& v_grid,
                          const std::vector<double>& detuning_grid_hz);

// Marching squares on a (rows = v, cols = detuning) grid.
std::vector<ContourSegment> contour(const std::vector<double>& v, const std::vector<double>& d,
                                    const std::vector<std::vector<double>>& z, double level);

struct SensePoint {
  double detuning_hz = 0.0;
  Stats S1, S2;
  std::vector<double> S1_members, S2_members;
  std::vector<Checkpoint> checkpoints;
  std::string error;
};

std::vector<SensePoint> sense_sweep(const ExperimentConfig& c, const std::vector<double>& detuning_grid_hz);

}  // namespace qvdp

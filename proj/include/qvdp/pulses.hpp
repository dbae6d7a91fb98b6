#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qvdp/hilbert.hpp"
#include "qvdp/lindblad.hpp"

namespace qvdp {

enum class SegmentKind { BSB, RSB2, SYNC, SDF, DRIVE, RESET };

const char* segment_kind_name(SegmentKind k);
SegmentKind parse_segment_kind(const std::string& s);

// Rabi frequencies in rad/s, durations in s. `mode` is 0 or 1 (M1, M2).
// SYNC uses (rabi, eta) on M1 and (rabi2, eta2) on M2; rabi2 = 0 means rabi.
struct PulseSegment {
  SegmentKind kind = SegmentKind::RESET;
  int mode = 0;
  double rabi = 0.0;
  double rabi2 = 0.0;
  double eta = 0.1;
  double eta2 = 0.1;
  double phase = 0.0;
  double duration = 0.0;

  void validate() const;
};

struct PulseSchedule {
  std::vector<PulseSegment> segments;  // one cycle
  double delta1 = 0.0;                 // rotating-frame detunings, rad/s
  double delta2 = 0.0;
  double quoted_kappa_plus = 0.0;      // optional reference value, rad/s

  double period() const;  // sum of non-RESET durations
  void validate() const;
};

enum class Regime { NearClassical, Quantum };

// Reference cycle: BSB1 R BSB2 R 2RSB1 R 2RSB2 R SYNC R. `phi` is the target
// effective coupling phase.
PulseSchedule reference_schedule(Regime r, double phi = 0.0, double delta1 = 0.0,
                              double delta2 = 0.0);

// Hamiltonian of one segment on qubit (slot 0) x M1 x M2, without detunings.
OperatorMatrix segment_hamiltonian(const PulseSegment& seg, const SpaceLayout& layout);

QuantumState qubit_reset(const QuantumState& state);

struct CompiledSegment {
  SegmentKind kind;
  Mat U;
  bool random_phase;
};

struct CompiledSchedule {
  SpaceLayout layout;
  std::vector<CompiledSegment> segments;
  double max_unitarity_error = 0.0;
};

CompiledSchedule compile_schedule(const PulseSchedule& sched, const SpaceLayout& layout);

// One cycle. BSB/2RSB phases get fresh uniform draws from the (seed, cycle)
// stream; SYNC phases are fixed.
QuantumState run_cycle(const QuantumState& state, const CompiledSchedule& cs, std::uint64_t seed,
                       std::uint64_t cycle, bool sync_on = true);
QuantumState run_cycle(const QuantumState& state, const PulseSchedule& sched, std::uint64_t seed,
                       std::uint64_t cycle = 0, bool sync_on = true);

QuantumState run_protocol(const QuantumState& initial, const PulseSchedule& sched,
                          int n_uncoupled = 15, int n_coupled = 10, std::uint64_t seed = 0);
QuantumState run_protocol(const QuantumState& initial, const CompiledSchedule& cs,
                          int n_uncoupled, int n_coupled, std::uint64_t seed);

// |down> x vacuum x vacuum.
QuantumState protocol_initial_state(int cutoff1, int cutoff2);

struct RateReport {
  EffectiveParams params;        // averaged over modes
  double kappa_plus_mode[2] = {0, 0};
  double kappa_minus_mode[2] = {0, 0};
  double kappa_plus_formula = 0.0;
  double kappa_plus_quoted = 0.0;  // 0 when the schedule carries none
  double period = 0.0;
};

RateReport effective_rates_report(const PulseSchedule& sched);
EffectiveParams effective_rates(const PulseSchedule& sched);

// Segments shortened by `factor`, Rabi frequencies scaled by sqrt(factor).
PulseSchedule refine(const PulseSchedule& sched, double factor);

struct ConvergenceRow {
  double factor = 1.0;
  double distance = 0.0;        // protocol output vs effective steady state
  double fixed_point_distance = -1.0;  // cycle-map fixed point vs effective (if requested)
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  bool monotone = false;
  std::string failure;  // empty when monotone
};

struct ConvergenceOptions {
  int cutoff = 12;
  int n_uncoupled = 15;
  int n_coupled = 10;
  bool scale_cycles = true;  // run factor*(n_uncoupled + n_coupled) cycles
  bool fixed_point = false;
  std::uint64_t seed = 0;
};

ConvergenceReport stroboscopic_convergence(const PulseSchedule& sched,
                                           const std::vector<double>& factors,
                                           const ConvergenceOptions& opt = {});

// Full-circuit characteristic-function readout of a single-mode state: SDF
// conditional displacement, then qubit detection (Re), or with the extra pi/2
// rotation (Im).
cplx sdf_characteristic(const QuantumState& mode_state, cplx beta, double eta = 0.1,
                        double rabi = 2 * M_PI * 50e3);

}  // namespace qvdp

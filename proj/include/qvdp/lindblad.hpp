#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "qvdp/hilbert.hpp"

namespace qvdp {

using SpMat = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;

// Rates in rad/s, phases in rad.
struct EffectiveParams {
  double kappa_plus = 1.0;
  double kappa_minus = 0.0;
  double V = 0.0;
  double phi = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double drive_amp = 0.0;
  double drive_phase = 0.0;

  void validate() const;
};

struct Dissipator {
  double rate = 0.0;
  OperatorMatrix op;
  std::string label;
};

struct GeneratorSpec {
  OperatorMatrix hamiltonian;
  std::vector<Dissipator> dissipators;
  // Slowest relaxation scale (kappa_+ for vdP generators); sets steady-state windows.
  double relax_rate = 0.0;

  const SpaceLayout& layout() const { return hamiltonian.layout; }
  void validate() const;
};

GeneratorSpec vdp_generator(const EffectiveParams& p, const SpaceLayout& layout);
// Single oscillator: H = delta n + drive, dissipators (kp, a^dag), (km, a^2).
GeneratorSpec single_vdp_generator(double kappa_plus, double kappa_minus, int cutoff,
                                   double delta = 0.0, double drive_amp = 0.0,
                                   double drive_phase = 0.0);

Mat generator_apply(const GeneratorSpec& gen, const QuantumState& state);

// Column-major vectorised superoperator: vec(L rho) = S vec(rho).
SpMat liouvillian(const GeneratorSpec& gen);

// ||H|| + sum rate*||L||^2, an upper bound on the Liouvillian spectral radius.
double stiffness_scale(const GeneratorSpec& gen);
double max_stable_step(const GeneratorSpec& gen);

constexpr double kEvolveTraceTol = 1e-6;
constexpr double kEvolveHermTol = 1e-8;

QuantumState evolve(const QuantumState& state, const GeneratorSpec& gen, double duration,
                    double step);

struct SteadyStateInfo {
  int windows = 0;
  double last_distance = 0.0;
};

QuantumState steady_state(const GeneratorSpec& gen, const QuantumState& initial,
                          double tol = 1e-6, SteadyStateInfo* info = nullptr);

struct DirectSolveInfo {
  bool sector_only = false;
  int sector_size = 0;
  int gmres_iterations = 0;
  double gmres_error = 0.0;
  double residual = 0.0;  // max |L rho| / relax_rate
};

// Solves L rho = 0 with Tr rho = 1. Charge-conserving generators are solved in
// the zero-coherence sector; otherwise GMRES preconditioned by the
// charge-conserving part, factorised sector by sector.
QuantumState steady_state_direct(const GeneratorSpec& gen, DirectSolveInfo* info = nullptr);

// Keeps the sector factorisation of a reference generator so that nearby
// generators (same layout, e.g. perturbed rates) reuse it as the GMRES
// preconditioner. Charge-conserving generators are always solved directly.
class SteadyStateSolver {
 public:
  explicit SteadyStateSolver(const GeneratorSpec& reference);
  QuantumState solve(const GeneratorSpec& gen, DirectSolveInfo* info = nullptr,
                     const QuantumState* guess = nullptr) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

double trace_distance(const QuantumState& a, const QuantumState& b);
double trace_distance(const Mat& a, const Mat& b);

}  // namespace qvdp

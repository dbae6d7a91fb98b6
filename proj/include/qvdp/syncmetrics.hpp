#pragma once

#include <optional>
#include <vector>

#include "qvdp/tomography.hpp"

namespace qvdp {

// All information quantities in nats.
struct SyncReport {
  double I_xx = 0.0;
  double I_xp = 0.0;
  double I_combined = 0.0;  // I_xx + I_xp
  std::optional<double> I_vn;
  double S1 = 0.0, S2 = 0.0;
  double pearson_xx = 0.0;
};

// Plug-in estimate on cell masses; the grid is renormalised internally.
double mutual_information_2d(const Grid2D& p);

// Pearson correlation of the two axes under the grid density.
double pearson(const Grid2D& p);

// I[x1:x2] from a readout at (phi1, phi2) plus I[x1:p2] from (phi1, phi2 + pi/2).
// The second readout uses seed + 1.
SyncReport combined_mi(const QuantumState& state, const ReadoutSettings& s,
                       bool with_von_neumann = true);

double von_neumann_entropy(const QuantumState& s);
double von_neumann_mi(const QuantumState& state);

struct PhaseHistogram {
  std::vector<double> centers;  // bin centres on [0, 2pi)
  std::vector<double> density;  // bin-averaged P(phi); sum density * width = 1
  double width = 0.0;
};

// Canonical phase distribution P(phi) = (1/2pi) sum_{n,m} e^{i(m-n)phi} <n|rho|m>.
PhaseHistogram phase_distribution(const QuantumState& mode_state, int bins);

// |sum_n <n+1|rho|n>|
double resultant_length(const QuantumState& mode_state);

// Angular marginal of a Wigner grid (negative values kept).
PhaseHistogram wigner_phase_distribution(const Grid2D& wigner, int bins);
double wigner_resultant_length(const Grid2D& wigner);

// Cov(x1_phi1, x2_phi2) with x_phi = (a e^{-i phi} + a^dag e^{i phi})/sqrt2.
double quadrature_covariance(const QuantumState& state, double phi1 = 0.0, double phi2 = 0.0);

// Mean phonon number of each mode.
std::vector<double> occupations(const QuantumState& state);

enum class PhaseMethod { Canonical, WignerMarginal };

}  // namespace qvdp

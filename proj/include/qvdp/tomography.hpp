#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qvdp/hilbert.hpp"

namespace qvdp {

struct Axis {
  double min = 0.0;
  double max = 1.0;
  int points = 8;

  double step() const { return (max - min) / (points - 1); }
  double at(int i) const { return min + i * step(); }
};

// values(i, j) sits at (axis1.at(i), axis2.at(j)).
struct Grid2D {
  Axis axis1, axis2;
  Eigen::MatrixXcd values;
  bool complex_valued = false;
  std::string label1 = "x1", label2 = "x2", quantity = "value";
  std::map<std::string, double> meta;
  std::vector<std::string> warnings;

  Eigen::MatrixXd real() const { return values.real(); }
  void validate() const;
};

struct ReadoutSettings {
  double beta_max = 3.0;
  int points = 32;
  int shots = 200;  // per grid point; 0 = exact
  int zero_pad_factor = 4;
  double phi1 = 0.0;
  double phi2 = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  // Half-open sample grid -beta_max + k * 2 beta_max / points, which contains 0.
  double delta() const { return 2 * beta_max / points; }
  double sample(int k) const { return -beta_max + k * delta(); }
};

// Tr[rho D1(beta1) D2(beta2)]; a qubit slot, if present, is traced out first.
// Single-mode states are accepted with beta2 = 0.
cplx char_function(const QuantumState& state, cplx beta1, cplx beta2 = 0.0);

// Exact chi on the readout grid. Single-mode states: axes (Re xi, Im xi).
// Two-mode states: axes (beta1, beta2) with arguments i beta_j e^{i phi_j}.
Grid2D chi_grid(const QuantumState& state, const ReadoutSettings& s);

// Bernoulli projection noise on the Re and Im parts of every sample.
Grid2D sample_projection_noise(const Grid2D& exact, int shots, std::uint64_t seed);

Grid2D simulate_readout(const QuantumState& state, const ReadoutSettings& s, std::uint64_t seed);
Grid2D simulate_readout(const QuantumState& state, const ReadoutSettings& s);

Grid2D subtract_offset(const Grid2D& samples);

// Wigner function from chi samples. Axes are quadratures x = sqrt2 Re alpha,
// p = sqrt2 Im alpha; values follow the W(alpha) normalisation (vacuum peak 2/pi).
Grid2D wigner_from_chi(const Grid2D& chi, int zero_pad_factor);
Grid2D wigner(const QuantumState& state, const ReadoutSettings& s);

// Joint quadrature density from two-mode chi samples.
Grid2D joint_from_chi(const Grid2D& chi, int zero_pad_factor);
Grid2D joint_distribution(const QuantumState& state, const ReadoutSettings& s);

// Peak radius (alpha units) of the angularly averaged Wigner profile.
double donut_radius(const Grid2D& w);

// Direct Fock-basis evaluation of 2/pi Tr[rho D(alpha) P D(alpha)^dag] from the
// closed-form Wigner functions of |m><n| (no truncated displacement involved).
double wigner_direct(const QuantumState& mode_state, cplx alpha);
Grid2D wigner_direct_grid(const QuantumState& mode_state, const Grid2D& like);

// Single-mode distribution of x_phi = (a e^{-i phi} + a^dag e^{i phi})/sqrt2.
std::vector<double> quadrature_distribution(const QuantumState& mode_state, double phi,
                                            const std::vector<double>& xs);

double integrate(const Grid2D& g);  // sum of values * cell area (axis units)

}  // namespace qvdp

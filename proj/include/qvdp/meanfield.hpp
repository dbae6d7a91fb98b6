#pragma once

#include <vector>

#include "qvdp/lindblad.hpp"

namespace qvdp {

struct MFState {
  cplx alpha1 = 0.0;
  cplx alpha2 = 0.0;
};

struct StabilityResult {
  MFState fixed_point;
  std::vector<double> eigenvalues;  // ascending, 1/s
  bool stable = false;
};

// a1' = (k+/2) a1 - k- |a1|^2 a1 - (V/2)(a1 - e^{i phi} a2) - i delta1 a1 - i drive e^{-i drive_phase}
// a2' = (k+/2) a2 - k- |a2|^2 a2 - (V/2)(a2 - e^{-i phi} a1) - i delta2 a2
MFState mf_rhs(const MFState& s, const EffectiveParams& p);
double mf_residual(const MFState& s, const EffectiveParams& p);  // max |component|

double mf_radius(const EffectiveParams& p);  // sqrt(k+ / 2k-)

// Trivial point and the synchronised representative (e^{i phi} r, r).
// Requires zero detunings and no drive.
std::vector<MFState> fixed_points(const EffectiveParams& p);

// Eigenvalues of the reduced Hermitian Jacobian
// [[k+ - 4k-|a1|^2 - V, V e^{i phi}], [V e^{-i phi}, k+ - 4k-|a2|^2 - V]].
StabilityResult stability(const MFState& point, const EffectiveParams& p);
// Real parts of the eigenvalues of the full 4x4 real linearisation of mf_rhs.
StabilityResult stability_full(const MFState& point, const EffectiveParams& p);

struct MFSample {
  double t = 0.0;
  MFState s;
};

// RK4. Throws Instability when |alpha| exceeds 10 * mf_radius.
std::vector<MFSample> integrate_mf(const MFState& initial, const EffectiveParams& p, double duration,
                                   double step, int record_every = 1);

struct LissajousCurve {
  double phi = 0.0;
  std::vector<double> x1, x2;
};

// Relaxes from a generic start for 20/k+, then samples one oscillation period of
// the lab-frame quadratures x_i = sqrt2 Re(alpha_i e^{-i theta}).
std::vector<LissajousCurve> lissajous(const EffectiveParams& p, const std::vector<double>& phis,
                                      int samples = 200);

}  // namespace qvdp

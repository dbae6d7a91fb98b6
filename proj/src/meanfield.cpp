#include "qvdp/meanfield.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace qvdp {

namespace {
const cplx I(0.0, 1.0);

MFState axpy(const MFState& a, double h, const MFState& k) {
  return {a.alpha1 + h * k.alpha1, a.alpha2 + h * k.alpha2};
}
}  // namespace

MFState mf_rhs(const MFState& s, const EffectiveParams& p) {
  const cplx e = std::polar(1.0, p.phi);
  const cplx a1 = s.alpha1, a2 = s.alpha2;
  MFState d;
  d.alpha1 = 0.5 * p.kappa_plus * a1 - p.kappa_minus * std::norm(a1) * a1 -
             0.5 * p.V * (a1 - e * a2) - I * p.delta1 * a1 -
             I * p.drive_amp * std::polar(1.0, -p.drive_phase);
  d.alpha2 = 0.5 * p.kappa_plus * a2 - p.kappa_minus * std::norm(a2) * a2 -
             0.5 * p.V * (a2 - std::conj(e) * a1) - I * p.delta2 * a2;
  return d;
}

double mf_residual(const MFState& s, const EffectiveParams& p) {
  auto d = mf_rhs(s, p);
  return std::max(std::abs(d.alpha1), std::abs(d.alpha2));
}

double mf_radius(const EffectiveParams& p) {
  if (!(p.kappa_minus > 0.0))
    throw Error(ErrorKind::UnboundedAmplitude, "kappa_minus = 0: no bounded limit cycle");
  return std::sqrt(p.kappa_plus / (2 * p.kappa_minus));
}

std::vector<MFState> fixed_points(const EffectiveParams& p) {
  const double r = mf_radius(p);
  if (p.delta1 != 0.0 || p.delta2 != 0.0 || p.drive_amp != 0.0)
    throw Error(ErrorKind::Precondition, "fixed points need zero detunings and no drive");
  return {MFState{}, MFState{std::polar(r, p.phi), cplx(r, 0.0)}};
}

StabilityResult stability(const MFState& point, const EffectiveParams& p) {
  const double res = mf_residual(point, p);
  if (res > 1e-9 * std::max(1.0, p.kappa_plus))
    throw Error(ErrorKind::Precondition, "not a fixed point (residual " + std::to_string(res) + ")");
  Eigen::Matrix2cd J;
  J(0, 0) = p.kappa_plus - 4 * p.kappa_minus * std::norm(point.alpha1) - p.V;
  J(1, 1) = p.kappa_plus - 4 * p.kappa_minus * std::norm(point.alpha2) - p.V;
  J(0, 1) = p.V * std::polar(1.0, p.phi);
  J(1, 0) = std::conj(J(0, 1));
  // closed form of the 2x2 Hermitian spectrum
  const double m = 0.5 * (J(0, 0).real() + J(1, 1).real());
  const double d = 0.5 * (J(0, 0).real() - J(1, 1).real());
  const double g = std::sqrt(d * d + std::norm(J(0, 1)));
  StabilityResult r;
  r.fixed_point = point;
  r.eigenvalues = {m - g, m + g};
  r.stable = r.eigenvalues[1] < 0.0;
  return r;
}

StabilityResult stability_full(const MFState& point, const EffectiveParams& p) {
  const double res = mf_residual(point, p);
  if (res > 1e-9 * std::max(1.0, p.kappa_plus))
    throw Error(ErrorKind::Precondition, "not a fixed point (residual " + std::to_string(res) + ")");
  // central differences; the map is cubic so h^2 error is tiny
  auto flat = [](const MFState& s) {
    return Eigen::Vector4d(s.alpha1.real(), s.alpha1.imag(), s.alpha2.real(), s.alpha2.imag());
  };
  auto unflat = [](const Eigen::Vector4d& v) { return MFState{{v(0), v(1)}, {v(2), v(3)}}; };
  Eigen::Matrix4d J;
  const Eigen::Vector4d x0 = flat(point);
  const double h = 1e-6 * std::max(1.0, x0.cwiseAbs().maxCoeff());
  for (int k = 0; k < 4; ++k) {
    Eigen::Vector4d xp = x0, xm = x0;
    xp(k) += h;
    xm(k) -= h;
    J.col(k) = (flat(mf_rhs(unflat(xp), p)) - flat(mf_rhs(unflat(xm), p))) / (2 * h);
  }
  Eigen::EigenSolver<Eigen::Matrix4d> es(J, false);
  StabilityResult r;
  r.fixed_point = point;
  for (int k = 0; k < 4; ++k) r.eigenvalues.push_back(es.eigenvalues()(k).real());
  std::sort(r.eigenvalues.begin(), r.eigenvalues.end());
  r.stable = r.eigenvalues.back() < 0.0;
  return r;
}

std::vector<MFSample> integrate_mf(const MFState& initial, const EffectiveParams& p, double duration,
                                   double step, int record_every) {
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "step must be > 0");
  if (duration < 0.0) throw Error(ErrorKind::InvalidArgument, "duration must be >= 0");
  if (record_every < 1) throw Error(ErrorKind::InvalidArgument, "record_every must be >= 1");
  const double bound = 10 * mf_radius(p);
  const long n = long(std::ceil(duration / step - 1e-9));
  const double h = n ? duration / n : 0.0;
  std::vector<MFSample> out{{0.0, initial}};
  MFState s = initial;
  for (long k = 1; k <= n; ++k) {
    auto k1 = mf_rhs(s, p);
    auto k2 = mf_rhs(axpy(s, h / 2, k1), p);
    auto k3 = mf_rhs(axpy(s, h / 2, k2), p);
    auto k4 = mf_rhs(axpy(s, h, k3), p);
    s.alpha1 += h / 6 * (k1.alpha1 + 2.0 * k2.alpha1 + 2.0 * k3.alpha1 + k4.alpha1);
    s.alpha2 += h / 6 * (k1.alpha2 + 2.0 * k2.alpha2 + 2.0 * k3.alpha2 + k4.alpha2);
    if (!std::isfinite(std::abs(s.alpha1)) || !std::isfinite(std::abs(s.alpha2)) ||
        std::max(std::abs(s.alpha1), std::abs(s.alpha2)) > bound)
      throw Error(ErrorKind::Instability, "mean-field trajectory diverged at t = " + std::to_string(k * h));
    if (k % record_every == 0 || k == n) out.push_back({k * h, s});
  }
  return out;
}

std::vector<LissajousCurve> lissajous(const EffectiveParams& p, const std::vector<double>& phis,
                                      int samples) {
  if (samples < 4) throw Error(ErrorKind::InvalidArgument, "lissajous needs >= 4 samples");
  const double r = mf_radius(p);
  std::vector<LissajousCurve> out;
  for (double phi : phis) {
    EffectiveParams q = p;
    q.phi = phi;
    MFState s0{std::polar(0.3 * r, 1.0), std::polar(0.5 * r, -0.4)};
    const double dur = 20.0 / p.kappa_plus;
    auto tr = integrate_mf(s0, q, dur, dur / 4000, 4000);
    const MFState f = tr.back().s;
    LissajousCurve c;
    c.phi = phi;
    for (int k = 0; k < samples; ++k) {
      cplx rot = std::polar(1.0, -2 * M_PI * k / samples);
      c.x1.push_back(std::sqrt(2.0) * (f.alpha1 * rot).real());
      c.x2.push_back(std::sqrt(2.0) * (f.alpha2 * rot).real());
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace qvdp

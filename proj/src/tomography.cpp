#include "qvdp/tomography.hpp"

#include <cmath>
#include <mutex>

#include <fftw3.h>

#include "qvdp/rng.hpp"

namespace qvdp {

void Grid2D::validate() const {
  for (const Axis* a : {&axis1, &axis2}) {
    if (!(a->min < a->max)) throw Error(ErrorKind::InvalidArgument, "grid axis min >= max");
    if (a->points < 2) throw Error(ErrorKind::InvalidArgument, "grid axis needs >= 2 points");
  }
  if (values.rows() != axis1.points || values.cols() != axis2.points)
    throw Error(ErrorKind::InvalidArgument, "grid values do not match axes");
  if (!values.allFinite()) throw Error(ErrorKind::InvalidArgument, "non-finite grid values");
}

void ReadoutSettings::validate() const {
  if (!(beta_max > 0)) throw Error(ErrorKind::InvalidArgument, "beta_max must be > 0");
  if (points < 8 || points % 2) throw Error(ErrorKind::InvalidArgument, "points must be even and >= 8");
  if (shots < 0) throw Error(ErrorKind::InvalidArgument, "shots must be >= 0");
  if (zero_pad_factor < 1) throw Error(ErrorKind::InvalidArgument, "zero_pad_factor must be >= 1");
}

namespace {

// Reduces to the mode slots only.
QuantumState modes_only(const QuantumState& s) {
  const auto& L = s.layout();
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < L.slots(); ++i)
    if (L.kinds[i] == SlotKind::Mode) keep.push_back(i);
  if (keep.size() == L.slots()) return s;
  return partial_trace(s, keep);
}

Axis sample_axis(const ReadoutSettings& s) {
  return {s.sample(0), s.sample(s.points - 1), s.points};
}

}  // namespace

cplx char_function(const QuantumState& state, cplx beta1, cplx beta2) {
  auto m = modes_only(state);
  const auto& L = m.layout();
  if (L.slots() == 1) {
    if (beta2 != cplx(0.0))
      throw Error(ErrorKind::Layout, "single-mode state needs beta2 = 0");
    return (m.rho() * displacement(beta1, L.dims[0]).m).trace();
  }
  if (L.slots() != 2) throw Error(ErrorKind::Layout, "char_function needs one or two modes");
  const int N1 = L.dims[0], N2 = L.dims[1];
  Mat D1 = displacement(beta1, N1).m, D2 = displacement(beta2, N2).m;
  const Mat& r = m.rho();
  cplx s = 0.0;
  for (int m1 = 0; m1 < N1; ++m1)
    for (int n1 = 0; n1 < N1; ++n1) {
      cplx d1 = D1(n1, m1);
      if (d1 == cplx(0.0)) continue;
      cplx acc = 0.0;
      for (int m2 = 0; m2 < N2; ++m2)
        for (int n2 = 0; n2 < N2; ++n2) acc += r(m1 * N2 + m2, n1 * N2 + n2) * D2(n2, m2);
      s += d1 * acc;
    }
  return s;
}

Grid2D chi_grid(const QuantumState& state, const ReadoutSettings& s) {
  s.validate();
  auto m = modes_only(state);
  const auto& L = m.layout();
  Grid2D g;
  g.axis1 = g.axis2 = sample_axis(s);
  g.complex_valued = true;
  g.quantity = "chi";
  g.values = Eigen::MatrixXcd::Zero(s.points, s.points);
  g.meta["beta_max"] = s.beta_max;
  const int P = s.points;
  const cplx I(0, 1);
  bool trunc = false;
  if (L.slots() == 1) {
    g.label1 = "re_xi";
    g.label2 = "im_xi";
    const int N = L.dims[0];
    for (int i = 0; i < P; ++i)
      for (int j = 0; j < P; ++j) {
        auto D = displacement(cplx(s.sample(i), s.sample(j)), N);
        trunc |= !D.warnings.empty();
        g.values(i, j) = m.rho().cwiseProduct(D.m.transpose()).sum();
      }
  } else if (L.slots() == 2) {
    g.label1 = "beta1";
    g.label2 = "beta2";
    g.meta["phi1"] = s.phi1;
    g.meta["phi2"] = s.phi2;
    const int N1 = L.dims[0], N2 = L.dims[1];
    std::vector<Mat> D2(P);
    for (int j = 0; j < P; ++j) {
      auto d = displacement(I * s.sample(j) * std::exp(I * s.phi2), N2);
      trunc |= !d.warnings.empty();
      D2[j] = d.m.transpose();
    }
    const Mat& r = m.rho();
    for (int i = 0; i < P; ++i) {
      auto d1 = displacement(I * s.sample(i) * std::exp(I * s.phi1), N1);
      trunc |= !d1.warnings.empty();
      // A(m2, n2) = sum_{m1,n1} rho[(m1,m2),(n1,n2)] D1(n1,m1)
      Mat A = Mat::Zero(N2, N2);
      for (int m1 = 0; m1 < N1; ++m1)
        for (int n1 = 0; n1 < N1; ++n1) {
          cplx c = d1.m(n1, m1);
          if (c == cplx(0.0)) continue;
          A += c * r.block(m1 * N2, n1 * N2, N2, N2);
        }
      for (int j = 0; j < P; ++j) g.values(i, j) = A.cwiseProduct(D2[j]).sum();
    }
  } else {
    throw Error(ErrorKind::Layout, "chi_grid needs one or two modes");
  }
  if (trunc) g.warnings.push_back("displacement truncation: |beta|^2 exceeds cutoff/2 on the grid");
  return g;
}

Grid2D sample_projection_noise(const Grid2D& exact, int shots, std::uint64_t seed) {
  if (shots < 0) throw Error(ErrorKind::InvalidArgument, "shots must be >= 0");
  Grid2D g = exact;
  if (shots == 0) return g;
  const int R = int(g.values.rows()), C = int(g.values.cols());
  auto estimate = [&](Rng& rng, double v) {
    double p = std::clamp(0.5 * (1.0 + v), 0.0, 1.0);
    int k = 0;
    for (int s = 0; s < shots; ++s) k += rng.bernoulli(p);
    return 2.0 * k / shots - 1.0;
  };
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < C; ++j) {
      Rng rng(seed, std::uint64_t(i) * C + j, purpose::kReadout);
      double re = estimate(rng, exact.values(i, j).real());
      double im = estimate(rng, exact.values(i, j).imag());
      g.values(i, j) = cplx(re, im);
    }
  g.meta["shots"] = shots;
  return g;
}

Grid2D simulate_readout(const QuantumState& state, const ReadoutSettings& s, std::uint64_t seed) {
  return sample_projection_noise(chi_grid(state, s), s.shots, seed);
}

Grid2D simulate_readout(const QuantumState& state, const ReadoutSettings& s) {
  return simulate_readout(state, s, s.seed);
}

Grid2D subtract_offset(const Grid2D& samples) {
  Grid2D g = samples;
  const int R = int(g.values.rows()), C = int(g.values.cols());
  double sum = 0.0;
  int n = 0;
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < C; ++j)
      if (i == 0 || j == 0 || i == R - 1 || j == C - 1) {
        sum += g.values(i, j).real();
        ++n;
      }
  const double off = sum / n;
  g.values.array() -= off;
  // locate the xi = 0 sample
  int i0 = int(std::lround(-g.axis1.min / g.axis1.step()));
  int j0 = int(std::lround(-g.axis2.min / g.axis2.step()));
  double c = g.values(i0, j0).real();
  if (c == 0.0) throw Error(ErrorKind::InvalidDistribution, "chi(0,0) vanished after offset removal");
  g.values /= c;
  g.meta["offset"] = off;
  return g;
}

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct Transform {
  Eigen::MatrixXcd T;
  double du_a, du_b;
};

// T(p, q) = sum_{k,l} f(k,l) exp(i ca u_p xi_k) exp(i cb v_q xi_l), with
// u_p = (p - M/2) du_a and |ca| du_a Delta = 2 pi / M.
Transform fourier2d(const Eigen::MatrixXcd& f, double xi0, double delta, double ca, double cb,
                    int pad) {
  const int N = int(f.rows());
  const int M = N * pad;
  Transform out;
  out.du_a = 2 * M_PI / (M * delta * std::abs(ca));
  out.du_b = 2 * M_PI / (M * delta * std::abs(cb));
  Eigen::MatrixXcd work = Eigen::MatrixXcd::Zero(M, M);
  for (int k = 0; k < N; ++k)
    for (int l = 0; l < N; ++l) work(k, l) = f(k, l) * double(((k + l) % 2) ? -1 : 1);

  fftw_complex* buf = reinterpret_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * M));
  fftw_plan plan_fwd, plan_bwd;
  {
    std::lock_guard<std::mutex> lk(fftw_planner_mutex());
    plan_fwd = fftw_plan_dft_1d(M, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    plan_bwd = fftw_plan_dft_1d(M, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  auto run = [&](bool positive, auto get, auto set) {
    for (int i = 0; i < M; ++i) {
      get(i, reinterpret_cast<cplx*>(buf));
      fftw_execute_dft(positive ? plan_bwd : plan_fwd, buf, buf);
      set(i, reinterpret_cast<const cplx*>(buf));
    }
  };
  // axis a (rows index k -> p), for each column l
  run(ca > 0,
      [&](int l, cplx* b) { for (int k = 0; k < M; ++k) b[k] = work(k, l); },
      [&](int l, const cplx* b) { for (int p = 0; p < M; ++p) work(p, l) = b[p]; });
  run(cb > 0,
      [&](int p, cplx* b) { for (int l = 0; l < M; ++l) b[l] = work(p, l); },
      [&](int p, const cplx* b) { for (int q = 0; q < M; ++q) work(p, q) = b[q]; });
  {
    std::lock_guard<std::mutex> lk(fftw_planner_mutex());
    fftw_destroy_plan(plan_fwd);
    fftw_destroy_plan(plan_bwd);
  }
  fftw_free(buf);

  const cplx I(0, 1);
  for (int p = 0; p < M; ++p) {
    double u = (p - M / 2) * out.du_a;
    cplx ph_a = std::exp(I * ca * u * xi0);
    for (int q = 0; q < M; ++q) {
      double v = (q - M / 2) * out.du_b;
      work(p, q) *= ph_a * std::exp(I * cb * v * xi0);
    }
  }
  out.T = std::move(work);
  return out;
}

Axis centered_axis(int M, double du) { return {-(M / 2) * du, (M / 2 - 1) * du, M}; }

void require_square_sample_grid(const Grid2D& chi) {
  chi.validate();
  if (chi.axis1.points < 8 || chi.axis1.points % 2)
    throw Error(ErrorKind::InvalidArgument, "chi grid points must be even and >= 8");
  if (chi.axis1.points != chi.axis2.points || std::abs(chi.axis1.min - chi.axis2.min) > 1e-12 ||
      std::abs(chi.axis1.step() - chi.axis2.step()) > 1e-12)
    throw Error(ErrorKind::InvalidArgument, "chi grid must use identical axes");
}

}  // namespace

Grid2D wigner_from_chi(const Grid2D& chi, int pad) {
  require_square_sample_grid(chi);
  const double delta = chi.axis1.step(), xi0 = chi.axis1.min;
  // axis1 = Re xi pairs with Im alpha (+2), axis2 = Im xi pairs with Re alpha (-2)
  auto t = fourier2d(chi.values, xi0, delta, 2.0, -2.0, pad);
  const int M = int(t.T.rows());
  const double da = t.du_a;  // alpha step, identical on both axes
  Grid2D w;
  w.axis1 = centered_axis(M, da * std::sqrt(2.0));
  w.axis2 = w.axis1;
  w.label1 = "x";
  w.label2 = "p";
  w.quantity = "wigner";
  w.values = (t.T.transpose() * (delta * delta / (M_PI * M_PI))).real().cast<cplx>();
  double norm = w.values.real().sum() * da * da;
  w.meta["normalization"] = norm;
  w.warnings = chi.warnings;
  if (std::abs(norm - 1.0) > 0.05)
    w.warnings.push_back("reconstruction quality: Wigner normalisation " + std::to_string(norm));
  return w;
}

Grid2D wigner(const QuantumState& state, const ReadoutSettings& s) {
  auto m = modes_only(state);
  if (m.layout().slots() != 1) throw Error(ErrorKind::Layout, "wigner needs a single mode");
  return wigner_from_chi(simulate_readout(m, s), s.zero_pad_factor);
}

Grid2D joint_from_chi(const Grid2D& chi, int pad) {
  require_square_sample_grid(chi);
  const double delta = chi.axis1.step(), xi0 = chi.axis1.min;
  const double c = -std::sqrt(2.0);
  auto t = fourier2d(chi.values, xi0, delta, c, c, pad);
  const int M = int(t.T.rows());
  const double dx = t.du_a;
  Grid2D P;
  P.axis1 = P.axis2 = centered_axis(M, dx);
  P.label1 = "x1";
  P.label2 = "x2";
  P.quantity = "joint";
  Eigen::MatrixXd dens = (t.T * (delta * delta / (2 * M_PI * M_PI))).real();
  Eigen::MatrixXd mass = dens * dx * dx;
  const double norm = mass.sum();
  P.meta["normalization"] = norm;
  P.meta["phi1"] = chi.meta.count("phi1") ? chi.meta.at("phi1") : 0.0;
  P.meta["phi2"] = chi.meta.count("phi2") ? chi.meta.at("phi2") : 0.0;
  P.warnings = chi.warnings;
  const double most_negative = mass.minCoeff();
  P.meta["min_cell_mass"] = most_negative;
  if (most_negative < -1e-3)
    throw Error(ErrorKind::InvalidDistribution,
                "joint distribution negativity " + std::to_string(most_negative) + " beyond -1e-3");
  mass = mass.cwiseMax(0.0);
  mass /= mass.sum();
  if (std::abs(norm - 1.0) > 0.05)
    P.warnings.push_back("reconstruction quality: joint normalisation " + std::to_string(norm));
  P.values = (mass / (dx * dx)).cast<cplx>();
  return P;
}

Grid2D joint_distribution(const QuantumState& state, const ReadoutSettings& s) {
  auto m = modes_only(state);
  if (m.layout().slots() != 2) throw Error(ErrorKind::Layout, "joint_distribution needs two modes");
  return joint_from_chi(simulate_readout(m, s), s.zero_pad_factor);
}

double integrate(const Grid2D& g) {
  return g.values.real().sum() * g.axis1.step() * g.axis2.step();
}

double donut_radius(const Grid2D& w) {
  const double h = w.axis1.step() / std::sqrt(2.0);
  const double rmax = std::min({-w.axis1.min, w.axis1.max, -w.axis2.min, w.axis2.max}) / std::sqrt(2.0);
  const int nb = int(std::floor(rmax / h + 0.5));
  if (nb < 3) throw Error(ErrorKind::Range, "grid too small for a radial profile");
  std::vector<double> sum(nb, 0.0);
  std::vector<int> cnt(nb, 0);
  for (int i = 0; i < w.axis1.points; ++i)
    for (int j = 0; j < w.axis2.points; ++j) {
      double r = std::hypot(w.axis1.at(i), w.axis2.at(j)) / std::sqrt(2.0);
      int k = int(std::floor(r / h + 0.5));
      if (k >= nb) continue;
      sum[k] += w.values(i, j).real();
      ++cnt[k];
    }
  std::vector<double> prof(nb);
  for (int k = 0; k < nb; ++k) prof[k] = cnt[k] ? sum[k] / cnt[k] : -1e300;
  int kmax = int(std::max_element(prof.begin(), prof.end()) - prof.begin());
  if (kmax >= nb - 1) throw Error(ErrorKind::Range, "radial peak at the grid edge");
  double fm = kmax == 0 ? prof[1] : prof[kmax - 1], f0 = prof[kmax], fp = prof[kmax + 1];
  double den = fm - 2 * f0 + fp;
  double off = den != 0.0 ? 0.5 * (fm - fp) / den : 0.0;
  return std::max(0.0, (kmax + off) * h);
}

double wigner_direct(const QuantumState& mode_state, cplx alpha) {
  auto m = modes_only(mode_state);
  if (m.layout().slots() != 1) throw Error(ErrorKind::Layout, "wigner_direct needs a single mode");
  const int N = m.dim();
  const Mat& r = m.rho();
  const double x = 4 * std::norm(alpha), la = std::log(2 * std::abs(alpha));
  const double th = std::arg(alpha);
  double total = 0.0;
  // W of |m><n| for m >= n: (2/pi)(-1)^n sqrt(n!/m!) (2 alpha*)^{m-n} e^{-2|a|^2} L_n^{m-n}(4|a|^2);
  // the m < n terms are complex conjugates.
  for (int k = 0; k < N; ++k) {
    double Lm1 = 0.0, L = 1.0;
    for (int n = 0; n + k < N; ++n) {
      if (n == 1) {
        Lm1 = 1.0;
        L = 1.0 + k - x;
      } else if (n > 1) {
        double Ln = ((2 * (n - 1) + 1 + k - x) * L - (n - 1 + k) * Lm1) / n;
        Lm1 = L;
        L = Ln;
      }
      const int mm = n + k;
      double mag = std::exp(0.5 * (std::lgamma(n + 1.0) - std::lgamma(mm + 1.0)) - 0.5 * x +
                            (k ? k * la : 0.0));
      double sgn = (n % 2) ? -1.0 : 1.0;
      cplx w = std::polar(sgn * mag * L, -k * th);
      if (k == 0)
        total += (r(n, n) * w).real();
      else
        total += 2.0 * (r(mm, n) * w).real();
    }
  }
  return 2.0 / M_PI * total;
}

Grid2D wigner_direct_grid(const QuantumState& mode_state, const Grid2D& like) {
  Grid2D g = like;
  g.quantity = "wigner_direct";
  g.warnings.clear();
  g.meta.clear();
  for (int i = 0; i < g.axis1.points; ++i)
    for (int j = 0; j < g.axis2.points; ++j)
      g.values(i, j) = wigner_direct(mode_state, cplx(g.axis1.at(i), g.axis2.at(j)) / std::sqrt(2.0));
  return g;
}

std::vector<double> quadrature_distribution(const QuantumState& mode_state, double phi,
                                            const std::vector<double>& xs) {
  auto m = modes_only(mode_state);
  if (m.layout().slots() != 1) throw Error(ErrorKind::Layout, "quadrature_distribution needs one mode");
  const int N = m.dim();
  std::vector<double> out;
  out.reserve(xs.size());
  Vec psi(N);
  const cplx I(0, 1);
  for (double x : xs) {
    double p0 = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x), p1 = std::sqrt(2.0) * x * p0;
    std::vector<double> h(N);
    h[0] = p0;
    if (N > 1) h[1] = p1;
    for (int n = 1; n + 1 < N; ++n)
      h[n + 1] = std::sqrt(2.0 / (n + 1)) * x * h[n] - std::sqrt(double(n) / (n + 1)) * h[n - 1];
    for (int n = 0; n < N; ++n) psi(n) = h[n] * std::exp(I * phi * double(n));
    out.push_back((psi.adjoint() * m.rho() * psi)(0, 0).real());
  }
  return out;
}

}  // namespace qvdp

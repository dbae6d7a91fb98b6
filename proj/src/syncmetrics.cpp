#include "qvdp/syncmetrics.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace qvdp {

namespace {

Eigen::MatrixXd cell_masses(const Grid2D& p) {
  p.validate();
  Eigen::MatrixXd m = p.values.real() * (p.axis1.step() * p.axis2.step());
  const double total = m.sum();
  if (!(total > 0.0)) throw Error(ErrorKind::InvalidDistribution, "grid has no probability mass");
  if (m.minCoeff() < -1e-12 * total)
    throw Error(ErrorKind::InvalidDistribution, "negative probability in grid");
  if (std::abs(total - 1.0) > 0.02)
    throw Error(ErrorKind::Precondition, "grid normalisation " + std::to_string(total) + " off by > 2%");
  return m.cwiseMax(0.0) / total;
}

QuantumState modes_only(const QuantumState& s) {
  const auto& L = s.layout();
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < L.slots(); ++i)
    if (L.kinds[i] == SlotKind::Mode) keep.push_back(i);
  if (keep.size() == L.slots()) return s;
  return partial_trace(s, keep);
}

}  // namespace

double mutual_information_2d(const Grid2D& p) {
  Eigen::MatrixXd m = cell_masses(p);
  Eigen::VectorXd r = m.rowwise().sum(), c = m.colwise().sum().transpose();
  double I = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double v = m(i, j);
      if (v > 0.0) I += v * std::log(v / (r(i) * c(j)));
    }
  return std::max(I, 0.0);
}

double pearson(const Grid2D& p) {
  Eigen::MatrixXd m = cell_masses(p);
  double e1 = 0, e2 = 0, e11 = 0, e22 = 0, e12 = 0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      double x = p.axis1.at(i), y = p.axis2.at(j), w = m(i, j);
      e1 += w * x;
      e2 += w * y;
      e11 += w * x * x;
      e22 += w * y * y;
      e12 += w * x * y;
    }
  double v1 = e11 - e1 * e1, v2 = e22 - e2 * e2;
  if (v1 <= 0 || v2 <= 0) return 0.0;
  return (e12 - e1 * e2) / std::sqrt(v1 * v2);
}

SyncReport combined_mi(const QuantumState& state, const ReadoutSettings& s, bool with_von_neumann) {
  auto m = modes_only(state);
  if (m.layout().slots() != 2) throw Error(ErrorKind::Layout, "combined_mi needs two modes");
  SyncReport r;
  auto pxx = joint_distribution(m, s);
  ReadoutSettings sp = s;
  sp.phi2 = s.phi2 + M_PI / 2;
  sp.seed = s.seed + 1;
  auto pxp = joint_distribution(m, sp);
  r.I_xx = mutual_information_2d(pxx);
  r.I_xp = mutual_information_2d(pxp);
  r.I_combined = r.I_xx + r.I_xp;
  r.pearson_xx = pearson(pxx);
  r.S1 = resultant_length(partial_trace(m, {0}));
  r.S2 = resultant_length(partial_trace(m, {1}));
  if (with_von_neumann) r.I_vn = von_neumann_mi(m);
  return r;
}

double von_neumann_entropy(const QuantumState& s) {
  Eigen::SelfAdjointEigenSolver<Mat> es(s.rho(), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  if (ev.minCoeff() < -QuantumState::kPosTol)
    throw Error(ErrorKind::InvalidState,
                "state not positive semidefinite (min eigenvalue " + std::to_string(ev.minCoeff()) + ")");
  double S = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > 0.0) S -= ev(i) * std::log(ev(i));
  return S;
}

double von_neumann_mi(const QuantumState& state) {
  auto m = modes_only(state);
  if (m.layout().slots() != 2) throw Error(ErrorKind::Layout, "von_neumann_mi needs two modes");
  double S12 = von_neumann_entropy(m);
  double S1 = von_neumann_entropy(partial_trace(m, {0}));
  double S2 = von_neumann_entropy(partial_trace(m, {1}));
  return S1 + S2 - S12;
}

PhaseHistogram phase_distribution(const QuantumState& mode_state, int bins) {
  if (bins < 8) throw Error(ErrorKind::InvalidArgument, "phase_distribution needs >= 8 bins");
  auto m = modes_only(mode_state);
  if (m.layout().slots() != 1) throw Error(ErrorKind::Layout, "phase_distribution needs one mode");
  const Mat& r = m.rho();
  const int N = m.dim();
  // c_k = sum_n <n|rho|n+k>, k >= 0; the k < 0 terms are conjugates
  std::vector<cplx> c(N, 0.0);
  for (int k = 0; k < N; ++k)
    for (int n = 0; n + k < N; ++n) c[k] += r(n, n + k);
  PhaseHistogram h;
  h.width = 2 * M_PI / bins;
  for (int b = 0; b < bins; ++b) {
    double phi = (b + 0.5) * h.width;
    double v = c[0].real();
    for (int k = 1; k < N; ++k) {
      double half = 0.5 * k * h.width;
      double sinc = std::sin(half) / half;
      v += 2.0 * sinc * (c[k] * std::polar(1.0, k * phi)).real();
    }
    h.centers.push_back(phi);
    h.density.push_back(std::max(0.0, v) / (2 * M_PI));
  }
  return h;
}

double resultant_length(const QuantumState& mode_state) {
  auto m = modes_only(mode_state);
  if (m.layout().slots() != 1) throw Error(ErrorKind::Layout, "resultant_length needs one mode");
  cplx s = 0.0;
  for (int n = 0; n + 1 < m.dim(); ++n) s += m.rho()(n + 1, n);
  return std::abs(s);
}

PhaseHistogram wigner_phase_distribution(const Grid2D& w, int bins) {
  if (bins < 8) throw Error(ErrorKind::InvalidArgument, "phase_distribution needs >= 8 bins");
  w.validate();
  PhaseHistogram h;
  h.width = 2 * M_PI / bins;
  std::vector<double> acc(bins, 0.0);
  double total = 0.0;
  for (int i = 0; i < w.axis1.points; ++i)
    for (int j = 0; j < w.axis2.points; ++j) {
      double x = w.axis1.at(i), p = w.axis2.at(j);
      if (x == 0.0 && p == 0.0) continue;
      double th = std::atan2(p, x);
      if (th < 0) th += 2 * M_PI;
      int b = std::min(bins - 1, int(th / h.width));
      acc[b] += w.values(i, j).real();
      total += w.values(i, j).real();
    }
  if (!(total > 0.0)) throw Error(ErrorKind::InvalidDistribution, "Wigner grid has no mass");
  for (int b = 0; b < bins; ++b) {
    h.centers.push_back((b + 0.5) * h.width);
    h.density.push_back(acc[b] / (total * h.width));
  }
  return h;
}

double wigner_resultant_length(const Grid2D& w) {
  w.validate();
  cplx s = 0.0;
  double total = 0.0;
  for (int i = 0; i < w.axis1.points; ++i)
    for (int j = 0; j < w.axis2.points; ++j) {
      double x = w.axis1.at(i), p = w.axis2.at(j);
      double v = w.values(i, j).real();
      total += v;
      if (x == 0.0 && p == 0.0) continue;
      s += v * std::polar(1.0, std::atan2(p, x));
    }
  if (!(total > 0.0)) throw Error(ErrorKind::InvalidDistribution, "Wigner grid has no mass");
  return std::abs(s) / total;
}

double quadrature_covariance(const QuantumState& state, double phi1, double phi2) {
  const QuantumState m = modes_only(state);
  const auto& L = m.layout();
  if (L.slots() != 2) throw Error(ErrorKind::Layout, "quadrature_covariance needs two modes");
  auto x = [&](std::size_t slot, double phi) {
    OperatorMatrix a = mode_op(slot, L);
    return (a * std::polar(1.0, -phi) + a.adjoint() * std::polar(1.0, phi)) * cplx(M_SQRT1_2, 0.0);
  };
  const OperatorMatrix x1 = x(0, phi1), x2 = x(1, phi2);
  return expectation(m, x1 * x2).real() - expectation(m, x1).real() * expectation(m, x2).real();
}

std::vector<double> occupations(const QuantumState& state) {
  const QuantumState m = modes_only(state);
  std::vector<double> out;
  for (std::size_t k = 0; k < m.layout().slots(); ++k) {
    OperatorMatrix a = mode_op(k, m.layout());
    out.push_back(expectation(m, a.adjoint() * a).real());
  }
  return out;
}

}  // namespace qvdp

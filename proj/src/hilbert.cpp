#include "qvdp/hilbert.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/laguerre.hpp>

namespace qvdp {

SpaceLayout::SpaceLayout(std::vector<int> d, std::vector<SlotKind> k)
    : dims(std::move(d)), kinds(std::move(k)) {
  if (dims.empty()) throw Error(ErrorKind::InvalidDimension, "layout has no slots");
  if (dims.size() != kinds.size())
    throw Error(ErrorKind::InvalidDimension, "dims/kinds length mismatch");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] < 1) throw Error(ErrorKind::InvalidDimension, "dimension < 1");
    if (kinds[i] == SlotKind::Mode && dims[i] < 2)
      throw Error(ErrorKind::InvalidDimension, "mode cutoff < 2");
    if (kinds[i] == SlotKind::Qubit && dims[i] != 2)
      throw Error(ErrorKind::InvalidDimension, "qubit slot must have dim 2");
  }
}

SpaceLayout SpaceLayout::modes(const std::vector<int>& cutoffs) {
  return SpaceLayout(cutoffs, std::vector<SlotKind>(cutoffs.size(), SlotKind::Mode));
}

SpaceLayout SpaceLayout::qubit_modes(const std::vector<int>& cutoffs) {
  std::vector<int> d{2};
  d.insert(d.end(), cutoffs.begin(), cutoffs.end());
  std::vector<SlotKind> k(d.size(), SlotKind::Mode);
  k[0] = SlotKind::Qubit;
  return SpaceLayout(d, k);
}

int SpaceLayout::total() const {
  return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<int>());
}

int SpaceLayout::mode_count() const {
  int n = 0;
  for (auto k : kinds) n += (k == SlotKind::Mode);
  return n;
}

int SpaceLayout::stride(std::size_t slot) const {
  int s = 1;
  for (std::size_t i = slot + 1; i < dims.size(); ++i) s *= dims[i];
  return s;
}

std::string SpaceLayout::str() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) os << ",";
    os << (kinds[i] == SlotKind::Qubit ? "q" : "m") << dims[i];
  }
  os << "]";
  return os.str();
}

OperatorMatrix::OperatorMatrix(SpaceLayout l, Mat mat) : layout(std::move(l)), m(std::move(mat)) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::Layout, "operator is not square");
  if (m.rows() != layout.total())
    throw Error(ErrorKind::Layout, "operator size does not match layout " + layout.str());
  if (!m.allFinite()) throw Error(ErrorKind::InvalidArgument, "operator has non-finite entries");
}

OperatorMatrix OperatorMatrix::adjoint() const { return {layout, m.adjoint()}; }

static void require_same(const SpaceLayout& a, const SpaceLayout& b) {
  if (a != b) throw Error(ErrorKind::Layout, "layout mismatch " + a.str() + " vs " + b.str());
}

OperatorMatrix OperatorMatrix::operator*(const OperatorMatrix& o) const {
  require_same(layout, o.layout);
  return {layout, m * o.m};
}

OperatorMatrix OperatorMatrix::operator+(const OperatorMatrix& o) const {
  require_same(layout, o.layout);
  return {layout, m + o.m};
}

OperatorMatrix OperatorMatrix::operator-(const OperatorMatrix& o) const {
  require_same(layout, o.layout);
  return {layout, m - o.m};
}

OperatorMatrix OperatorMatrix::operator*(cplx s) const { return {layout, m * s}; }

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double hermiticity_error(const Mat& m) { return max_abs(m - m.adjoint()); }

QuantumState::QuantumState(SpaceLayout layout, Mat rho, double trace_tol, double herm_tol)
    : layout_(std::move(layout)), rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols() || rho_.rows() != layout_.total())
    throw Error(ErrorKind::Layout, "density matrix size does not match layout " + layout_.str());
  if (!rho_.allFinite()) throw Error(ErrorKind::InvalidState, "non-finite density matrix");
  double tr_err = std::abs(rho_.trace() - cplx(1.0, 0.0));
  if (tr_err > trace_tol)
    throw Error(ErrorKind::InvalidState, "trace deviates from 1 by " + std::to_string(tr_err));
  double h = hermiticity_error(rho_);
  if (h > herm_tol)
    throw Error(ErrorKind::InvalidState, "density matrix not Hermitian (" + std::to_string(h) + ")");
}

double QuantumState::min_eigenvalue() const {
  Mat h = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void QuantumState::check_positive(double tol) const {
  double m = min_eigenvalue();
  if (m < -tol)
    throw Error(ErrorKind::InvalidState, "negative eigenvalue " + std::to_string(m));
}

OperatorMatrix identity(const SpaceLayout& layout) {
  int d = layout.total();
  return {layout, Mat::Identity(d, d)};
}

OperatorMatrix annihilation(int cutoff) {
  if (cutoff < 2) throw Error(ErrorKind::InvalidDimension, "cutoff < 2");
  Mat a = Mat::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n) a(n - 1, n) = std::sqrt(double(n));
  return {SpaceLayout::modes({cutoff}), a};
}

OperatorMatrix creation(int cutoff) { return annihilation(cutoff).adjoint(); }

OperatorMatrix number_op(int cutoff) {
  auto a = annihilation(cutoff);
  return a.adjoint() * a;
}

static OperatorMatrix qubit_op(cplx m00, cplx m01, cplx m10, cplx m11) {
  Mat m(2, 2);
  m << m00, m01, m10, m11;
  return {SpaceLayout({2}, {SlotKind::Qubit}), m};
}

OperatorMatrix sigma_plus() { return qubit_op(0, 1, 0, 0); }
OperatorMatrix sigma_minus() { return qubit_op(0, 0, 1, 0); }
OperatorMatrix sigma_x() { return qubit_op(0, 1, 1, 0); }
OperatorMatrix sigma_y() { return qubit_op(0, cplx(0, -1), cplx(0, 1), 0); }
OperatorMatrix sigma_z() { return qubit_op(1, 0, 0, -1); }

namespace {

Mat kron(const Mat& a, const Mat& b) {
  Mat r(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return r;
}

}  // namespace

OperatorMatrix embed(const OperatorMatrix& op, std::size_t slot, const SpaceLayout& layout) {
  if (slot >= layout.slots()) throw Error(ErrorKind::Layout, "slot out of range");
  if (op.m.rows() != layout.dims[slot])
    throw Error(ErrorKind::Layout, "operator dimension does not match slot " + std::to_string(slot));
  int left = 1;
  for (std::size_t i = 0; i < slot; ++i) left *= layout.dims[i];
  int right = layout.stride(slot);
  Mat r = kron(kron(Mat::Identity(left, left), op.m), Mat::Identity(right, right));
  return {layout, r};
}

OperatorMatrix mode_op(std::size_t slot, const SpaceLayout& layout) {
  if (slot >= layout.slots() || layout.kinds[slot] != SlotKind::Mode)
    throw Error(ErrorKind::Layout, "slot is not a mode");
  return embed(annihilation(layout.dims[slot]), slot, layout);
}

OperatorMatrix displacement(cplx beta, int cutoff) {
  if (cutoff < 2) throw Error(ErrorKind::InvalidDimension, "cutoff < 2");
  Mat d = Mat::Zero(cutoff, cutoff);
  double x = std::norm(beta);
  if (x == 0.0) {
    d.setIdentity();
  } else {
    double r = std::abs(beta), th = std::arg(beta);
    double lr = std::log(r);
    for (int m = 0; m < cutoff; ++m) {
      for (int n = 0; n < cutoff; ++n) {
        // <m|D|n> for m >= n; the other triangle uses -beta* with roles swapped.
        int lo = std::min(m, n), k = std::abs(m - n);
        double lag = boost::math::laguerre(unsigned(lo), unsigned(k), x);
        double mag = std::exp(0.5 * (std::lgamma(lo + 1.0) - std::lgamma(lo + k + 1.0)) + k * lr - 0.5 * x);
        double phase = (m >= n) ? k * th : k * (th + M_PI);
        d(m, n) = std::polar(mag * lag, m >= n ? phase : -phase);
      }
    }
  }
  OperatorMatrix out(SpaceLayout::modes({cutoff}), d);
  if (x > cutoff / 2.0)
    out.warnings.push_back("displacement truncation: |beta|^2=" + std::to_string(x) +
                           " exceeds cutoff/2");
  return out;
}

QuantumState pure_state(const SpaceLayout& layout, const Vec& psi) {
  if (psi.size() != layout.total()) throw Error(ErrorKind::Layout, "vector size mismatch");
  double nrm = psi.norm();
  if (nrm == 0.0) throw Error(ErrorKind::InvalidState, "zero vector");
  Vec p = psi / nrm;
  return QuantumState(layout, p * p.adjoint());
}

namespace {

Vec coherent_vec(cplx alpha, int cutoff) {
  Vec c(cutoff);
  double lr = std::log(std::abs(alpha)), th = std::arg(alpha), x = std::norm(alpha);
  for (int n = 0; n < cutoff; ++n) {
    if (x == 0.0) {
      c(n) = n == 0 ? 1.0 : 0.0;
      continue;
    }
    double mag = std::exp(-0.5 * x + n * lr - 0.5 * std::lgamma(n + 1.0));
    c(n) = std::polar(mag, n * th);
  }
  return c / c.norm();
}

// Poisson tail mass beyond the cutoff.
double poisson_tail(double lambda, int cutoff) {
  double p = std::exp(-lambda), s = 0.0;
  for (int n = 0; n < cutoff; ++n) {
    s += p;
    p *= lambda / (n + 1);
  }
  return std::max(0.0, 1.0 - s);
}

}  // namespace

QuantumState canonical_state(const StateSpec& spec, int cutoff) {
  if (cutoff < 2) throw Error(ErrorKind::InvalidDimension, "cutoff < 2");
  SpaceLayout l = SpaceLayout::modes({cutoff});
  Vec v = Vec::Zero(cutoff);
  switch (spec.kind) {
    case StateSpec::Kind::Vacuum:
      v(0) = 1.0;
      return pure_state(l, v);
    case StateSpec::Kind::Fock:
      if (spec.n < 0 || spec.n >= cutoff)
        throw Error(ErrorKind::InvalidState, "fock index out of range");
      v(spec.n) = 1.0;
      return pure_state(l, v);
    case StateSpec::Kind::Coherent:
      if (std::norm(spec.alpha) > cutoff / 4.0)
        throw Error(ErrorKind::InvalidState, "|alpha|^2 exceeds cutoff/4");
      return pure_state(l, coherent_vec(spec.alpha, cutoff));
    case StateSpec::Kind::CatMixture: {
      if (poisson_tail(std::norm(spec.alpha), cutoff) > 1e-6)
        throw Error(ErrorKind::InvalidState, "cutoff too small for |alpha|^2");
      Vec p = coherent_vec(spec.alpha, cutoff), q = coherent_vec(-spec.alpha, cutoff);
      Mat rho = 0.5 * (p * p.adjoint() + q * q.adjoint());
      return QuantumState(l, rho);
    }
  }
  throw Error(ErrorKind::InvalidState, "unknown state kind");
}

QuantumState tensor(const QuantumState& a, const QuantumState& b) {
  std::vector<int> d = a.layout().dims;
  std::vector<SlotKind> k = a.layout().kinds;
  d.insert(d.end(), b.layout().dims.begin(), b.layout().dims.end());
  k.insert(k.end(), b.layout().kinds.begin(), b.layout().kinds.end());
  return QuantumState(SpaceLayout(d, k), kron(a.rho(), b.rho()));
}

QuantumState partial_trace(const QuantumState& state, const std::vector<std::size_t>& keep) {
  const SpaceLayout& L = state.layout();
  if (keep.empty()) throw Error(ErrorKind::InvalidArgument, "empty keep set");
  std::vector<bool> kept(L.slots(), false);
  for (auto s : keep) {
    if (s >= L.slots()) throw Error(ErrorKind::InvalidArgument, "keep slot out of range");
    kept[s] = true;
  }
  std::vector<int> kd, td;
  std::vector<SlotKind> kk;
  std::vector<int> kstr, tstr;
  for (std::size_t s = 0; s < L.slots(); ++s) {
    if (kept[s]) {
      kd.push_back(L.dims[s]);
      kk.push_back(L.kinds[s]);
      kstr.push_back(L.stride(s));
    } else {
      td.push_back(L.dims[s]);
      tstr.push_back(L.stride(s));
    }
  }
  auto offsets = [](const std::vector<int>& dims, const std::vector<int>& strides) {
    int n = std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<int>());
    std::vector<int> off(n, 0);
    for (int i = 0; i < n; ++i) {
      int r = i, o = 0;
      for (int s = int(dims.size()) - 1; s >= 0; --s) {
        o += (r % dims[s]) * strides[s];
        r /= dims[s];
      }
      off[i] = o;
    }
    return off;
  };
  auto ko = offsets(kd, kstr), to = offsets(td, tstr);
  int nk = int(ko.size());
  Mat r = Mat::Zero(nk, nk);
  const Mat& rho = state.rho();
  for (int j = 0; j < nk; ++j)
    for (int i = 0; i < nk; ++i) {
      cplx s = 0.0;
      for (int t : to) s += rho(ko[i] + t, ko[j] + t);
      r(i, j) = s;
    }
  return QuantumState(SpaceLayout(kd, kk), r, 1e-6, 1e-8);
}

cplx expectation(const QuantumState& state, const OperatorMatrix& op) {
  require_same(state.layout(), op.layout);
  return (state.rho().cwiseProduct(op.m.transpose())).sum();
}

double top_population(const QuantumState& state) {
  const SpaceLayout& L = state.layout();
  double worst = 0.0;
  for (std::size_t s = 0; s < L.slots(); ++s) {
    if (L.kinds[s] != SlotKind::Mode) continue;
    auto red = partial_trace(state, {s});
    int n = L.dims[s];
    double p = red.rho()(n - 1, n - 1).real() + red.rho()(n - 2, n - 2).real();
    worst = std::max(worst, p);
  }
  return worst;
}

}  // namespace qvdp

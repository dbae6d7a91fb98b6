#include "qvdp/lindblad.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

namespace qvdp {

void EffectiveParams::validate() const {
  if (!(kappa_plus > 0)) throw Error(ErrorKind::InvalidArgument, "kappa_plus must be > 0");
  if (kappa_minus < 0) throw Error(ErrorKind::InvalidArgument, "kappa_minus must be >= 0");
  if (V < 0) throw Error(ErrorKind::InvalidArgument, "V must be >= 0");
  if (drive_amp < 0) throw Error(ErrorKind::InvalidArgument, "drive_amp must be >= 0");
}

void GeneratorSpec::validate() const {
  for (const auto& d : dissipators) {
    if (d.rate < 0) throw Error(ErrorKind::InvalidArgument, "negative dissipator rate");
    if (d.op.layout != hamiltonian.layout)
      throw Error(ErrorKind::Layout, "dissipator layout differs from Hamiltonian");
  }
}

GeneratorSpec vdp_generator(const EffectiveParams& p, const SpaceLayout& layout) {
  p.validate();
  if (layout.slots() != 2 || layout.mode_count() != 2)
    throw Error(ErrorKind::Layout, "vdp_generator needs exactly two mode slots, got " + layout.str());
  auto a1 = mode_op(0, layout), a2 = mode_op(1, layout);
  auto a1d = a1.adjoint(), a2d = a2.adjoint();
  const cplx I(0, 1);
  OperatorMatrix H = a1d * a1 * p.delta1 + a2d * a2 * p.delta2;
  if (p.drive_amp != 0.0)
    H = H + (a1 * std::exp(I * p.drive_phase) + a1d * std::exp(-I * p.drive_phase)) * p.drive_amp;
  GeneratorSpec g;
  g.hamiltonian = H;
  g.dissipators = {
      {p.kappa_plus, a1d, "gain1"},
      {p.kappa_plus, a2d, "gain2"},
      {p.kappa_minus, a1 * a1, "loss1"},
      {p.kappa_minus, a2 * a2, "loss2"},
      {p.V, a1 - a2 * std::exp(I * p.phi), "coupling"},
  };
  g.relax_rate = p.kappa_plus;
  return g;
}

GeneratorSpec single_vdp_generator(double kappa_plus, double kappa_minus, int cutoff,
                                   double delta, double drive_amp, double drive_phase) {
  if (!(kappa_plus > 0)) throw Error(ErrorKind::InvalidArgument, "kappa_plus must be > 0");
  if (kappa_minus < 0) throw Error(ErrorKind::InvalidArgument, "kappa_minus must be >= 0");
  auto a = annihilation(cutoff), ad = a.adjoint();
  const cplx I(0, 1);
  OperatorMatrix H = ad * a * delta;
  if (drive_amp != 0.0)
    H = H + (a * std::exp(I * drive_phase) + ad * std::exp(-I * drive_phase)) * drive_amp;
  GeneratorSpec g;
  g.hamiltonian = H;
  g.dissipators = {{kappa_plus, ad, "gain"}, {kappa_minus, a * a, "loss"}};
  g.relax_rate = kappa_plus;
  return g;
}

Mat generator_apply(const GeneratorSpec& gen, const QuantumState& state) {
  if (state.layout() != gen.layout())
    throw Error(ErrorKind::Layout, "state layout " + state.layout().str() + " vs generator " +
                                       gen.layout().str());
  const cplx I(0, 1);
  const Mat& rho = state.rho();
  const Mat& H = gen.hamiltonian.m;
  Mat out = -I * (H * rho - rho * H);
  for (const auto& d : gen.dissipators) {
    if (d.rate == 0.0) continue;
    const Mat& L = d.op.m;
    Mat LdL = L.adjoint() * L;
    out += d.rate * (L * rho * L.adjoint() - 0.5 * (LdL * rho + rho * LdL));
  }
  return out;
}

SpMat liouvillian(const GeneratorSpec& gen) {
  gen.validate();
  const int D = gen.layout().total();
  const cplx I(0, 1);
  SpMat Id(D, D);
  Id.setIdentity();
  SpMat H = gen.hamiltonian.m.sparseView(0.0, 0.0);
  SpMat S = SpMat(-I * Eigen::kroneckerProduct(Id, H)) +
            SpMat(I * Eigen::kroneckerProduct(SpMat(H.transpose()), Id));
  for (const auto& d : gen.dissipators) {
    if (d.rate == 0.0) continue;
    SpMat L = d.op.m.sparseView(0.0, 0.0);
    SpMat LdL = SpMat(L.adjoint()) * L;
    SpMat Lc = L.conjugate();
    SpMat term = SpMat(Eigen::kroneckerProduct(Lc, L)) -
                 0.5 * SpMat(Eigen::kroneckerProduct(Id, LdL)) -
                 0.5 * SpMat(Eigen::kroneckerProduct(SpMat(LdL.transpose()), Id));
    S += d.rate * term;
  }
  S.prune(cplx(0.0, 0.0));
  S.makeCompressed();
  return S;
}

namespace {

double norm2_bound(const Mat& m) {
  if (m.size() == 0) return 0.0;
  double n1 = m.cwiseAbs().colwise().sum().maxCoeff();
  double ninf = m.cwiseAbs().rowwise().sum().maxCoeff();
  return std::sqrt(n1 * ninf);
}

}  // namespace

double stiffness_scale(const GeneratorSpec& gen) {
  double s = norm2_bound(gen.hamiltonian.m);
  for (const auto& d : gen.dissipators) {
    double n = norm2_bound(d.op.m);
    s += d.rate * n * n;
  }
  return s;
}

double max_stable_step(const GeneratorSpec& gen) {
  double s = stiffness_scale(gen);
  if (s <= 0) return std::numeric_limits<double>::infinity();
  return 0.05 / s;
}

QuantumState evolve(const QuantumState& state, const GeneratorSpec& gen, double duration,
                    double step) {
  if (state.layout() != gen.layout()) throw Error(ErrorKind::Layout, "state/generator layout mismatch");
  if (!(step > 0)) throw Error(ErrorKind::InvalidArgument, "step must be > 0");
  if (duration < 0) throw Error(ErrorKind::InvalidArgument, "duration must be >= 0");
  double bound = max_stable_step(gen);
  if (step > bound * (1 + 1e-12)) {
    std::ostringstream os;
    os << "step " << step << " exceeds stability bound " << bound;
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  if (duration == 0.0) return state;
  const long n = std::max(1L, long(std::ceil(duration / step - 1e-9)));
  const double h = duration / n;
  const Eigen::SparseMatrix<cplx, Eigen::RowMajor> S = liouvillian(gen);
  const int D = state.dim();
  Vec v = Eigen::Map<const Vec>(state.rho().data(), D * D);
  Vec k(D * D), acc(D * D), tmp(D * D);
  for (long i = 0; i < n; ++i) {
    k.noalias() = S * v;
    acc = k;
    tmp = v + (0.5 * h) * k;
    k.noalias() = S * tmp;
    acc += 2.0 * k;
    tmp = v + (0.5 * h) * k;
    k.noalias() = S * tmp;
    acc += 2.0 * k;
    tmp = v + h * k;
    k.noalias() = S * tmp;
    acc += k;
    v += (h / 6.0) * acc;
  }
  Mat rho = Eigen::Map<Mat>(v.data(), D, D);
  double drift = std::abs(rho.trace() - 1.0);
  if (drift > kEvolveTraceTol) {
    std::ostringstream os;
    os << "trace drift " << drift << "; retry with step <= " << h / 2;
    throw Error(ErrorKind::IntegratorAccuracy, os.str());
  }
  return QuantumState(state.layout(), rho, kEvolveTraceTol, kEvolveHermTol);
}

QuantumState steady_state(const GeneratorSpec& gen, const QuantumState& initial, double tol,
                          SteadyStateInfo* info) {
  if (!(tol > 0)) throw Error(ErrorKind::InvalidArgument, "tol must be > 0");
  if (!(gen.relax_rate > 0)) throw Error(ErrorKind::InvalidArgument, "generator has no relax_rate");
  const double window = 5.0 / gen.relax_rate;
  const double step = max_stable_step(gen);
  QuantumState cur = initial;
  double d = 0.0;
  for (int w = 1; w <= 200; ++w) {
    QuantumState next = evolve(cur, gen, window, step);
    d = trace_distance(cur, next);
    cur = next;
    if (d < tol) {
      if (info) *info = {w, d};
      return cur;
    }
  }
  throw Error(ErrorKind::NonConvergence,
              "steady_state did not converge in 200 windows; last distance " + std::to_string(d));
}

double trace_distance(const Mat& a, const Mat& b) {
  Mat diff = a - b;
  diff = 0.5 * (diff + diff.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> es(diff, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const QuantumState& a, const QuantumState& b) {
  if (a.layout() != b.layout()) throw Error(ErrorKind::Layout, "trace_distance layout mismatch");
  return trace_distance(a.rho(), b.rho());
}

}  // namespace qvdp

#include <cmath>
#include <map>
#include <memory>

#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include "qvdp/lindblad.hpp"

namespace qvdp {

namespace {

// Excitation charge of each basis index: total phonon number plus 1 for a raised qubit.
std::vector<int> basis_charge(const SpaceLayout& L) {
  const int D = L.total();
  std::vector<int> c(D, 0);
  for (int i = 0; i < D; ++i) {
    int r = i;
    for (int s = int(L.slots()) - 1; s >= 0; --s) {
      int n = r % L.dims[s];
      r /= L.dims[s];
      c[i] += L.kinds[s] == SlotKind::Mode ? n : (n == 0 ? 1 : 0);
    }
  }
  return c;
}

bool definite_charge(const Mat& m, const std::vector<int>& c) {
  bool seen = false;
  int q = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (m(i, j) == cplx(0.0, 0.0)) continue;
      int d = c[i] - c[j];
      if (!seen) {
        q = d;
        seen = true;
      } else if (d != q) {
        return false;
      }
    }
  return true;
}

struct Block {
  std::vector<int> index;  // global vec indices
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
};

// Restriction of S to an index set closed under S; `trace_row` (global) is
// replaced by the trace functional when it lies in the set.
SpMat restrict_block(const SpMat& S, const std::vector<int>& index, std::vector<int>& local,
                     int D, bool with_trace) {
  const int n = int(index.size());
  for (int k = 0; k < n; ++k) local[index[k]] = k;
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(std::size_t(n) * 12);
  for (int k = 0; k < n; ++k) {
    for (SpMat::InnerIterator it(S, index[k]); it; ++it) {
      int r = local[it.row()];
      if (r < 0) continue;
      if (with_trace && it.row() == 0) continue;
      trip.emplace_back(r, k, it.value());
    }
  }
  if (with_trace)
    for (int i = 0; i < D; ++i) {
      int g = i + i * D;
      if (local[g] >= 0) trip.emplace_back(local[0], local[g], cplx(1.0, 0.0));
    }
  SpMat B(n, n);
  B.setFromTriplets(trip.begin(), trip.end());
  B.makeCompressed();
  for (int k = 0; k < n; ++k) local[index[k]] = -1;
  return B;
}

class SectorBlocks {
 public:
  SectorBlocks(const SpMat& S0, const std::vector<int>& charge, int D) : D_(D) {
    std::map<int, std::vector<int>> sectors;
    for (int j = 0; j < D; ++j)
      for (int i = 0; i < D; ++i) sectors[charge[i] - charge[j]].push_back(i + j * D);
    std::vector<int> local(std::size_t(D) * D, -1);
    for (auto& [k, idx] : sectors) {
      auto b = std::make_unique<Block>();
      b->index = std::move(idx);
      SpMat A = restrict_block(S0, b->index, local, D, k == 0);
      b->lu.compute(A);
      if (b->lu.info() != Eigen::Success)
        throw Error(ErrorKind::NonConvergence, "sector factorisation failed (sector " +
                                                   std::to_string(k) + ")");
      blocks_.push_back(std::move(b));
    }
  }

  template <typename Rhs>
  Vec apply(const Rhs& r) const {
    Vec out = Vec::Zero(r.size());
    for (const auto& b : blocks_) {
      Vec sub(b->index.size());
      for (std::size_t k = 0; k < b->index.size(); ++k) sub(k) = r(b->index[k]);
      Vec x = b->lu.solve(sub);
      for (std::size_t k = 0; k < b->index.size(); ++k) out(b->index[k]) = x(k);
    }
    return out;
  }

 private:
  int D_;
  std::vector<std::unique_ptr<Block>> blocks_;
};

class SectorPreconditioner {
 public:
  typedef cplx Scalar;
  SectorPreconditioner() = default;
  void attach(const SectorBlocks* b) { blocks_ = b; }
  template <typename M>
  SectorPreconditioner& analyzePattern(const M&) { return *this; }
  template <typename M>
  SectorPreconditioner& factorize(const M&) { return *this; }
  template <typename M>
  SectorPreconditioner& compute(const M&) { return *this; }
  template <typename R>
  Vec solve(const R& r) const { return blocks_->apply(r); }
  Eigen::ComputationInfo info() { return Eigen::Success; }

 private:
  const SectorBlocks* blocks_ = nullptr;
};

SpMat with_trace_row(const SpMat& S, int D) {
  SpMat M = S;
  M.prune([](Eigen::Index row, Eigen::Index, const cplx&) { return row != 0; });
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int i = 0; i < D; ++i) trip.emplace_back(0, i + i * D, cplx(1.0, 0.0));
  SpMat T(S.rows(), S.cols());
  T.setFromTriplets(trip.begin(), trip.end());
  M += T;
  M.makeCompressed();
  return M;
}

}  // namespace

struct SteadyStateSolver::Impl {
  SpaceLayout layout;
  std::vector<int> charge;
  std::unique_ptr<SectorBlocks> blocks;  // only for non-conserving references
};

namespace {

// Charge-conserving part of a generator; `conserving` reports whether it is the whole.
GeneratorSpec conserving_part(const GeneratorSpec& gen, const std::vector<int>& charge,
                              bool& conserving) {
  const SpaceLayout& L = gen.layout();
  const int D = L.total();
  GeneratorSpec g0;
  Mat H0 = gen.hamiltonian.m;
  conserving = true;
  for (int j = 0; j < D; ++j)
    for (int i = 0; i < D; ++i)
      if (charge[i] != charge[j] && H0(i, j) != cplx(0.0, 0.0)) {
        H0(i, j) = 0.0;
        conserving = false;
      }
  g0.hamiltonian = OperatorMatrix(L, H0);
  g0.relax_rate = gen.relax_rate;
  for (const auto& d : gen.dissipators) {
    if (definite_charge(d.op.m, charge))
      g0.dissipators.push_back(d);
    else
      conserving = false;
  }
  return g0;
}

}  // namespace

SteadyStateSolver::SteadyStateSolver(const GeneratorSpec& reference) : impl_(std::make_shared<Impl>()) {
  reference.validate();
  impl_->layout = reference.layout();
  impl_->charge = basis_charge(impl_->layout);
  bool conserving = false;
  auto g0 = conserving_part(reference, impl_->charge, conserving);
  if (!conserving)
    impl_->blocks = std::make_unique<SectorBlocks>(liouvillian(g0), impl_->charge, impl_->layout.total());
}

QuantumState SteadyStateSolver::solve(const GeneratorSpec& gen, DirectSolveInfo* info,
                                      const QuantumState* guess) const {
  gen.validate();
  const SpaceLayout& L = gen.layout();
  if (L.dims != impl_->layout.dims || L.kinds != impl_->layout.kinds)
    throw Error(ErrorKind::Layout, "generator layout differs from the solver's reference");
  const int D = L.total();
  const auto& charge = impl_->charge;
  bool conserving = false;
  conserving_part(gen, charge, conserving);

  DirectSolveInfo inf;
  Vec x;
  const SpMat S = liouvillian(gen);
  if (conserving) {
    std::vector<int> idx;
    for (int j = 0; j < D; ++j)
      for (int i = 0; i < D; ++i)
        if (charge[i] == charge[j]) idx.push_back(i + j * D);
    std::vector<int> local(std::size_t(D) * D, -1);
    SpMat A = restrict_block(S, idx, local, D, true);
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu(A);
    if (lu.info() != Eigen::Success)
      throw Error(ErrorKind::NonConvergence, "sector factorisation failed");
    Vec b = Vec::Zero(idx.size());
    b(0) = 1.0;  // (0,0) is the first index of the zero sector
    Vec xs = lu.solve(b);
    x = Vec::Zero(std::size_t(D) * D);
    for (std::size_t k = 0; k < idx.size(); ++k) x(idx[k]) = xs(k);
    inf.sector_only = true;
    inf.sector_size = int(idx.size());
  } else {
    if (!impl_->blocks)
      throw Error(ErrorKind::Precondition,
                  "solver was built for a charge-conserving reference; the generator is not");
    SpMat M = with_trace_row(S, D);
    Eigen::GMRES<SpMat, SectorPreconditioner> solver;
    solver.preconditioner().attach(impl_->blocks.get());
    solver.set_restart(80);
    solver.setMaxIterations(800);
    solver.setTolerance(1e-12);
    solver.compute(M);
    Vec b = Vec::Zero(std::size_t(D) * D);
    b(0) = 1.0;
    Vec x0;
    if (guess) {
      if (guess->dim() != D) throw Error(ErrorKind::Layout, "initial guess has the wrong dimension");
      x0 = Eigen::Map<const Vec>(guess->rho().data(), std::size_t(D) * D);
    } else {
      x0 = impl_->blocks->apply(b);
    }
    x = solver.solveWithGuess(b, x0);
    inf.gmres_iterations = int(solver.iterations());
    inf.gmres_error = solver.error();
    if (solver.info() != Eigen::Success)
      throw Error(ErrorKind::NonConvergence,
                  "GMRES did not converge; error " + std::to_string(solver.error()));
  }

  Mat rho = Eigen::Map<Mat>(x.data(), D, D);
  rho = (0.5 * (rho + rho.adjoint())).eval();
  {
    Vec v = Eigen::Map<Vec>(rho.data(), std::size_t(D) * D);
    double scale = gen.relax_rate > 0 ? gen.relax_rate : 1.0;
    inf.residual = (S * v).cwiseAbs().maxCoeff() / scale;
  }
  if (info) *info = inf;
  return QuantumState(L, rho);
}

QuantumState steady_state_direct(const GeneratorSpec& gen, DirectSolveInfo* info) {
  return SteadyStateSolver(gen).solve(gen, info);
}

}  // namespace qvdp

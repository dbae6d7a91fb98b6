#include <cmath>
#include <random>

#include <Eigen/SVD>

#include "doctest.h"
#include "qvdp/lindblad.hpp"

using namespace qvdp;

namespace {

// Null vector of the classical rate-equation matrix, computed by SVD.
Eigen::VectorXd rate_equation_oracle(double kp, double km, int N) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
  for (int n = 0; n < N; ++n) {
    if (n + 1 < N) {
      A(n + 1, n) += kp * (n + 1);
      A(n, n) -= kp * (n + 1);
    }
    if (n >= 2) {
      A(n - 2, n) += km * n * (n - 1);
      A(n, n) -= km * n * (n - 1);
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  Eigen::VectorXd p = svd.matrixV().col(N - 1);
  return p / p.sum();
}

QuantumState random_state(const SpaceLayout& l, unsigned seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> nd;
  int D = l.total();
  Mat A(D, D);
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) A(i, j) = cplx(nd(g), nd(g));
  Mat r = A * A.adjoint();
  return QuantumState(l, r / r.trace());
}

double nbar(const QuantumState& s) {
  double n = 0;
  for (int k = 0; k < s.dim(); ++k) n += k * s.rho()(k, k).real();
  return n;
}

EffectiveParams table_classical() {
  const double tp = 2 * M_PI;
  EffectiveParams p;
  p.kappa_plus = tp * 120.0;
  p.kappa_minus = tp * 17.0;
  p.V = tp * 100.0;
  return p;
}

}  // namespace

TEST_CASE("vdp generator structure") {
  auto p = table_classical();
  auto g = vdp_generator(p, SpaceLayout::modes({6, 6}));
  REQUIRE(g.dissipators.size() == 5);
  CHECK(g.dissipators[0].rate == p.kappa_plus);
  CHECK(g.dissipators[1].rate == p.kappa_plus);
  CHECK(g.dissipators[2].rate == p.kappa_minus);
  CHECK(g.dissipators[3].rate == p.kappa_minus);
  CHECK(g.dissipators[4].rate == p.V);
  CHECK_THROWS_AS(vdp_generator(p, SpaceLayout::modes({6})), Error);
  CHECK_THROWS_AS(vdp_generator(p, SpaceLayout::qubit_modes({4, 4})), Error);
}

TEST_CASE("generator_apply basics") {
  GeneratorSpec g;
  g.hamiltonian = OperatorMatrix(SpaceLayout::modes({4}), Mat::Zero(4, 4));
  auto f1 = canonical_state(StateSpec::fock(1), 4);
  CHECK(max_abs(generator_apply(g, f1)) == 0.0);

  g.dissipators.push_back({0.7, annihilation(4), "decay"});
  Mat d = generator_apply(g, f1);
  CHECK(d(0, 0).real() == doctest::Approx(0.7));
  CHECK(d(1, 1).real() == doctest::Approx(-0.7));

  auto p = table_classical();
  p.delta2 = 2 * M_PI * 50.0;
  p.phi = 0.3;
  auto gen = vdp_generator(p, SpaceLayout::modes({5, 5}));
  auto s = random_state(gen.layout(), 7);
  Mat dr = generator_apply(gen, s);
  CHECK(std::abs(dr.trace()) < 1e-10 * p.kappa_plus);
  CHECK(hermiticity_error(dr) < 1e-10 * p.kappa_plus);
}

TEST_CASE("superoperator agrees with dense apply") {
  auto p = table_classical();
  p.drive_amp = 100.0;
  p.phi = 1.1;
  auto gen = vdp_generator(p, SpaceLayout::modes({4, 5}));
  auto s = random_state(gen.layout(), 3);
  SpMat S = liouvillian(gen);
  int D = s.dim();
  Vec v = Eigen::Map<const Vec>(s.rho().data(), D * D);
  Vec out = S * v;
  Mat ref = generator_apply(gen, s);
  CHECK(max_abs(Eigen::Map<Mat>(out.data(), D, D) - ref) < 1e-9);
}

TEST_CASE("evolve: zero duration and step bound") {
  auto g = single_vdp_generator(1.0, 0.2, 10);
  auto v = canonical_state(StateSpec::vacuum(), 10);
  auto same = evolve(v, g, 0.0, 1e-3);
  CHECK(max_abs(same.rho() - v.rho()) == 0.0);
  CHECK_THROWS_AS(evolve(v, g, 1.0, 10 * max_stable_step(g)), Error);
}

TEST_CASE("evolve: damped coherent state") {
  const double gamma = 1.3, t = 0.8;
  const cplx alpha(1.2, 0.5);
  const int N = 25;
  GeneratorSpec g;
  g.hamiltonian = OperatorMatrix(SpaceLayout::modes({N}), Mat::Zero(N, N));
  g.dissipators.push_back({gamma, annihilation(N), "decay"});
  auto s = canonical_state(StateSpec::coherent(alpha), N);
  auto out = evolve(s, g, t, max_stable_step(g));
  auto ref = canonical_state(StateSpec::coherent(alpha * std::exp(-gamma * t / 2)), N);
  CHECK(max_abs(out.rho() - ref.rho()) < 1e-5);
}

TEST_CASE("RK4 fourth-order convergence") {
  auto g = single_vdp_generator(1.0, 0.3, 12, 0.5, 0.4);
  auto s = canonical_state(StateSpec::coherent(1.0), 12);
  double h = max_stable_step(g);
  auto r1 = evolve(s, g, 0.5, h);
  auto r2 = evolve(s, g, 0.5, h / 2);
  auto r3 = evolve(s, g, 0.5, h / 4);
  double c1 = trace_distance(r1, r2), c2 = trace_distance(r2, r3);
  CHECK(c2 < c1 / 15);
}

TEST_CASE("single vdP steady state against the rate-equation oracle") {
  const int N = 30;
  for (double ratio : {0.14, 0.42}) {
    auto g = single_vdp_generator(1.0, ratio, N);
    SteadyStateInfo info;
    auto ss = steady_state(g, canonical_state(StateSpec::vacuum(), N), 1e-6, &info);
    auto p = rate_equation_oracle(1.0, ratio, N);
    Mat off = ss.rho();
    off.diagonal().setZero();
    CHECK(max_abs(off) < 1e-6);
    double worst = 0;
    for (int n = 0; n < N; ++n) worst = std::max(worst, std::abs(ss.rho()(n, n).real() - p(n)));
    CHECK(worst < 1e-6);
    // frozen oracle occupations for the isolated oscillator
    CHECK(nbar(ss) == doctest::Approx(ratio == 0.14 ? 4.0969 : 1.7328).epsilon(2e-4));
    auto direct = steady_state_direct(g);
    CHECK(trace_distance(direct, ss) < 1e-5);
  }
}

TEST_CASE("trace distance") {
  auto f0 = canonical_state(StateSpec::fock(0), 3), f1 = canonical_state(StateSpec::fock(1), 3);
  CHECK(trace_distance(f0, f0) == 0.0);
  CHECK(trace_distance(f0, f1) == doctest::Approx(1.0));
  QuantumState mix(f0.layout(), 0.5 * (f0.rho() + f1.rho()));
  CHECK(trace_distance(f0, mix) == doctest::Approx(0.5));
  CHECK_THROWS_AS(trace_distance(f0, canonical_state(StateSpec::fock(0), 4)), Error);
}

TEST_CASE("uncoupled evolution keeps products and U(1) symmetry") {
  auto p = table_classical();
  p.V = 0.0;
  SpaceLayout l = SpaceLayout::modes({6, 6});
  auto g = vdp_generator(p, l);
  auto s1 = canonical_state(StateSpec::fock(1), 6), s2 = canonical_state(StateSpec::fock(2), 6);
  auto out = evolve(tensor(s1, s2), g, 1.0 / p.kappa_plus, max_stable_step(g));
  auto r1 = partial_trace(out, {0}), r2 = partial_trace(out, {1});
  CHECK(max_abs(out.rho() - tensor(r1, r2).rho()) < 1e-10);
  CHECK(std::abs(expectation(out, mode_op(0, l))) < 1e-8);
  CHECK(std::abs(expectation(out, mode_op(1, l))) < 1e-8);
  auto ss = steady_state_direct(g);
  CHECK(std::abs(expectation(ss, mode_op(0, l))) < 1e-6);
}

TEST_CASE("direct solvers agree with time evolution") {
  auto p = table_classical();
  p.phi = 0.7;
  p.delta2 = 2 * M_PI * 40.0;
  SpaceLayout l = SpaceLayout::modes({6, 6});
  auto g = vdp_generator(p, l);
  DirectSolveInfo info;
  auto d = steady_state_direct(g, &info);
  CHECK(info.sector_only);
  CHECK(info.residual < 1e-9);
  auto w = steady_state(g, tensor(canonical_state(StateSpec::vacuum(), 6),
                                  canonical_state(StateSpec::vacuum(), 6)), 1e-8);
  CHECK(trace_distance(d, w) < 1e-6);

  p.drive_amp = 0.4 * p.kappa_plus;
  auto gd = vdp_generator(p, l);
  auto dd = steady_state_direct(gd, &info);
  CHECK(!info.sector_only);
  CHECK(info.residual < 1e-8);
  auto wd = steady_state(gd, d, 1e-8);
  CHECK(trace_distance(dd, wd) < 1e-6);
  CHECK(std::abs(expectation(dd, mode_op(0, l))) > 0.05);
}

TEST_CASE("long evolution conserves trace and Hermiticity") {
  auto p = table_classical();
  p.phi = M_PI / 3;
  SpaceLayout l = SpaceLayout::modes({8, 8});
  auto g = vdp_generator(p, l);
  // 25 cycles of the classical-regime protocol, T = 196.39 us
  auto out = evolve(tensor(canonical_state(StateSpec::vacuum(), 8), canonical_state(StateSpec::vacuum(), 8)),
                    g, 25 * 196.39e-6, max_stable_step(g));
  CHECK(std::abs(out.rho().trace() - 1.0) < 1e-6);
  CHECK(hermiticity_error(out.rho()) < 1e-8);
  CHECK(out.min_eigenvalue() > -1e-6);
}

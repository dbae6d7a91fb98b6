#include <cmath>

#include "doctest.h"
#include "qvdp/lindblad.hpp"
#include "qvdp/syncmetrics.hpp"

using namespace qvdp;

namespace {

Grid2D grid_from(const Eigen::MatrixXd& mass) {
  Grid2D g;
  g.axis1 = {0.0, double(mass.rows() - 1), int(mass.rows())};
  g.axis2 = {0.0, double(mass.cols() - 1), int(mass.cols())};
  g.values = mass.cast<cplx>();
  return g;
}

QuantumState rotate(const QuantumState& s, double th) {
  const int N1 = s.layout().dims[0], N2 = s.layout().dims[1];
  Vec ph(N1 * N2);
  for (int a = 0; a < N1; ++a)
    for (int b = 0; b < N2; ++b) ph(a * N2 + b) = std::polar(1.0, th * (a + b));
  Mat r = ph.asDiagonal() * s.rho() * ph.conjugate().asDiagonal();
  return QuantumState(s.layout(), r);
}

const double kKp = 2 * M_PI * 120.0, kKm = 2 * M_PI * 17.0, kV0 = 2 * M_PI * 100.0;

}  // namespace

TEST_CASE("plug-in MI: product and diagonal grids") {
  Eigen::VectorXd p(6), q(5);
  p << 0.1, 0.2, 0.3, 0.15, 0.05, 0.2;
  q << 0.3, 0.1, 0.2, 0.25, 0.15;
  CHECK(std::abs(mutual_information_2d(grid_from(p * q.transpose()))) < 1e-9);
  for (int n : {4, 9}) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Identity(n, n) / n;
    CHECK(mutual_information_2d(grid_from(d)) == doctest::Approx(std::log(n)).epsilon(1e-12));
  }
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(4, 4);
  CHECK_THROWS_AS(mutual_information_2d(grid_from(z)), Error);
}

TEST_CASE("plug-in MI: Gaussian oracle and symmetries") {
  const int n = 160;
  const double rho = 0.5, lim = 6.0;
  Grid2D g;
  g.axis1 = g.axis2 = {-lim, lim, n};
  g.values.resize(n, n);
  const double h = g.axis1.step();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double x = g.axis1.at(i), y = g.axis2.at(j);
      g.values(i, j) = std::exp(-(x * x - 2 * rho * x * y + y * y) / (2 * (1 - rho * rho))) /
                       (2 * M_PI * std::sqrt(1 - rho * rho));
    }
  const double I = mutual_information_2d(g);
  CHECK(I == doctest::Approx(-0.5 * std::log(1 - rho * rho)).epsilon(0.05));
  CHECK(std::abs(I - 0.1438) < 0.05 * 0.1438);
  CHECK(pearson(g) == doctest::Approx(rho).epsilon(1e-3));
  (void)h;

  Grid2D t = g;
  t.values = g.values.transpose();
  CHECK(mutual_information_2d(t) == doctest::Approx(I).epsilon(1e-12));
  // same permutation on both axes
  std::vector<int> perm(n);
  for (int k = 0; k < n; ++k) perm[k] = (k * 37) % n;
  Grid2D pg = g;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) pg.values(i, j) = g.values(perm[i], perm[j]);
  CHECK(mutual_information_2d(pg) == doctest::Approx(I).epsilon(1e-12));
}

TEST_CASE("von Neumann MI") {
  auto a = canonical_state(StateSpec::coherent({0.7, 0.2}), 8);
  Mat th = Mat::Zero(6, 6);
  for (int k = 0; k < 6; ++k) th(k, k) = std::pow(0.5, k);
  th /= th.trace();
  auto b = QuantumState(SpaceLayout::modes({6}), th);
  auto ab = tensor(a, b);
  CHECK(std::abs(von_neumann_mi(ab)) < 1e-9);

  // (|00> + 0.6|11> + 0.3|22>) normalised
  Vec psi = Vec::Zero(16);
  psi(0) = 1.0;
  psi(5) = 0.6;
  psi(10) = 0.3;
  psi.normalize();
  auto ent = pure_state(SpaceLayout::modes({4, 4}), psi);
  double p0 = 1 / 1.45, p1 = 0.36 / 1.45, p2 = 0.09 / 1.45;
  double S1 = -(p0 * std::log(p0) + p1 * std::log(p1) + p2 * std::log(p2));
  CHECK(von_neumann_mi(ent) == doctest::Approx(2 * S1).epsilon(1e-10));

  // zero exactly when the state is a product
  Mat mix = 0.9 * ab.rho();
  auto ab2 = tensor(canonical_state(StateSpec::fock(1), 8), canonical_state(StateSpec::fock(2), 6));
  mix += 0.1 * ab2.rho();
  auto m = QuantumState(ab.layout(), mix);
  auto prod = tensor(partial_trace(m, {0}), partial_trace(m, {1}));
  CHECK(trace_distance(m, prod) > 1e-6);
  CHECK(von_neumann_mi(m) > 1e-9);

  Mat bad = ab.rho();
  bad(0, 0) -= 0.01;
  bad(1, 1) += 0.01;
  bad(0, 1) += 0.3;
  bad(1, 0) += 0.3;
  CHECK_THROWS_AS(von_neumann_mi(QuantumState(ab.layout(), bad)), Error);
}

TEST_CASE("canonical phase distribution") {
  auto vac = canonical_state(StateSpec::vacuum(), 10);
  auto h = phase_distribution(vac, 16);
  double tot = 0.0;
  for (double d : h.density) {
    CHECK(d == doctest::Approx(1 / (2 * M_PI)).epsilon(1e-12));
    tot += d * h.width;
  }
  CHECK(tot == doctest::Approx(1.0).epsilon(1e-6));

  auto coh = canonical_state(StateSpec::coherent(std::polar(2.0, M_PI / 4)), 30);
  auto hc = phase_distribution(coh, 32);
  int k = int(std::max_element(hc.density.begin(), hc.density.end()) - hc.density.begin());
  CHECK(std::abs(hc.centers[k] - M_PI / 4) <= hc.width / 2);
  tot = 0.0;
  for (double d : hc.density) {
    CHECK(d >= 0.0);
    tot += d * hc.width;
  }
  CHECK(tot == doctest::Approx(1.0).epsilon(1e-6));

  // bins straddling phi = 0 and pi
  auto cat = canonical_state(StateSpec::cat_mixture({2.0, 0.0}), 30);
  auto hk = phase_distribution(cat, 36);
  CHECK(hk.density[0] == doctest::Approx(hk.density[35]).epsilon(1e-10));
  CHECK(hk.density[17] == doctest::Approx(hk.density[18]).epsilon(1e-10));
  CHECK(hk.density[0] == doctest::Approx(hk.density[17]).epsilon(1e-10));
  CHECK(hk.density[9] < 0.1 * hk.density[0]);
  CHECK_THROWS_AS(phase_distribution(vac, 4), Error);
}

TEST_CASE("resultant length") {
  Mat d = Mat::Zero(10, 10);
  for (int k = 0; k < 10; ++k) d(k, k) = 0.1;
  CHECK(resultant_length(QuantumState(SpaceLayout::modes({10}), d)) < 1e-10);
  CHECK(resultant_length(canonical_state(StateSpec::fock(3), 10)) < 1e-10);

  auto c3 = canonical_state(StateSpec::coherent({3.0, 0.0}), 40);
  const double S = resultant_length(c3);
  CHECK(S > 0.95);
  CHECK(S <= 1.0 + 1e-9);
  // numerical integration of e^{i phi} over the phase histogram
  auto h = phase_distribution(c3, 2000);
  cplx m = 0.0;
  for (std::size_t k = 0; k < h.centers.size(); ++k)
    m += h.density[k] * h.width * std::polar(1.0, h.centers[k]);
  // bin averaging multiplies the first moment by sinc(width/2)
  double sinc = std::sin(h.width / 2) / (h.width / 2);
  CHECK(std::abs(m) / sinc == doctest::Approx(S).epsilon(1e-8));

  auto rot = canonical_state(StateSpec::coherent(std::polar(3.0, 2.1)), 40);
  CHECK(resultant_length(rot) == doctest::Approx(S).epsilon(1e-10));
}

TEST_CASE("Wigner angular marginal variant") {
  ReadoutSettings s;
  s.shots = 0;
  auto w = wigner(canonical_state(StateSpec::coherent(std::polar(2.0, M_PI / 4)), 30), s);
  auto h = wigner_phase_distribution(w, 32);
  int k = int(std::max_element(h.density.begin(), h.density.end()) - h.density.begin());
  CHECK(std::abs(h.centers[k] - M_PI / 4) <= h.width / 2);
  CHECK(wigner_resultant_length(w) > 0.8);
  auto wv = wigner(canonical_state(StateSpec::vacuum(), 10), s);
  CHECK(wigner_resultant_length(wv) < 1e-3);  // the half-open grid is not exactly symmetric
}

TEST_CASE("combined MI of the uncoupled product steady state") {
  auto g = single_vdp_generator(kKp, kKm, 18);
  auto ss = steady_state_direct(g);
  auto prod = tensor(ss, ss);
  ReadoutSettings s;
  s.shots = 0;
  auto r = combined_mi(prod, s);
  CHECK(r.I_combined < 0.02);
  CHECK(r.I_combined == doctest::Approx(r.I_xx + r.I_xp).epsilon(1e-15));
  CHECK(r.I_xx >= -1e-9);
  CHECK(r.I_vn.value() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(r.S1 < 1e-10);
}

TEST_CASE("combined MI at phi = pi/2 and under a global rotation") {
  EffectiveParams p;
  p.kappa_plus = kKp;
  p.kappa_minus = kKm;
  p.V = kV0;
  p.phi = M_PI / 2;
  auto ss = steady_state_direct(vdp_generator(p, SpaceLayout::modes({16, 16})));
  ReadoutSettings s;
  s.shots = 0;
  auto r = combined_mi(ss, s, false);
  CHECK(std::abs(r.pearson_xx) < 1e-6);
  CHECK(r.I_xp > 0.05);
  CHECK(r.I_xp > 5 * r.I_xx);
  auto rr = combined_mi(rotate(ss, 0.9), s, false);
  CHECK(rr.I_combined == doctest::Approx(r.I_combined).epsilon(0.02));
}

// The x1-x2 distribution at phi = pi/2 is a ring: uncorrelated but not independent,
// so the plug-in MI stays near 0.04 nats on any readout grid.
TEST_CASE("I_xx below 0.02 at phi = pi/2" * doctest::may_fail()) {
  EffectiveParams p;
  p.kappa_plus = kKp;
  p.kappa_minus = kKm;
  p.V = kV0;
  p.phi = M_PI / 2;
  auto ss = steady_state_direct(vdp_generator(p, SpaceLayout::modes({18, 18})));
  ReadoutSettings s;
  s.shots = 0;
  CHECK(combined_mi(ss, s, false).I_xx < 0.02);
}

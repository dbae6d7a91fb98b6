#include "qvdp/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>

#include "qvdp/io.hpp"
#include "qvdp/meanfield.hpp"
#include "qvdp/rng.hpp"

namespace qvdp {

using nlohmann::json;

namespace {

const double kTwoPi = 2 * M_PI;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t i) {
  return splitmix64(splitmix64(seed ^ (tag * 0x9e3779b97f4a7c15ULL)) + i);
}

std::string utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

bool near(double a, double b) { return std::abs(a - b) < 1e-9; }

class Run {
 public:
  Run(const ExperimentConfig& c, RunResult& r) : c_(c), r_(r) {}

  const ExperimentConfig& cfg() const { return c_; }
  void stage(const std::string& s) { stage_ = s; }
  const std::string& stage() const { return stage_; }

  void check(const std::string& name, bool pass, double value, double bound,
             const std::string& detail = "") {
    r_.checks.push_back({name, pass, value, bound, detail});
  }
  void record(const Checkpoint& cp) { r_.checkpoints.push_back(cp); }
  void record(const std::string& st, const QuantumState& s) { record(checkpoint(st, s)); }

  std::string path(const std::string& name) {
    r_.outputs.push_back(name);
    return (std::filesystem::path(c_.output_dir) / name).string();
  }
  void write(const std::string& name, CsvTable t) {
    t.meta("scenario", scenario_name(c_.scenario));
    t.meta("seed", std::to_string(c_.seed));
    t.meta("config_hash", hex64(config_hash(c_)));
    t.write(path(name));
  }
  void grid(const std::string& name, const Grid2D& g, const std::string& u1, const std::string& u2) {
    write_grid(path(name), g, u1, u2);
  }

  ReadoutSettings readout(std::uint64_t tag, std::uint64_t i, int shots) const {
    ReadoutSettings s = c_.readout;
    s.shots = shots;
    s.seed = derive_seed(c_.seed, tag, i);
    return s;
  }

 private:
  const ExperimentConfig& c_;
  RunResult& r_;
  std::string stage_ = "setup";
};

const char* kQuad = "quadrature, x = sqrt2 Re alpha";

// Trace of the qubit if present, else the state itself.
QuantumState two_mode_state(const ExperimentConfig& c, double phi) {
  if (c.engine == Engine::Effective) {
    EffectiveParams p = *c.effective;
    p.phi = phi;
    return steady_state_direct(vdp_generator(p, SpaceLayout::modes(c.cutoffs)));
  }
  PulseSchedule s = *c.schedule;
  for (auto& seg : s.segments)
    if (seg.kind == SegmentKind::SYNC) seg.phase = phi - M_PI;
  auto out = run_protocol(protocol_initial_state(c.cutoffs[0], c.cutoffs[1]), s, c.n_uncoupled,
                          c.n_coupled, c.seed);
  return partial_trace(out, {1, 2});
}

void single_vdp(Run& run) {
  const auto& c = run.cfg();
  if (!c.effective) throw Error(ErrorKind::Config, "single-vdp needs the effective engine");
  const double kp = c.effective->kappa_plus;
  const int N = c.cutoffs[0];
  CsvTable t({"ratio", "nbar", "alpha_p_reconstructed", "alpha_p_direct", "alpha_p_meanfield",
              "top_population"});
  t.meta("kappa_plus_rad_s", kp);
  t.meta("cutoff", std::to_string(N));
  t.meta("units", "alpha_p in |alpha| units");
  bool small_ok = true, large_ok = true;
  int n_small = 0, n_large = 0;
  double worst_small = 0.0;
  for (std::size_t i = 0; i < c.scan.ratios.size(); ++i) {
    const double r = c.scan.ratios[i];
    run.stage("steady-state ratio " + fmt_double(r));
    auto ss = steady_state_direct(single_vdp_generator(kp, r * kp, N));
    run.record("single-vdp", ss);
    run.stage("readout ratio " + fmt_double(r));
    Grid2D w = wigner(ss, run.readout(1, i, c.readout.shots));
    Grid2D wd = wigner_direct_grid(ss, w);
    const double ap = donut_radius(w), apd = donut_radius(wd);
    const double mf = std::sqrt(1.0 / (2 * r));
    const double nbar = occupations(ss)[0];
    t.row({r, nbar, ap, apd, mf, top_population(ss)});
    run.grid("single_vdp_wigner_" + std::to_string(i) + ".csv", w, kQuad, "quadrature, p = sqrt2 Im alpha");
    if (r <= 0.15) {
      ++n_small;
      const double rel = std::abs(ap - mf) / mf;
      worst_small = std::max(worst_small, rel);
      small_ok = small_ok && rel <= 0.10;
    }
    if (r >= 2.0) {
      ++n_large;
      large_ok = large_ok && ap < mf;
    }
  }
  run.stage("write");
  run.write("single_vdp.csv", t);
  if (n_small) run.check("alpha_p_meanfield_small_ratio", small_ok, worst_small, 0.10);
  if (n_large) run.check("alpha_p_below_meanfield_large_ratio", large_ok, double(n_large), 0.0);
}

void limit_cycle(Run& run) {
  const auto& c = run.cfg();
  if (!c.effective) throw Error(ErrorKind::Config, "limit-cycle needs the effective engine");
  const auto& p = *c.effective;
  const int N = c.cutoffs[0];
  auto gen = single_vdp_generator(p.kappa_plus, p.kappa_minus, N, p.delta1, p.drive_amp, p.drive_phase);
  run.stage("steady-state");
  auto ss = steady_state_direct(gen);
  run.record("limit-cycle steady", ss);
  const double tk = 1.0 / p.kappa_plus;
  const double dt = std::min(max_stable_step(gen), 0.01 * tk);
  // snapshots at these multiples of 1/kappa_+
  const std::vector<double> snaps{0.0, 0.5, 1.0, 2.0, 5.0, 10.0};
  QuantumState s = canonical_state(StateSpec::coherent(cplx(0.5, 0.0)), N);
  CsvTable tr({"t", "re_a", "im_a", "nbar", "distance_to_steady"});
  tr.meta("t_units", "s");
  tr.meta("kappa_plus_rad_s", p.kappa_plus);
  const OperatorMatrix a = annihilation(N);
  const double record = 0.25 * tk;
  const int steps = int(std::lround(snaps.back() / 0.25));
  std::size_t next = 0;
  for (int k = 0; k <= steps; ++k) {
    const double t = k * record;
    run.stage("evolve t=" + fmt_double(t));
    if (k > 0) s = evolve(s, gen, record, std::min(dt, record));
    cplx ea = expectation(s, a);
    tr.row({t, ea.real(), ea.imag(), expectation(s, a.adjoint() * a).real(), trace_distance(s, ss)});
    if (next < snaps.size() && std::abs(k * 0.25 - snaps[next]) < 1e-9) {
      run.record("limit-cycle evolve", s);
      Grid2D w = wigner(s, run.readout(2, next, c.readout.shots));
      w.meta["t"] = t;
      run.grid("limit_cycle_wigner_" + std::to_string(next) + ".csv", w, kQuad,
               "quadrature, p = sqrt2 Im alpha");
      ++next;
    }
  }
  run.stage("readout steady");
  Grid2D w = wigner(ss, run.readout(2, snaps.size(), c.readout.shots));
  run.grid("limit_cycle_wigner_steady.csv", w, kQuad, "quadrature, p = sqrt2 Im alpha");
  run.write("limit_cycle.csv", tr);
  const double nb = occupations(s)[0], nss = occupations(ss)[0];
  run.check("limit_cycle_nbar_relaxed", std::abs(nb - nss) <= 0.05 * nss, std::abs(nb - nss) / nss, 0.05);
  run.check("limit_cycle_radius_vs_meanfield", true, donut_radius(w), mf_radius(p),
            "reported only");
}

void sync(Run& run) {
  const auto& c = run.cfg();
  const auto& phis = c.scan.phis;
  std::vector<std::optional<QuantumState>> states(phis.size());
  run.stage("steady-state");
  parallel_for(int(phis.size()), c.threads, [&](int i) { states[i] = two_mode_state(c, phis[i]); });
  CsvTable t({"phi", "cov_x1x2", "pearson_xx", "I_xx", "I_xp", "I", "I_vn", "S1", "S2", "nbar1",
              "nbar2", "top_population"});
  t.meta("engine", engine_name(c.engine));
  t.meta("mi_units", "nats");
  std::map<double, std::pair<double, SyncReport>> by_phi;
  double min_mi = 0.0, max_s = 0.0;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    const auto& ss = *states[i];
    run.record("sync phi=" + fmt_double(phis[i]), ss);
    run.stage("readout phi=" + fmt_double(phis[i]));
    ReadoutSettings rs = run.readout(3, i, c.readout.shots);
    SyncReport rep = combined_mi(ss, rs, true);
    Grid2D pxx = joint_distribution(ss, rs);
    ReadoutSettings rp = rs;
    rp.phi2 += M_PI / 2;
    rp.seed += 1;
    Grid2D pxp = joint_distribution(ss, rp);
    pxp.label2 = "p2";
    const double cov = quadrature_covariance(ss);
    auto nb = occupations(ss);
    t.row({phis[i], cov, rep.pearson_xx, rep.I_xx, rep.I_xp, rep.I_combined, rep.I_vn.value_or(NAN),
           rep.S1, rep.S2, nb[0], nb[1], top_population(ss)});
    run.grid("sync_pxx_" + std::to_string(i) + ".csv", pxx, "quadrature x1", "quadrature x2");
    run.grid("sync_pxp_" + std::to_string(i) + ".csv", pxp, "quadrature x1", "quadrature p2");
    by_phi[phis[i]] = {cov, rep};
    min_mi = std::min({min_mi, rep.I_xx, rep.I_xp, rep.I_vn.value_or(0.0)});
    max_s = std::max({max_s, rep.S1, rep.S2});
  }
  run.stage("write");
  run.write("sync.csv", t);
  auto find = [&](double phi) -> const std::pair<double, SyncReport>* {
    for (const auto& [k, v] : by_phi)
      if (near(k, phi)) return &v;
    return nullptr;
  };
  const auto *p0 = find(0.0), *pp = find(M_PI), *ph = find(M_PI / 2);
  if (p0) run.check("cov_positive_phi0", p0->first > 0, p0->first, 0.0);
  if (pp) run.check("cov_negative_phi_pi", pp->first < 0, pp->first, 0.0);
  if (p0 && ph) {
    const double rel = std::abs(ph->first) / std::abs(p0->first);
    run.check("cov_small_phi_half_pi", rel < 0.2, rel, 0.2);
  }
  if (ph) run.check("I_xp_exceeds_I_xx_phi_half_pi", ph->second.I_xp > ph->second.I_xx,
                    ph->second.I_xp - ph->second.I_xx, 0.0);
  run.check("mi_nonnegative", min_mi >= -1e-9, min_mi, -1e-9);
  run.check("resultant_length_fock_diagonal", max_s < 1e-10, max_s, 1e-10);

  if (c.engine == Engine::Stroboscopic) {
    run.stage("crosscheck");
    CsvTable x({"phi", "trace_distance"});
    double worst = 0.0;
    for (std::size_t i = 0; i < phis.size(); ++i) {
      PulseSchedule s = *c.schedule;
      for (auto& seg : s.segments)
        if (seg.kind == SegmentKind::SYNC) seg.phase = phis[i] - M_PI;
      auto eff = steady_state_direct(vdp_generator(effective_rates(s), SpaceLayout::modes(c.cutoffs)));
      const double d = trace_distance(*states[i], eff);
      x.row({phis[i], d});
      worst = std::max(worst, d);
    }
    run.write("sync_crosscheck.csv", x);
    run.check("stroboscopic_vs_effective", worst < c.scan.crosscheck_bound, worst, c.scan.crosscheck_bound);
  }
}

void arnold(Run& run) {
  const auto& c = run.cfg();
  run.stage("arnold-sweep");
  auto res = arnold_sweep(c, c.scan.v_over_v0, c.scan.detuning_hz);
  CsvTable t({"v_over_v0", "detuning_hz", "I_mean", "I_std", "I_xx_mean", "I_xx_std", "I_xp_mean",
              "I_xp_std", "I_vn_mean", "I_vn_std", "error"});
  t.meta("mi_units", "nats");
  t.meta("ensemble_size", std::to_string(c.noise.ensemble_size));
  t.meta("shots", std::to_string(c.noise.shots));
  t.meta("offset_v0_column", res.offset);
  CsvTable m({"v_over_v0", "detuning_hz", "member", "I_xx", "I_xp", "I", "I_vn", "S1", "S2"});
  double min_mi = 0.0, max_s = 0.0;
  int failed = 0;
  for (const auto& pt : res.points) {
    for (const auto& cp : pt.checkpoints)
      if (!cp.stage.empty()) run.record(cp);
    if (!pt.error.empty()) ++failed;
    auto f = [](double v) { return fmt_double(v); };
    t.row_text({f(pt.v_over_v0), f(pt.detuning_hz), f(pt.I.mean), f(pt.I.std), f(pt.I_xx.mean),
                f(pt.I_xx.std), f(pt.I_xp.mean), f(pt.I_xp.std), f(pt.I_vn.mean), f(pt.I_vn.std),
                pt.error.empty() ? "" : "\"" + pt.error + "\""});
    if (!pt.error.empty()) continue;
    for (std::size_t k = 0; k < pt.members.size(); ++k) {
      const auto& r = pt.members[k];
      m.row({pt.v_over_v0, pt.detuning_hz, double(k), r.I_xx, r.I_xp, r.I_combined,
             r.I_vn.value_or(NAN), r.S1, r.S2});
      min_mi = std::min({min_mi, r.I_xx, r.I_xp, r.I_vn.value_or(0.0)});
      max_s = std::max({max_s, r.S1, r.S2});
    }
  }
  CsvTable ct({"v0_over_v0", "d0_hz", "v1_over_v0", "d1_hz"});
  ct.meta("level", c.scan.contour_level);
  for (const auto& s : res.contour) ct.row({s.v0, s.d0, s.v1, s.d1});
  run.stage("write");
  run.write("arnold.csv", t);
  run.write("arnold_members.csv", m);
  run.write("arnold_contour.csv", ct);
  run.check("points_failed", failed == 0, failed, 0);
  run.check("mi_nonnegative", min_mi >= -1e-9, min_mi, -1e-9);
  run.check("resultant_length_fock_diagonal", max_s < 1e-10, max_s, 1e-10);
  auto at = [&](double v, double d) -> const ArnoldPoint* {
    for (const auto& p : res.points)
      if (near(p.v_over_v0, v) && near(p.detuning_hz, d) && p.error.empty()) return &p;
    return nullptr;
  };
  const auto *a = at(1.0, 0.0), *b = at(0.25, 0.0), *d = at(1.0, 150.0);
  if (a && b) {
    const double margin = a->I.mean - b->I.mean;
    run.check("I_increases_with_V", margin > std::max(a->I.std, b->I.std), margin,
              std::max(a->I.std, b->I.std));
  }
  if (a && d) {
    const double margin = a->I.mean - d->I.mean;
    run.check("I_decreases_with_detuning", margin > std::max(a->I.std, d->I.std), margin,
              std::max(a->I.std, d->I.std));
  }
}

void sense(Run& run) {
  const auto& c = run.cfg();
  run.stage("sense-sweep");
  auto pts = sense_sweep(c, c.scan.detuning_hz);
  CsvTable t({"detuning_hz", "S1_mean", "S1_std", "S2_mean", "S2_std", "error"});
  t.meta("phase_method", c.phase_method == PhaseMethod::Canonical ? "canonical" : "wigner");
  t.meta("drive_amp_rad_s", c.effective->drive_amp);
  CsvTable m({"detuning_hz", "member", "S1", "S2"});
  int failed = 0;
  for (const auto& p : pts) {
    for (const auto& cp : p.checkpoints)
      if (!cp.stage.empty()) run.record(cp);
    if (!p.error.empty()) ++failed;
    auto f = [](double v) { return fmt_double(v); };
    t.row_text({f(p.detuning_hz), f(p.S1.mean), f(p.S1.std), f(p.S2.mean), f(p.S2.std),
                p.error.empty() ? "" : "\"" + p.error + "\""});
    if (!p.error.empty()) continue;
    for (std::size_t k = 0; k < p.S1_members.size(); ++k)
      m.row({p.detuning_hz, double(k), p.S1_members[k], p.S2_members[k]});
  }

  // Wigner functions of both modes at the smallest and largest |detuning|.
  std::vector<std::size_t> order(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::abs(pts[x].detuning_hz) < std::abs(pts[y].detuning_hz);
  });
  for (std::size_t which : {order.front(), order.back()}) {
    run.stage("wigner detuning=" + fmt_double(pts[which].detuning_hz));
    EffectiveParams p = *c.effective;
    p.delta2 = p.delta1 + kTwoPi * pts[which].detuning_hz;
    auto ss = steady_state_direct(vdp_generator(p, SpaceLayout::modes(c.cutoffs)));
    run.record("sense nominal", ss);
    for (std::size_t mode : {0, 1}) {
      auto ms = partial_trace(ss, {mode});
      Grid2D w = wigner(ms, run.readout(4, 2 * which + mode, c.readout.shots));
      w.meta["detuning_hz"] = pts[which].detuning_hz;
      w.meta["mode"] = double(mode + 1);
      run.grid("sense_wigner_m" + std::to_string(mode + 1) + "_" + std::to_string(which) + ".csv", w,
               kQuad, "quadrature, p = sqrt2 Im alpha");
    }
    if (which == order.back()) break;
  }
  run.stage("write");
  run.write("sense.csv", t);
  run.write("sense_members.csv", m);
  run.check("points_failed", failed == 0, failed, 0);
  if (failed) return;

  const auto& z = pts[order.front()];
  if (c.effective->drive_amp > 0) {
    bool peak = true, mono = true, m1 = true;
    double worst_m1 = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const auto& p = pts[order[k]];
      peak = peak && p.S2.mean <= z.S2.mean + 1e-12;
      if (k > 0) {
        const auto& q = pts[order[k - 1]];
        if (std::abs(p.detuning_hz) > std::abs(q.detuning_hz))
          mono = mono && p.S2.mean <= q.S2.mean + std::max(p.S2.std, q.S2.std);
      }
      const double rel = std::abs(p.S1.mean - z.S1.mean) / z.S1.mean;
      worst_m1 = std::max(worst_m1, rel);
      m1 = m1 && rel <= 0.10;
    }
    run.check("S2_peak_at_zero_detuning", peak, z.S2.mean, 0.0);
    run.check("S2_decreases_with_detuning", mono, pts[order.back()].S2.mean, z.S2.mean);
    run.check("S1_locked_within_10pct", m1, worst_m1, 0.10);
  } else {
    double worst = 0.0;
    for (const auto& p : pts) worst = std::max(worst, p.S2.mean);
    run.check("S2_small_without_drive", worst < 0.05, worst, 0.05);
  }
}

void meanfield(Run& run) {
  const auto& c = run.cfg();
  const auto& p = *c.effective;
  run.stage("fixed-points");
  auto fps = fixed_points(p);
  CsvTable t({"point", "re_a1", "im_a1", "re_a2", "im_a2", "residual", "reduced_0", "reduced_1",
              "full_0", "full_1", "full_2", "full_3"});
  t.meta("rates", "1/s");
  const double tol = 1e-12 * p.kappa_plus;
  for (std::size_t i = 0; i < fps.size(); ++i) {
    auto r = stability(fps[i], p);
    auto f = stability_full(fps[i], p);
    const double res = mf_residual(fps[i], p);
    t.row({double(i), fps[i].alpha1.real(), fps[i].alpha1.imag(), fps[i].alpha2.real(),
           fps[i].alpha2.imag(), res, r.eigenvalues[0], r.eigenvalues[1], f.eigenvalues[0],
           f.eigenvalues[1], f.eigenvalues[2], f.eigenvalues[3]});
    // closed forms: trivial {k+ - 2V, k+}, synchronised {-k+ - 2V, -k+}
    const double s = i == 0 ? 1.0 : -1.0;
    const double e0 = s * p.kappa_plus - 2 * p.V, e1 = s * p.kappa_plus;
    std::vector<double> want{std::min(e0, e1), std::max(e0, e1)};
    const double err = std::max(std::abs(r.eigenvalues[0] - want[0]), std::abs(r.eigenvalues[1] - want[1]));
    run.check(i == 0 ? "trivial_eigenvalues" : "sync_eigenvalues", err <= tol, err, tol);
    if (i > 0) run.check("sync_residual", res < tol, res, tol);
  }
  run.stage("trajectory");
  const double tk = 1.0 / p.kappa_plus;
  auto traj = integrate_mf({cplx(0.1, 0.0), cplx(0.0, 0.05)}, p, 20 * tk, 0.005 * tk, 20);
  CsvTable tr({"t", "re_a1", "im_a1", "re_a2", "im_a2"});
  tr.meta("t_units", "s");
  for (const auto& s : traj)
    tr.row({s.t, s.s.alpha1.real(), s.s.alpha1.imag(), s.s.alpha2.real(), s.s.alpha2.imag()});
  run.stage("lissajous");
  std::vector<double> phis = c.scan.phis;
  if (phis.empty()) phis = {0.0, M_PI / 2, M_PI};
  auto curves = lissajous(p, phis);
  CsvTable lj({"phi", "k", "x1", "x2"});
  for (const auto& cv : curves)
    for (std::size_t k = 0; k < cv.x1.size(); ++k) lj.row({cv.phi, double(k), cv.x1[k], cv.x2[k]});
  run.stage("write");
  run.write("meanfield_fixed_points.csv", t);
  run.write("meanfield_trajectory.csv", tr);
  run.write("meanfield_lissajous.csv", lj);
  const auto& last = traj.back().s;
  run.check("trajectory_reaches_radius", std::abs(std::abs(last.alpha1) - mf_radius(p)) < 1e-3 * mf_radius(p),
            std::abs(last.alpha1), mf_radius(p));
}

void tomo_check(Run& run) {
  const auto& c = run.cfg();
  const int N = c.cutoffs[0];
  struct Item {
    std::string name;
    StateSpec spec;
  };
  const std::vector<Item> items{{"vacuum", StateSpec::vacuum()},
                                {"fock1", StateSpec::fock(1)},
                                {"coherent2", StateSpec::coherent(cplx(2.0, 0.0))},
                                {"cat_mixture3", StateSpec::cat_mixture(cplx(3.0, 0.0))}};
  CsvTable t({"state", "max_abs_error", "w0_reconstructed", "w0_direct", "integral"});
  t.meta("beta_max", c.readout.beta_max);
  t.meta("points", std::to_string(c.readout.points));
  t.meta("shots", std::to_string(c.readout.shots));
  t.meta("cutoff", std::to_string(N));
  for (std::size_t i = 0; i < items.size(); ++i) {
    run.stage("tomo " + items[i].name);
    auto s = canonical_state(items[i].spec, N);
    run.record("tomo " + items[i].name, s);
    Grid2D w = wigner(s, run.readout(5, i, c.readout.shots));
    Grid2D wd = wigner_direct_grid(s, w);
    const double err = (w.values - wd.values).cwiseAbs().maxCoeff();
    const double w0 = wigner_direct(s, 0.0);
    // value of the reconstruction nearest the origin
    int i0 = 0, j0 = 0;
    for (int k = 0; k < w.axis1.points; ++k)
      if (std::abs(w.axis1.at(k)) < std::abs(w.axis1.at(i0))) i0 = k;
    for (int k = 0; k < w.axis2.points; ++k)
      if (std::abs(w.axis2.at(k)) < std::abs(w.axis2.at(j0))) j0 = k;
    t.row_text({items[i].name, fmt_double(err), fmt_double(w.values(i0, j0).real()), fmt_double(w0),
                fmt_double(integrate(w) / 2)});
    run.grid("tomo_wigner_" + items[i].name + ".csv", w, kQuad, "quadrature, p = sqrt2 Im alpha");
    run.check("wigner_error_" + items[i].name, err <= 0.02, err, 0.02);
  }
  run.stage("tomo chi");
  ReadoutSettings rs = c.readout;
  rs.shots = 0;
  Grid2D chi = chi_grid(canonical_state(StateSpec::vacuum(), N), rs);
  double err = 0.0;
  for (int i = 0; i < chi.axis1.points; ++i)
    for (int j = 0; j < chi.axis2.points; ++j) {
      const double b2 = std::norm(cplx(chi.axis1.at(i), chi.axis2.at(j)));
      err = std::max(err, std::abs(chi.values(i, j) - std::exp(-b2 / 2)));
    }
  run.grid("tomo_chi_vacuum.csv", chi, "Re xi", "Im xi");
  run.stage("write");
  run.write("tomo_check.csv", t);
  run.check("chi_vacuum", err <= 1e-10, err, 1e-10);
}

json checks_json(const RunResult& r) {
  json a = json::array();
  for (const auto& c : r.checks) {
    json e = {{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"bound", c.bound}};
    if (!c.detail.empty()) e["detail"] = c.detail;
    a.push_back(e);
  }
  return a;
}

void conservation_checks(Run& run, const RunResult& r) {
  double tr = 0, he = 0, me = 0, top = 0;
  for (const auto& c : r.checkpoints) {
    tr = std::max(tr, c.trace_error);
    he = std::max(he, c.hermiticity_error);
    me = std::min(me, c.min_eigenvalue);
    top = std::max(top, c.top_population);
  }
  if (r.checkpoints.empty()) return;
  run.check("trace_preserved", tr <= 1e-6, tr, 1e-6);
  run.check("hermiticity", he <= 1e-8, he, 1e-8);
  run.check("positivity", me >= -1e-6, me, -1e-6);
  run.check("cutoff_adequacy", top < 1e-4, top, 1e-4);
}

}  // namespace

RunResult run_scenario(const ExperimentConfig& config) {
  RunResult r;
  Run run(config, r);
  const std::string started = utc_now();
  bool have_dir = false;
  try {
    run.stage("config");
    config.validate();
    ensure_dir(config.output_dir);
    have_dir = true;
    switch (config.scenario) {
      case Scenario::SingleVdp: single_vdp(run); break;
      case Scenario::LimitCycle: limit_cycle(run); break;
      case Scenario::Sync: sync(run); break;
      case Scenario::Arnold: arnold(run); break;
      case Scenario::Sense: sense(run); break;
      case Scenario::Meanfield: meanfield(run); break;
      case Scenario::TomoCheck: tomo_check(run); break;
    }
    run.stage("checks");
    conservation_checks(run, r);
    run.stage("done");
  } catch (const Error& e) {
    r.exit_code = e.kind() == ErrorKind::Config ? 2 : 3;
    r.failed_stage = run.stage();
    r.error = e.what();
  } catch (const std::exception& e) {
    r.exit_code = 3;
    r.failed_stage = run.stage();
    r.error = e.what();
  }

  json m;
  m["version"] = kVersion;
  m["scenario"] = scenario_name(config.scenario);
  m["seed"] = config.seed;
  m["config_hash"] = hex64(config_hash(config));
  m["config"] = config_to_json(config);
  m["started_utc"] = started;
  m["finished_utc"] = utc_now();
  m["status"] = r.exit_code == 0 ? "ok" : "failed";
  m["exit_code"] = r.exit_code;
  if (r.exit_code) {
    m["failed_stage"] = r.failed_stage;
    m["error"] = r.error;
  }
  m["checks"] = checks_json(r);
  bool all = true;
  for (const auto& c : r.checks) all = all && c.pass;
  m["all_checks_pass"] = all;
  m["checkpoint_count"] = r.checkpoints.size();
  m["outputs"] = r.outputs;
  r.manifest = m;
  try {
    if (have_dir) {
      CsvTable cp({"stage", "trace_error", "hermiticity_error", "min_eigenvalue", "top_population"});
      for (const auto& c : r.checkpoints)
        cp.row_text({"\"" + c.stage + "\"", fmt_double(c.trace_error), fmt_double(c.hermiticity_error),
                     fmt_double(c.min_eigenvalue), fmt_double(c.top_population)});
      cp.write((std::filesystem::path(config.output_dir) / "checkpoints.csv").string());
      write_text((std::filesystem::path(config.output_dir) / "manifest.json").string(), m.dump(2) + "\n");
    }
  } catch (const Error& e) {
    if (r.exit_code == 0) {
      r.exit_code = 3;
      r.failed_stage = "manifest";
      r.error = e.what();
    }
  }
  return r;
}

ExperimentConfig default_config(Scenario s, std::uint64_t seed) {
  ExperimentConfig c;
  c.scenario = s;
  c.seed = seed;
  c.engine = Engine::Effective;
  c.effective = reference_effective(Regime::NearClassical);
  c.noise.shots = c.readout.shots;
  switch (s) {
    case Scenario::SingleVdp:
      c.cutoffs = {30};
      c.readout.shots = 0;
      c.scan.ratios = {0.1, 0.15, 0.2, 0.3, 0.5, 0.7, 1.0, 1.5, 2.0, 3.0, 5.0, 7.0, 10.0};
      break;
    case Scenario::LimitCycle:
      c.cutoffs = {30};
      break;
    case Scenario::Sync:
      c.scan.phis = {0.0, M_PI / 2, M_PI};
      break;
    case Scenario::Arnold:
      c.scan.v_over_v0 = {0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0};
      c.scan.detuning_hz = {-150, -100, -50, 0, 50, 100, 150, 200};
      break;
    case Scenario::Sense:
      c.effective = reference_effective(Regime::Quantum, M_PI);
      c.effective->drive_amp = c.effective->kappa_plus;
      c.cutoffs = {14, 14};
      c.scan.detuning_hz = {0, 50, 100, 150, 200};
      break;
    case Scenario::Meanfield:
      c.cutoffs = {30};
      c.scan.phis = {0.0, M_PI / 2, M_PI};
      break;
    case Scenario::TomoCheck:
      c.cutoffs = {30};
      c.readout.beta_max = 4.5;
      c.readout.points = 48;
      c.readout.shots = 0;
      break;
  }
  c.noise.shots = c.readout.shots;
  return c;
}

}  // namespace qvdp

#include "qvdp/pulses.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "qvdp/rng.hpp"

namespace qvdp {

const char* segment_kind_name(SegmentKind k) {
  switch (k) {
    case SegmentKind::BSB: return "BSB";
    case SegmentKind::RSB2: return "RSB2";
    case SegmentKind::SYNC: return "SYNC";
    case SegmentKind::SDF: return "SDF";
    case SegmentKind::DRIVE: return "DRIVE";
    case SegmentKind::RESET: return "RESET";
  }
  return "?";
}

SegmentKind parse_segment_kind(const std::string& s) {
  for (auto k : {SegmentKind::BSB, SegmentKind::RSB2, SegmentKind::SYNC, SegmentKind::SDF,
                 SegmentKind::DRIVE, SegmentKind::RESET})
    if (s == segment_kind_name(k)) return k;
  throw Error(ErrorKind::InvalidKind, "unknown segment kind '" + s + "'");
}

void PulseSegment::validate() const {
  if (duration < 0) throw Error(ErrorKind::InvalidArgument, "segment duration < 0");
  if (rabi < 0 || rabi2 < 0) throw Error(ErrorKind::InvalidArgument, "segment Rabi frequency < 0");
  if (kind == SegmentKind::RESET || kind == SegmentKind::DRIVE) return;
  if (!(eta > 0 && eta < 1)) throw Error(ErrorKind::InvalidArgument, "Lamb-Dicke factor outside (0,1)");
  if (kind == SegmentKind::SYNC && !(eta2 > 0 && eta2 < 1))
    throw Error(ErrorKind::InvalidArgument, "Lamb-Dicke factor outside (0,1)");
  if (mode != 0 && mode != 1) throw Error(ErrorKind::InvalidArgument, "segment mode must be 0 or 1");
}

double PulseSchedule::period() const {
  double t = 0;
  for (const auto& s : segments)
    if (s.kind != SegmentKind::RESET) t += s.duration;
  return t;
}

void PulseSchedule::validate() const {
  for (const auto& s : segments) s.validate();
}

PulseSchedule reference_schedule(Regime r, double phi, double delta1, double delta2) {
  const double tp = 2 * M_PI, us = 1e-6, MHz = 1e6;
  const double eta[2] = {0.094, 0.072};
  const bool cl = r == Regime::NearClassical;
  const double ob = (cl ? 0.12 : 0.11) * MHz * tp, o2 = 0.22 * MHz * tp;
  const double tb[2] = {17.10 * us, cl ? 22.46 * us : 22.45 * us};
  const double t2[2] = {cl ? 48.77 * us : 97.54 * us, cl ? 84.06 * us : 168.12 * us};
  const double ts = (cl ? 24.0 : 32.0) * us;
  PulseSchedule s;
  auto reset = PulseSegment{};
  for (int i = 0; i < 2; ++i) {
    s.segments.push_back({SegmentKind::BSB, i, ob, 0, eta[i], eta[i], 0.0, tb[i]});
    s.segments.push_back(reset);
  }
  for (int i = 0; i < 2; ++i) {
    s.segments.push_back({SegmentKind::RSB2, i, o2, 0, eta[i], eta[i], 0.0, t2[i]});
    s.segments.push_back(reset);
  }
  s.segments.push_back({SegmentKind::SYNC, 0, 0.048 * MHz * tp, 0.063 * MHz * tp, eta[0], eta[1],
                        phi - M_PI, ts});
  s.segments.push_back(reset);
  s.delta1 = delta1;
  s.delta2 = delta2;
  s.quoted_kappa_plus = (cl ? 0.12e3 : 0.10e3) * tp;
  return s;
}

namespace {

void require_qubit_layout(const SpaceLayout& l, int modes_needed) {
  if (!l.has_qubit_slot0() || l.mode_count() < modes_needed || l.mode_count() + 1 != int(l.slots()))
    throw Error(ErrorKind::Layout, "expected qubit x modes layout, got " + l.str());
}

}  // namespace

OperatorMatrix segment_hamiltonian(const PulseSegment& seg, const SpaceLayout& layout) {
  seg.validate();
  if (seg.kind == SegmentKind::RESET) throw Error(ErrorKind::InvalidKind, "RESET has no Hamiltonian");
  const cplx I(0, 1);
  require_qubit_layout(layout, seg.kind == SegmentKind::SYNC ? 2 : seg.mode + 1);
  auto sp = embed(sigma_plus(), 0, layout), sm = embed(sigma_minus(), 0, layout);
  switch (seg.kind) {
    case SegmentKind::BSB: {
      auto a = mode_op(1 + seg.mode, layout);
      double g = 0.5 * seg.rabi * seg.eta;
      auto H = (sp * a.adjoint() * std::exp(I * seg.phase) -
                sm * a * std::exp(-I * seg.phase)) * (I * g);
      return H;
    }
    case SegmentKind::RSB2: {
      auto a = mode_op(1 + seg.mode, layout);
      auto ad = a.adjoint();
      double g = -0.25 * seg.rabi * seg.eta * seg.eta;
      return (sp * a * a * std::exp(I * seg.phase) + sm * ad * ad * std::exp(-I * seg.phase)) * g;
    }
    case SegmentKind::SYNC: {
      auto a1 = mode_op(1, layout), a2 = mode_op(2, layout);
      double g1 = seg.rabi * seg.eta;
      double g2 = (seg.rabi2 > 0 ? seg.rabi2 : seg.rabi) * seg.eta2;
      auto O = a1 * g1 + a2 * (g2 * std::exp(I * seg.phase));
      return (sm * O.adjoint() - sp * O) * (0.5 * I);
    }
    case SegmentKind::SDF: {
      auto a = mode_op(1 + seg.mode, layout);
      auto sx = embed(sigma_x(), 0, layout);
      auto X = a * std::exp(I * seg.phase) + a.adjoint() * std::exp(-I * seg.phase);
      return sx * X * (0.5 * seg.eta * seg.rabi);
    }
    case SegmentKind::DRIVE: {
      auto a = mode_op(1 + seg.mode, layout);
      return (a * std::exp(I * seg.phase) + a.adjoint() * std::exp(-I * seg.phase)) * seg.rabi;
    }
    case SegmentKind::RESET: break;
  }
  throw Error(ErrorKind::InvalidKind, "unhandled segment kind");
}

QuantumState qubit_reset(const QuantumState& state) {
  const SpaceLayout& l = state.layout();
  if (!l.has_qubit_slot0()) throw Error(ErrorKind::Layout, "no qubit slot");
  const int Do = l.total() / 2;
  Mat osc = state.rho().topLeftCorner(Do, Do) + state.rho().bottomRightCorner(Do, Do);
  Mat out = Mat::Zero(2 * Do, 2 * Do);
  out.bottomRightCorner(Do, Do) = osc;
  return QuantumState(l, out, 1e-6, 1e-8);
}

CompiledSchedule compile_schedule(const PulseSchedule& sched, const SpaceLayout& layout) {
  sched.validate();
  CompiledSchedule cs;
  cs.layout = layout;
  const cplx I(0, 1);
  OperatorMatrix det(layout, Mat::Zero(layout.total(), layout.total()));
  if (sched.delta1 != 0.0) det = det + mode_op(1, layout).adjoint() * mode_op(1, layout) * sched.delta1;
  if (sched.delta2 != 0.0) det = det + mode_op(2, layout).adjoint() * mode_op(2, layout) * sched.delta2;
  for (const auto& seg : sched.segments) {
    if (seg.kind == SegmentKind::RESET) {
      cs.segments.push_back({seg.kind, Mat(), false});
      continue;
    }
    Mat H = segment_hamiltonian(seg, layout).m + det.m;
    Mat U = (Mat(-I * seg.duration * H)).exp();
    double err = max_abs(U.adjoint() * U - Mat::Identity(U.rows(), U.cols()));
    cs.max_unitarity_error = std::max(cs.max_unitarity_error, err);
    bool rnd = seg.kind == SegmentKind::BSB || seg.kind == SegmentKind::RSB2;
    cs.segments.push_back({seg.kind, std::move(U), rnd});
  }
  return cs;
}

namespace {

// Density matrix held either as |down><down| x osc or as a full matrix.
struct Work {
  bool product;
  Mat osc;
  Mat full;
  int Do;

  Mat materialize() const {
    if (!product) return full;
    Mat f = Mat::Zero(2 * Do, 2 * Do);
    f.bottomRightCorner(Do, Do) = osc;
    return f;
  }
};

bool is_down_product(const Mat& rho, int Do) {
  return rho.topRows(Do).isZero(0.0) && rho.leftCols(Do).isZero(0.0);
}

}  // namespace

QuantumState run_cycle(const QuantumState& state, const CompiledSchedule& cs, std::uint64_t seed,
                       std::uint64_t cycle, bool sync_on) {
  if (state.layout() != cs.layout) throw Error(ErrorKind::Layout, "state/schedule layout mismatch");
  const int Do = cs.layout.total() / 2;
  Work w{false, Mat(), state.rho(), Do};
  if (is_down_product(w.full, Do)) {
    w.product = true;
    w.osc = w.full.bottomRightCorner(Do, Do);
    w.full.resize(0, 0);
  }
  Rng rng(seed, cycle, purpose::kPulsePhase);
  const cplx I(0, 1);
  const auto& segs = cs.segments;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const auto& s = segs[k];
    if (s.kind == SegmentKind::SYNC && !sync_on) continue;
    if (s.kind == SegmentKind::RESET) {
      if (!w.product) {
        w.osc = w.full.topLeftCorner(Do, Do) + w.full.bottomRightCorner(Do, Do);
        w.full.resize(0, 0);
        w.product = true;
      }
      continue;
    }
    cplx ph = 1.0;
    if (s.random_phase) ph = std::exp(I * (2 * M_PI * rng.uniform()));
    const bool next_reset = k + 1 < segs.size() && segs[k + 1].kind == SegmentKind::RESET;
    if (w.product && next_reset) {
      // Kraus form: only the |down> column block of U acts.
      Mat Ku = ph * s.U.block(0, Do, Do, Do);
      Mat Kd = s.U.block(Do, Do, Do, Do);
      w.osc = (Ku * w.osc * Ku.adjoint() + Kd * w.osc * Kd.adjoint()).eval();
      ++k;  // the reset is already applied
      continue;
    }
    Mat U = s.U;
    if (ph != cplx(1.0)) {
      U.topRows(Do) *= ph;
      U.leftCols(Do) *= std::conj(ph);
    }
    Mat f = w.materialize();
    w.full = U * f * U.adjoint();
    w.product = false;
  }
  return QuantumState(cs.layout, w.materialize(), 1e-6, 1e-8);
}

QuantumState run_cycle(const QuantumState& state, const PulseSchedule& sched, std::uint64_t seed,
                       std::uint64_t cycle, bool sync_on) {
  return run_cycle(state, compile_schedule(sched, state.layout()), seed, cycle, sync_on);
}

QuantumState run_protocol(const QuantumState& initial, const CompiledSchedule& cs,
                          int n_uncoupled, int n_coupled, std::uint64_t seed) {
  if (n_uncoupled < 0 || n_coupled < 0) throw Error(ErrorKind::InvalidArgument, "negative cycle count");
  QuantumState s = initial;
  std::uint64_t c = 0;
  for (int i = 0; i < n_uncoupled; ++i) s = run_cycle(s, cs, seed, c++, false);
  for (int i = 0; i < n_coupled; ++i) s = run_cycle(s, cs, seed, c++, true);
  return s;
}

QuantumState run_protocol(const QuantumState& initial, const PulseSchedule& sched,
                          int n_uncoupled, int n_coupled, std::uint64_t seed) {
  return run_protocol(initial, compile_schedule(sched, initial.layout()), n_uncoupled, n_coupled,
                      seed);
}

QuantumState protocol_initial_state(int cutoff1, int cutoff2) {
  SpaceLayout l = SpaceLayout::qubit_modes({cutoff1, cutoff2});
  Mat r = Mat::Zero(l.total(), l.total());
  r(cutoff1 * cutoff2, cutoff1 * cutoff2) = 1.0;  // |down>|0>|0>
  return QuantumState(l, r);
}

RateReport effective_rates_report(const PulseSchedule& sched) {
  sched.validate();
  const double T = sched.period();
  bool have_b[2] = {false, false}, have_r[2] = {false, false};
  RateReport rep;
  double V = 0.0, phi = 0.0;
  bool have_sync = false;
  for (const auto& s : sched.segments) {
    switch (s.kind) {
      case SegmentKind::BSB: {
        double x = s.rabi * s.eta * s.duration;
        rep.kappa_plus_mode[s.mode] += x * x / (4 * T);
        have_b[s.mode] = true;
        break;
      }
      case SegmentKind::RSB2: {
        double x = s.rabi * s.eta * s.eta * s.duration;
        rep.kappa_minus_mode[s.mode] += x * x / (16 * T);
        have_r[s.mode] = true;
        break;
      }
      case SegmentKind::SYNC: {
        double g1 = s.rabi * s.eta, g2 = (s.rabi2 > 0 ? s.rabi2 : s.rabi) * s.eta2;
        V += g1 * g2 * s.duration * s.duration / (4 * T);
        phi = std::remainder(s.phase + M_PI, 2 * M_PI);
        have_sync = true;
        break;
      }
      default: break;
    }
  }
  if (!(have_b[0] && have_b[1] && have_r[0] && have_r[1]))
    throw Error(ErrorKind::IncompleteSchedule, "schedule lacks BSB/2RSB segments for both modes");
  (void)have_sync;
  rep.period = T;
  rep.kappa_plus_formula = 0.5 * (rep.kappa_plus_mode[0] + rep.kappa_plus_mode[1]);
  rep.kappa_plus_quoted = sched.quoted_kappa_plus;
  rep.params.kappa_plus = rep.kappa_plus_formula;
  rep.params.kappa_minus = 0.5 * (rep.kappa_minus_mode[0] + rep.kappa_minus_mode[1]);
  rep.params.V = V;
  rep.params.phi = phi;
  rep.params.delta1 = sched.delta1;
  rep.params.delta2 = sched.delta2;
  return rep;
}

EffectiveParams effective_rates(const PulseSchedule& sched) {
  return effective_rates_report(sched).params;
}

PulseSchedule refine(const PulseSchedule& sched, double factor) {
  if (!(factor >= 1.0)) throw Error(ErrorKind::InvalidArgument, "refinement factor < 1");
  PulseSchedule r = sched;
  const double s = std::sqrt(factor);
  for (auto& seg : r.segments) {
    if (seg.kind == SegmentKind::RESET) continue;
    seg.duration /= factor;
    seg.rabi *= s;
    seg.rabi2 *= s;
  }
  return r;
}

ConvergenceReport stroboscopic_convergence(const PulseSchedule& sched,
                                           const std::vector<double>& factors,
                                           const ConvergenceOptions& opt) {
  for (double f : factors)
    if (!(f >= 1.0)) throw Error(ErrorKind::InvalidArgument, "refinement factor < 1");
  const auto eff = effective_rates(sched);
  SpaceLayout ml = SpaceLayout::modes({opt.cutoff, opt.cutoff});
  auto target = steady_state_direct(vdp_generator(eff, ml));
  ConvergenceReport rep;
  for (double f : factors) {
    auto cs = compile_schedule(refine(sched, f), SpaceLayout::qubit_modes({opt.cutoff, opt.cutoff}));
    const double m = opt.scale_cycles ? f : 1.0;
    int nu = int(std::lround(opt.n_uncoupled * m)), nc = int(std::lround(opt.n_coupled * m));
    auto out = run_protocol(protocol_initial_state(opt.cutoff, opt.cutoff), cs, nu, nc, opt.seed);
    ConvergenceRow row;
    row.factor = f;
    row.distance = trace_distance(partial_trace(out, {1, 2}), target);
    if (opt.fixed_point) {
      QuantumState cur = out;
      std::uint64_t c = std::uint64_t(nu + nc);
      for (int i = 0; i < 20000; ++i) {
        auto next = run_cycle(cur, cs, opt.seed, c++, true);
        double d = trace_distance(next, cur);
        cur = next;
        if (d < 1e-10) break;
      }
      row.fixed_point_distance = trace_distance(partial_trace(cur, {1, 2}), target);
    }
    rep.rows.push_back(row);
  }
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    if (!(rep.rows[i].distance < rep.rows[i - 1].distance)) {
      rep.monotone = false;
      rep.failure = "distance did not decrease at factor " + std::to_string(rep.rows[i].factor);
    }
  return rep;
}

cplx sdf_characteristic(const QuantumState& mode_state, cplx beta, double eta, double rabi) {
  if (mode_state.layout().slots() != 1 || mode_state.layout().mode_count() != 1)
    throw Error(ErrorKind::Layout, "sdf_characteristic needs a single-mode state");
  const int N = mode_state.dim();
  if (std::abs(beta) == 0.0) return 1.0;
  SpaceLayout l = SpaceLayout::qubit_modes({N});
  // chi argument 2*gamma with gamma = -i theta e^{-i phi_m}, theta = eta*rabi*t/2
  PulseSegment sdf{SegmentKind::SDF, 0, rabi, 0, eta, eta, -(std::arg(beta) + M_PI / 2),
                   std::abs(beta) / (eta * rabi)};
  const cplx I(0, 1);
  Mat U = (Mat(-I * sdf.duration * segment_hamiltonian(sdf, l).m)).exp();
  auto readout = [&](const Vec& q) {
    QuantumState qs = pure_state(SpaceLayout({2}, {SlotKind::Qubit}), q);
    Mat r = U * tensor(qs, mode_state).rho() * U.adjoint();
    return expectation(QuantumState(l, r, 1e-6, 1e-8), embed(sigma_z(), 0, l)).real();
  };
  Vec down(2), rotated(2);
  down << 0.0, 1.0;
  // pi/2 rotation of |down>: (|+> + i|->)/sqrt(2)
  rotated << cplx(0.5, 0.5), cplx(0.5, -0.5);
  return {-readout(down), readout(rotated)};
}

}  // namespace qvdp

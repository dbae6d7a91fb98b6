#include "qvdp/sweep.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "qvdp/rng.hpp"

namespace qvdp {

namespace {

const double kTwoPi = 2 * M_PI;

struct Draw {
  double v_factor = 1.0;
  double dw = 0.0;  // rad/s
};

std::vector<Draw> draws(const NoiseSpec& spec, std::uint64_t seed, std::uint64_t index) {
  spec.validate();
  Rng rng(seed, index, purpose::kNoise);
  std::vector<Draw> out(spec.ensemble_size);
  for (auto& d : out) {
    double a = rng.normal(), b = rng.normal();
    d.v_factor = 1.0 + spec.coupling_rel_sigma * a;
    d.dw = kTwoPi * spec.freq_sigma_hz * b;
  }
  return out;
}

std::uint64_t member_seed(std::uint64_t seed, std::uint64_t point, std::uint64_t member) {
  return splitmix64(splitmix64(seed ^ 0x5eedULL) + point * 0x10001ULL + member);
}

QuantumState modes_of(const QuantumState& s) {
  const auto& L = s.layout();
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < L.slots(); ++i)
    if (L.kinds[i] == SlotKind::Mode) keep.push_back(i);
  return keep.size() == L.slots() ? s : partial_trace(s, keep);
}

}  // namespace

std::vector<EffectiveParams> noise_ensemble(const EffectiveParams& base, const NoiseSpec& spec,
                                            std::uint64_t seed, std::uint64_t index) {
  std::vector<EffectiveParams> out;
  for (const auto& d : draws(spec, seed, index)) {
    EffectiveParams p = base;
    p.V = base.V * d.v_factor;
    p.delta2 = base.delta2 + d.dw;
    out.push_back(p);
  }
  return out;
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(threads, n); ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(m);
          if (!first) first = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

Checkpoint checkpoint(const std::string& stage, const QuantumState& s) {
  Checkpoint c;
  c.stage = stage;
  c.trace_error = std::abs(s.rho().trace() - 1.0);
  c.hermiticity_error = hermiticity_error(s.rho());
  c.min_eigenvalue = s.min_eigenvalue();
  c.top_population = top_population(s);
  return c;
}

Stats stats(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= double(v.size());
  if (v.size() > 1) {
    double q = 0.0;
    for (double x : v) q += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(q / double(v.size() - 1));
  }
  return s;
}

QuantumState member_steady_state(const ExperimentConfig& c, const EffectiveParams* eff,
                                 double v_over_v0, double detuning_hz, double v_factor,
                                 double extra_detuning) {
  if (c.cutoffs.size() != 2) throw Error(ErrorKind::Layout, "two cutoffs needed");
  if (c.engine == Engine::Effective) {
    EffectiveParams p = eff ? *eff : *c.effective;
    p.V = v_over_v0 * kTwoPi * c.scan.V0_hz * v_factor;
    p.delta2 = p.delta1 + kTwoPi * detuning_hz + extra_detuning;
    return steady_state_direct(vdp_generator(p, SpaceLayout::modes(c.cutoffs)));
  }
  // the configured schedule realises V0; SYNC Rabi frequencies scale with sqrt(V)
  PulseSchedule s = *c.schedule;
  const double g = std::sqrt(std::max(0.0, v_over_v0 * v_factor));
  for (auto& seg : s.segments)
    if (seg.kind == SegmentKind::SYNC) {
      double r2 = seg.rabi2 > 0 ? seg.rabi2 : seg.rabi;
      seg.rabi *= g;
      seg.rabi2 = r2 * g;
    }
  s.delta2 = s.delta1 + kTwoPi * detuning_hz + extra_detuning;
  auto out = run_protocol(protocol_initial_state(c.cutoffs[0], c.cutoffs[1]), s, c.n_uncoupled,
                          c.n_coupled, c.seed);
  return modes_of(out);
}

std::vector<ContourSegment> contour(const std::vector<double>& v, const std::vector<double>& d,
                                    const std::vector<std::vector<double>>& z, double level) {
  std::vector<ContourSegment> out;
  if (v.size() < 2 || d.size() < 2) return out;
  auto lerp = [&](double a, double b, double za, double zb) {
    return za == zb ? 0.5 * (a + b) : a + (level - za) / (zb - za) * (b - a);
  };
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    for (std::size_t j = 0; j + 1 < d.size(); ++j) {
      const double z00 = z[i][j], z01 = z[i][j + 1], z10 = z[i + 1][j], z11 = z[i + 1][j + 1];
      if (!std::isfinite(z00) || !std::isfinite(z01) || !std::isfinite(z10) || !std::isfinite(z11))
        continue;
      // crossings on edges: bottom (i, j..j+1), right (i..i+1, j+1), top (i+1), left (j)
      std::vector<std::pair<double, double>> pts;
      if ((z00 < level) != (z01 < level)) pts.push_back({v[i], lerp(d[j], d[j + 1], z00, z01)});
      if ((z01 < level) != (z11 < level)) pts.push_back({lerp(v[i], v[i + 1], z01, z11), d[j + 1]});
      if ((z10 < level) != (z11 < level)) pts.push_back({v[i + 1], lerp(d[j], d[j + 1], z10, z11)});
      if ((z00 < level) != (z10 < level)) pts.push_back({lerp(v[i], v[i + 1], z00, z10), d[j]});
      if (pts.size() == 2) {
        out.push_back({pts[0].first, pts[0].second, pts[1].first, pts[1].second});
      } else if (pts.size() == 4) {
        // saddle: decide by the cell average
        const bool centre_high = 0.25 * (z00 + z01 + z10 + z11) >= level;
        const bool corner_high = z00 >= level;
        if (centre_high == corner_high) {
          out.push_back({pts[0].first, pts[0].second, pts[1].first, pts[1].second});
          out.push_back({pts[2].first, pts[2].second, pts[3].first, pts[3].second});
        } else {
          out.push_back({pts[0].first, pts[0].second, pts[3].first, pts[3].second});
          out.push_back({pts[1].first, pts[1].second, pts[2].first, pts[2].second});
        }
      }
    }
  return out;
}

ArnoldResult arnold_sweep(const ExperimentConfig& c, const std::vector<double>& v_grid,
                          const std::vector<double>& detuning_grid_hz) {
  if (v_grid.empty() || detuning_grid_hz.empty())
    throw Error(ErrorKind::InvalidArgument, "arnold_sweep needs non-empty grids");
  const int nv = int(v_grid.size()), nd = int(detuning_grid_hz.size());
  const int members = c.noise.ensemble_size;
  ArnoldResult res;
  res.points.resize(std::size_t(nv) * nd);
  std::vector<std::vector<Draw>> dr(res.points.size());
  for (int k = 0; k < nv * nd; ++k) {
    auto& pt = res.points[k];
    pt.v_over_v0 = v_grid[k / nd];
    pt.detuning_hz = detuning_grid_hz[k % nd];
    pt.members.resize(members);
    pt.checkpoints.resize(members);
    dr[k] = draws(c.noise, c.seed, k);
  }
  std::vector<std::string> errors(std::size_t(nv) * nd * members);
  ReadoutSettings rs = c.readout;
  rs.shots = c.noise.shots;
  parallel_for(nv * nd * members, c.threads, [&](int t) {
    const int k = t / members, m = t % members;
    auto& pt = res.points[k];
    try {
      auto ss = member_steady_state(c, nullptr, pt.v_over_v0, pt.detuning_hz, dr[k][m].v_factor,
                                    dr[k][m].dw);
      pt.checkpoints[m] = checkpoint("arnold", ss);
      ReadoutSettings r = rs;
      r.seed = member_seed(c.seed, k, m);
      pt.members[m] = combined_mi(ss, r, true);
    } catch (const Error& e) {
      errors[t] = e.what();
    }
  });
  std::vector<std::vector<double>> z(nv, std::vector<double>(nd, NAN));
  for (int k = 0; k < nv * nd; ++k) {
    auto& pt = res.points[k];
    for (int m = 0; m < members; ++m)
      if (!errors[std::size_t(k) * members + m].empty() && pt.error.empty())
        pt.error = errors[std::size_t(k) * members + m];
    if (!pt.error.empty()) continue;
    std::vector<double> I, xx, xp, vn;
    for (const auto& r : pt.members) {
      I.push_back(r.I_combined);
      xx.push_back(r.I_xx);
      xp.push_back(r.I_xp);
      vn.push_back(r.I_vn.value_or(NAN));
    }
    pt.I = stats(I);
    pt.I_xx = stats(xx);
    pt.I_xp = stats(xp);
    pt.I_vn = stats(vn);
    z[k / nd][k % nd] = pt.I.mean;
  }
  res.contour = contour(v_grid, detuning_grid_hz, z, c.scan.contour_level);
  std::vector<double> zero;
  for (int i = 0; i < nv; ++i)
    if (v_grid[i] == 0.0)
      for (int j = 0; j < nd; ++j)
        if (std::isfinite(z[i][j])) zero.push_back(z[i][j]);
  res.offset = stats(zero).mean;
  return res;
}

std::vector<SensePoint> sense_sweep(const ExperimentConfig& c, const std::vector<double>& detuning_grid_hz) {
  if (c.engine != Engine::Effective || !c.effective)
    throw Error(ErrorKind::Config, "sense_sweep needs the effective engine");
  if (detuning_grid_hz.empty()) throw Error(ErrorKind::InvalidArgument, "empty detuning grid");
  const int nd = int(detuning_grid_hz.size()), members = c.noise.ensemble_size;
  const auto layout = SpaceLayout::modes(c.cutoffs);
  std::vector<SensePoint> pts(nd);
  std::vector<std::unique_ptr<SteadyStateSolver>> solvers(nd);
  std::vector<std::vector<Draw>> dr(nd);
  std::vector<EffectiveParams> nominal(nd);
  std::vector<std::string> errors(std::size_t(nd) * members);
  for (int k = 0; k < nd; ++k) {
    pts[k].detuning_hz = detuning_grid_hz[k];
    pts[k].S1_members.resize(members);
    pts[k].S2_members.resize(members);
    pts[k].checkpoints.resize(members);
    dr[k] = draws(c.noise, c.seed, k);
    nominal[k] = *c.effective;
    nominal[k].delta2 = nominal[k].delta1 + kTwoPi * detuning_grid_hz[k];
  }
  parallel_for(nd, c.threads, [&](int k) {
    try {
      solvers[k] = std::make_unique<SteadyStateSolver>(vdp_generator(nominal[k], layout));
    } catch (const Error& e) {
      pts[k].error = e.what();
    }
  });
  ReadoutSettings rs = c.readout;
  rs.shots = c.noise.shots;
  parallel_for(nd * members, c.threads, [&](int t) {
    const int k = t / members, m = t % members;
    if (!solvers[k]) return;
    try {
      EffectiveParams p = nominal[k];
      p.V *= dr[k][m].v_factor;
      p.delta2 += dr[k][m].dw;
      auto ss = solvers[k]->solve(vdp_generator(p, layout));
      pts[k].checkpoints[m] = checkpoint("sense", ss);
      auto m1 = partial_trace(ss, {0}), m2 = partial_trace(ss, {1});
      if (c.phase_method == PhaseMethod::Canonical) {
        pts[k].S1_members[m] = resultant_length(m1);
        pts[k].S2_members[m] = resultant_length(m2);
      } else {
        ReadoutSettings r = rs;
        r.seed = member_seed(c.seed, k, m);
        pts[k].S1_members[m] = wigner_resultant_length(wigner(m1, r));
        r.seed += 1;
        pts[k].S2_members[m] = wigner_resultant_length(wigner(m2, r));
      }
    } catch (const Error& e) {
      errors[t] = e.what();
    }
  });
  for (int k = 0; k < nd; ++k) {
    for (int m = 0; m < members; ++m)
      if (!errors[std::size_t(k) * members + m].empty() && pts[k].error.empty())
        pts[k].error = errors[std::size_t(k) * members + m];
    if (!pts[k].error.empty()) continue;
    pts[k].S1 = stats(pts[k].S1_members);
    pts[k].S2 = stats(pts[k].S2_members);
  }
  return pts;
}

}  // namespace qvdp

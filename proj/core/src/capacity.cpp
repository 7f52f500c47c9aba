#include "covertime/capacity.hpp"

#include <algorithm>
#include <cmath>

#include "covertime/rng.hpp"
#include "covertime/walk.hpp"

namespace covertime {

std::vector<Pt> zd_ball(int d, i32 r) {
  if (d < 1 || d > kMaxDim) fail(Errc::ConfigInvalid, "dimension out of range");
  if (r < 0) fail(Errc::ConfigInvalid, "radius must be nonnegative");
  std::vector<Pt> out;
  Pt p{};
  for (int i = 0; i < d; ++i) p[std::size_t(i)] = -r;
  while (true) {
    out.push_back(p);
    int i = d - 1;
    while (i >= 0 && p[std::size_t(i)] == r) p[std::size_t(i--)] = -r;
    if (i < 0) break;
    ++p[std::size_t(i)];
  }
  return out;
}

std::vector<Pt> zd_sphere(int d, i32 r) {
  std::vector<Pt> out;
  for (const Pt& p : zd_ball(d, r)) {
    i32 a = 0;
    for (int i = 0; i < d; ++i) a = std::max(a, std::abs(p[std::size_t(i)]));
    if (a == r) out.push_back(p);
  }
  return out;
}

namespace {

constexpr double kCgRelTol = 1e-10;
constexpr i64 kMaxCells = 100000000;

std::vector<Pt> dedupe_sites(const std::vector<Pt>& sites) {
  std::vector<Pt> k = sites;
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end()), k.end());
  return k;
}

using u8 = unsigned char;

// cube-stencil grid: classification plus dense vectors over the padded cube
struct EscapeGrid {
  int d = 0;
  i32 R = 0, pad = 0, side = 0;
  i64 cells = 0;
  i64 stride[kMaxDim] = {0};
  std::vector<i32> off;     // linear offset per signed jump
  std::vector<double> w;    // kappa/2 per signed jump
  std::vector<u8> cls;      // 0 unknown (A\K), 1 K, 2 outside A
  std::vector<i32> unknowns;

  i64 index(const Pt& p) const {
    i64 idx = 0;
    for (int i = 0; i < d; ++i) idx += (i64(p[std::size_t(i)]) + R + pad) * stride[i];
    return idx;
  }
};

EscapeGrid build_grid(const MovingMode& mode, const std::vector<Pt>& K, i32 R) {
  EscapeGrid g;
  g.d = mode.d;
  g.R = R;
  g.pad = std::max<i32>(mode.max_abs_coord, 1);
  g.side = 2 * R + 1 + 2 * g.pad;
  g.cells = 1;
  for (int i = 0; i < g.d; ++i) g.cells *= g.side;
  if (g.cells > kMaxCells) fail(Errc::CapExceeded, "escape grid exceeds the memory cap");
  g.stride[g.d - 1] = 1;
  for (int i = g.d - 2; i >= 0; --i) g.stride[i] = g.stride[i + 1] * g.side;

  for (std::size_t j = 0; j < mode.jumps.size(); ++j) {
    i64 o = 0;
    for (int i = 0; i < g.d; ++i) o += i64(mode.jumps[j][std::size_t(i)]) * g.stride[i];
    g.off.push_back(i32(o));
    g.w.push_back(mode.jump_prob[j]);
  }

  g.cls.assign(std::size_t(g.cells), u8(2));
  // interior box B(0,R) is unknown until K overwrites it
  Pt p{};
  for (int i = 0; i < g.d; ++i) p[std::size_t(i)] = -R;
  while (true) {
    g.cls[std::size_t(g.index(p))] = 0;
    int i = g.d - 1;
    while (i >= 0 && p[std::size_t(i)] == R) p[std::size_t(i--)] = -R;
    if (i < 0) break;
    ++p[std::size_t(i)];
  }
  for (const Pt& s : K) g.cls[std::size_t(g.index(s))] = 1;

  for (i64 c = 0; c < g.cells; ++c)
    if (g.cls[std::size_t(c)] == 0) g.unknowns.push_back(i32(c));
  return g;
}

double dot_over(const std::vector<i32>& idx, const std::vector<double>& a,
                const std::vector<double>& b) {
  double s = 0.0;
  for (const i32 u : idx) s += a[std::size_t(u)] * b[std::size_t(u)];
  return s;
}

// solves (I - P_{A\K}) h = b in place over the unknown cells
void solve_escape(const EscapeGrid& g, std::vector<double>& h, std::vector<double>& r,
                  int& iterations, double& residual) {
  const std::size_t nj = g.off.size();
  std::vector<double> p(r), ap(std::size_t(g.cells), 0.0);
  const double b2 = dot_over(g.unknowns, r, r);
  if (b2 == 0.0) fail(Errc::SolveFailed, "escape system has a zero right-hand side");
  double r2 = b2;
  const int maxit = 30 * g.side + 1000;
  int it = 0;
  while (std::sqrt(r2 / b2) > kCgRelTol) {
    if (++it > maxit) fail(Errc::SolveFailed, "conjugate gradients did not converge");
    for (const i32 u : g.unknowns) {
      double acc = p[std::size_t(u)];
      for (std::size_t j = 0; j < nj; ++j) acc -= g.w[j] * p[std::size_t(u + g.off[j])];
      ap[std::size_t(u)] = acc;
    }
    const double alpha = r2 / dot_over(g.unknowns, p, ap);
    for (const i32 u : g.unknowns) {
      h[std::size_t(u)] += alpha * p[std::size_t(u)];
      r[std::size_t(u)] -= alpha * ap[std::size_t(u)];
    }
    const double r2n = dot_over(g.unknowns, r, r);
    const double beta = r2n / r2;
    r2 = r2n;
    for (const i32 u : g.unknowns) p[std::size_t(u)] = r[std::size_t(u)] + beta * p[std::size_t(u)];
  }
  iterations = it;
  residual = std::sqrt(r2 / b2);
}

}  // namespace

EquilibriumResult equilibrium(const MovingMode& mode, const std::vector<Pt>& K, i32 R) {
  if (K.empty()) fail(Errc::ConfigInvalid, "K must be nonempty");
  if (R < 0) fail(Errc::ConfigInvalid, "box radius must be nonnegative");
  const std::vector<Pt> k = dedupe_sites(K);
  const int d = mode.d;
  i64 boxSites = 1;
  for (int i = 0; i < d; ++i) boxSites *= 2 * i64(R) + 1;
  for (const Pt& s : k) {
    for (int i = 0; i < d; ++i)
      if (std::abs(s[std::size_t(i)]) > R) fail(Errc::KNotInA, "K reaches outside the box");
    for (int i = d; i < kMaxDim; ++i)
      if (s[std::size_t(i)] != 0) fail(Errc::ConfigInvalid, "K site has entries beyond dimension d");
  }
  if (i64(k.size()) == boxSites) fail(Errc::KEqualsA, "K fills the whole box");

  EscapeGrid g = build_grid(mode, k, R);

  // right-hand side: probability of jumping straight out of A
  std::vector<double> h(std::size_t(g.cells), 0.0), r(std::size_t(g.cells), 0.0);
  for (const i32 u : g.unknowns) {
    double b = 0.0;
    for (std::size_t j = 0; j < g.off.size(); ++j)
      if (g.cls[std::size_t(u + g.off[j])] == 2) b += g.w[j];
    r[std::size_t(u)] = b;
  }

  EquilibriumResult out;
  out.K = k;
  out.boxRadius = R;
  solve_escape(g, h, r, out.cgIterations, out.residual);

  double cap = 0.0;
  for (const Pt& s : k) {
    const i64 base = g.index(s);
    double e = 0.0;
    for (std::size_t j = 0; j < g.off.size(); ++j) {
      const i64 n = base + g.off[j];
      const u8 c = g.cls[std::size_t(n)];
      if (c == 2)
        e += g.w[j];
      else if (c == 0)
        e += g.w[j] * h[std::size_t(n)];
    }
    if (e < -1e-8) fail(Errc::SolveFailed, "negative equilibrium mass");
    e = std::max(e, 0.0);
    out.measure[s] = e;
    cap += e;
  }
  if (!(cap > 0.0)) fail(Errc::SolveFailed, "capacity must be positive");
  out.capacity = cap;
  // coarse solver-level bound; box-ladder increments dominate in practice
  out.errorBound = 1e-8 * (1.0 + cap);
  return out;
}

CapacityEstimate capacity_extrapolated(const MovingMode& mode, const std::vector<Pt>& K,
                                       double tol) {
  if (!(tol > 0.0)) fail(Errc::ConfigInvalid, "tolerance must be positive");
  if (K.empty()) fail(Errc::ConfigInvalid, "K must be nonempty");
  const std::vector<Pt> k = dedupe_sites(K);
  i32 rK = 0;
  for (const Pt& s : k)
    for (int i = 0; i < mode.d; ++i) rK = std::max(rK, std::abs(s[std::size_t(i)]));
  const i32 r0 = rK + 1;
  if (2 * r0 > kCapacityLadderMaxRadius) fail(Errc::ConfigInvalid, "K too large for the box ladder");

  std::vector<i32> radii;
  for (i32 R = r0; R <= kCapacityLadderMaxRadius; R *= 2) radii.push_back(R);
  if (radii.back() < kCapacityLadderMaxRadius) radii.push_back(kCapacityLadderMaxRadius);

  CapacityEstimate est;
  double prevCap = 0.0;
  i32 prevR = 0;
  for (const i32 R : radii) {
    EquilibriumResult eq = equilibrium(mode, k, R);
    est.ladder.push_back({R, eq.capacity});
    if (prevR > 0) {
      const double delta = prevCap - eq.capacity;
      if (delta < -1e-9) fail(Errc::SolveFailed, "capacity ladder is not decreasing");
      if (delta <= tol) {
        est.last = std::move(eq);
        est.capacity = est.last.capacity;
        // increments decay like 1/R, so the remaining decrease is about
        // delta * Rprev/(R - Rprev); at least the last increment is reported
        const double remaining = std::max(delta, 0.0) * double(prevR) / double(R - prevR);
        est.error = 1.5 * remaining + est.last.errorBound;
        est.extrapolated = est.capacity - remaining;
        return est;
      }
    }
    prevCap = eq.capacity;
    prevR = R;
    est.last = std::move(eq);
  }
  fail(Errc::ToleranceUnreachable, "capacity ladder exhausted at radius 128 with increment above tol");
}

HitScalingReport hit_probability_scaling(const MovingMode& mode, i32 r1, std::vector<i32> r2s,
                                         i64 reps, u64 seed, double horizon) {
  if (r1 < 1) fail(Errc::ConfigInvalid, "inner radius must be at least 1");
  if (r2s.empty()) fail(Errc::ConfigInvalid, "need at least one outer radius");
  if (reps < 2) fail(Errc::ConfigInvalid, "need at least two replicates");
  std::sort(r2s.begin(), r2s.end());
  r2s.erase(std::unique(r2s.begin(), r2s.end()), r2s.end());
  for (const i32 r2 : r2s)
    if (r2 <= r1)
      fail(Errc::ConfigInvalid, "escape starts at |x|inf = r1+1 must lie inside B(0,r2): need r2 > r1");

  const int d = mode.d;
  const std::vector<Pt> ballK = zd_ball(d, r1);
  ZdWindow win;
  win.build(d, ballK);
  const ZdWalker walker(mode);
  const FarFieldGreen ff = far_field_green(mode);

  // capacity of the target ball, for completing trajectories past truncation:
  // P_y[hit ball] ~ cap * g(y) in the far field, so a few percent suffices
  const EquilibriumResult pilot = equilibrium(mode, ballK, std::max<i32>(4 * r1, 8));
  const CapacityEstimate capEst =
      capacity_extrapolated(mode, ballK, std::max(0.08 * pilot.capacity, 1e-4));
  const double capBall = capEst.extrapolated > 0.5 * capEst.capacity ? capEst.extrapolated
                                                                     : capEst.capacity;

  HitScalingReport rep;
  rep.r1 = r1;
  rep.horizon = horizon;
  rep.capBall = capBall;

  const Pt origin{};
  for (std::size_t i = 0; i < r2s.size(); ++i) {
    const i32 r2 = r2s[i];
    HitScalingPoint pt;
    pt.r1 = r1;
    pt.r2 = r2;
    pt.reps = reps;

    const std::vector<Pt> outStarts = zd_sphere(d, r2 + 1);
    const std::vector<Pt> inStarts = zd_sphere(d, r1 + 1);

    // open horizon, truncated at 4*r2 and completed by cap * far field
    {
      const i32 rFar = 4 * r2;
      const i64 budget = 400 * i64(rFar) * rFar + 1000000;
      double sum = 0.0, sum2 = 0.0;
      for (i64 t = 0; t < reps; ++t) {
        RngStream rng = make_stream(seed, StreamPurpose::Scaling, (u64(i) << 40) | u64(t));
        const Pt start = outStarts[std::size_t(rng.uniform_below(u64(outStarts.size())))];
        const ZdWalkResult res =
            walker.run_escape(start, origin, rFar + 1, &win, true, budget, rng, nullptr, 0);
        double v = 0.0;
        if (res.reason == ZdStopReason::HitWindow)
          v = 1.0;
        else if (res.reason == ZdStopReason::Exited)
          v = std::min(capBall * ff.at(res.end), 1.0);
        else
          fail(Errc::StepBudgetExceeded, "open-horizon walk exceeded its step budget");
        sum += v;
        sum2 += v * v;
      }
      pt.pInf = sum / double(reps);
      pt.seInf = std::sqrt(std::max(sum2 / double(reps) - pt.pInf * pt.pInf, 0.0) / double(reps));
    }

    // fixed time horizon: jump budget is Poisson(horizon) per trajectory
    if (horizon > 0.0) {
      const i32 rFar = r2 + i32(6.0 * std::sqrt(horizon)) + 10;
      double sum = 0.0;
      for (i64 t = 0; t < reps; ++t) {
        RngStream rng =
            make_stream(seed, StreamPurpose::Scaling, (1ull << 36) | (u64(i) << 40) | u64(t));
        const Pt start = outStarts[std::size_t(rng.uniform_below(u64(outStarts.size())))];
        const i64 jumps = rng.poisson(horizon);
        if (jumps == 0) continue;
        const ZdWalkResult res =
            walker.run_escape(start, origin, rFar + 1, &win, true, jumps, rng, nullptr, 0);
        if (res.reason == ZdStopReason::HitWindow) sum += 1.0;
      }
      pt.pHorizon = sum / double(reps);
      pt.seHorizon = std::sqrt(std::max(pt.pHorizon * (1.0 - pt.pHorizon), 0.0) / double(reps));
    }

    // escape the annulus before touching the inner ball
    {
      const i64 budget = 400 * i64(r2) * r2 + 1000000;
      double sum = 0.0;
      for (i64 t = 0; t < reps; ++t) {
        RngStream rng =
            make_stream(seed, StreamPurpose::Scaling, (2ull << 36) | (u64(i) << 40) | u64(t));
        const Pt start = inStarts[std::size_t(rng.uniform_below(u64(inStarts.size())))];
        const ZdWalkResult res =
            walker.run_escape(start, origin, r2 + 1, &win, true, budget, rng, nullptr, 0);
        if (res.reason == ZdStopReason::Exited)
          sum += 1.0;
        else if (res.reason == ZdStopReason::BudgetExhausted)
          fail(Errc::StepBudgetExceeded, "annulus walk exceeded its step budget");
      }
      pt.pEscape = sum / double(reps);
      pt.seEscape =
          std::sqrt(std::max(pt.pEscape * (1.0 - pt.pEscape), 0.0) / double(reps));
    }

    rep.points.push_back(pt);
  }

  if (rep.points.size() >= 2) {
    std::vector<double> ratio, pInf, pHor, gap, pEsc;
    for (const HitScalingPoint& pt : rep.points) {
      ratio.push_back(double(pt.r1) / double(pt.r2));
      pInf.push_back(pt.pInf);
      pHor.push_back(pt.pHorizon);
      gap.push_back(double(pt.r2 - pt.r1));
      pEsc.push_back(pt.pEscape);
    }
    rep.fitInf = fit_loglog(ratio, pInf);
    if (horizon > 0.0) rep.fitHorizon = fit_loglog(ratio, pHor);
    rep.fitEscape = fit_loglog(gap, pEsc);
  }
  return rep;
}

}  // namespace covertime

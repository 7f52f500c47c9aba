#include "covertime/quasistationary.hpp"

#include <algorithm>
#include <cmath>

#include "covertime/capacity.hpp"
#include "covertime/oracle.hpp"
#include "covertime/walk.hpp"

namespace covertime {

namespace {

constexpr i64 kMaxPowerIterations = 2000000;

std::vector<Pt> canonical_centers(const TorusGeometry& geom, const std::vector<Pt>& centers) {
  if (centers.empty()) fail(Errc::ConfigInvalid, "need at least one obstacle center");
  std::vector<Pt> out;
  out.reserve(centers.size());
  for (const Pt& c : centers) out.push_back(geom.canonical(c));
  std::vector<Pt> sorted = out;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    fail(Errc::ConfigInvalid, "duplicate obstacle centers");
  return out;
}

i32 min_pairwise_separation(const TorusGeometry& geom, const std::vector<Pt>& centers) {
  if (centers.size() == 1) return geom.N;
  i32 s = geom.N;
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 1; j < centers.size(); ++j)
      s = std::min(s, geom.dinf(centers[i], centers[j]));
  return s;
}

// shared geometry checks for the sigma-based experiments: A boxes strictly
// inside disjoint C boxes
std::vector<Pt> validate_nested_boxes(const MovingMode& mode, const TorusGeometry& geom,
                                      const std::vector<Pt>& centers, i32 rA, i32 rC) {
  if (mode.d != geom.d) fail(Errc::ConfigInvalid, "mode and torus dimension mismatch");
  std::vector<Pt> cs = canonical_centers(geom, centers);
  if (rA < 0) fail(Errc::ConfigInvalid, "A radius must be >= 0");
  if (rC <= rA) fail(Errc::ConfigInvalid, "C radius must exceed the A radius");
  if (min_pairwise_separation(geom, cs) <= 2 * rC && cs.size() > 1)
    fail(Errc::DegenerateScale, "C boxes overlap");
  return cs;
}

void matvec_shifted(const RestrictedMatrix& m, const std::vector<double>& x,
                    std::vector<double>& y) {
  // y = (P + I) x; the shift keeps the iterated spectrum nonnegative
  const std::size_t n = std::size_t(m.n);
  for (std::size_t r = 0; r < n; ++r) {
    double acc = x[r];
    for (i64 k = m.rowPtr[r]; k < m.rowPtr[r + 1]; ++k)
      acc += m.val[std::size_t(k)] * x[std::size_t(m.col[std::size_t(k)])];
    y[r] = acc;
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Power iteration for the top eigenpair of P + I, optionally deflated against
// a fixed unit vector each step. Returns iterations spent; v holds the unit
// eigenvector, lam the eigenvalue of P, resid the 2-norm eigen-residual.
i64 power_phase(const RestrictedMatrix& m, std::vector<double>& v,
                const std::vector<double>* deflate, double tol, double* lam, double* resid) {
  const std::size_t n = std::size_t(m.n);
  std::vector<double> w(n);
  if (deflate) {
    const double c = dot(*deflate, v);
    for (std::size_t i = 0; i < n; ++i) v[i] -= c * (*deflate)[i];
  }
  double nv = std::sqrt(dot(v, v));
  if (!(nv > 0)) fail(Errc::NoConvergence, "power iteration started from a null vector");
  for (std::size_t i = 0; i < n; ++i) v[i] /= nv;
  for (i64 it = 1; it <= kMaxPowerIterations; ++it) {
    matvec_shifted(m, v, w);
    if (deflate) {
      const double c = dot(*deflate, w);
      for (std::size_t i = 0; i < n; ++i) w[i] -= c * (*deflate)[i];
    }
    const double r = dot(v, w);
    double rs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = w[i] - r * v[i];
      rs += e * e;
    }
    rs = std::sqrt(rs);
    if (rs <= tol) {
      *lam = r - 1.0;
      *resid = rs;
      return it;
    }
    const double nw = std::sqrt(dot(w, w));
    if (!(nw > 0)) fail(Errc::NoConvergence, "power iteration collapsed to zero");
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
  }
  fail(Errc::NoConvergence, "power iteration did not reach the residual tolerance");
}

// Normalized equilibrium measure and extrapolated capacity of B(0, rA). The
// 5% ladder stop keeps desk boxes at R <= 32 solves (another octave costs
// minutes) while the extrapolated value already sits within a few tenths of
// a percent and the normalized measure converges even faster.
CapacityEstimate ball_capacity(const MovingMode& mode, int d, i32 rA) {
  const std::vector<Pt> ball = zd_ball(d, rA);
  const EquilibriumResult pilot = equilibrium(mode, ball, std::max<i32>(rA + 1, 4));
  return capacity_extrapolated(mode, ball, std::max(0.05 * pilot.capacity, 1e-6));
}

}  // namespace

ObstacleGeometry obstacle_geometry(const TorusGeometry& geom, const std::vector<Pt>& centers,
                                   double eps0) {
  if (!(eps0 > 0.0 && eps0 < 1.0)) fail(Errc::ConfigInvalid, "epsilon0 must lie in (0, 1)");
  ObstacleGeometry g;
  g.torus = geom;
  g.centers = canonical_centers(geom, centers);
  g.epsilon0 = eps0;
  g.separation = min_pairwise_separation(geom, g.centers);
  double frac = eps0;
  for (int k = 0; k < 6; ++k) {
    g.radii[std::size_t(k)] = i32(std::floor(std::pow(double(g.separation), 1.0 - frac)));
    frac *= 0.5;
  }
  for (int k = 1; k < 6; ++k)
    if (g.radii[std::size_t(k)] <= g.radii[std::size_t(k - 1)])
      fail(Errc::DegenerateScale, "floored box radii do not increase strictly");
  const i32 rC = g.radii[2];
  if (2 * rC + 1 > geom.N) fail(Errc::DegenerateScale, "C box wraps around the torus");
  if (g.centers.size() > 1 && g.separation <= 2 * rC)
    fail(Errc::DegenerateScale, "C boxes overlap");
  return g;
}

SiteMask obstacle_boxes(const TorusGeometry& geom, const std::vector<Pt>& centers, i32 radius) {
  const std::vector<Pt> cs = canonical_centers(geom, centers);
  SiteMask mask(geom.volume);
  for (const Pt& c : cs)
    for (i64 s : box_sites(geom, c, radius)) mask.set(s);
  return mask;
}

RestrictedMatrix restricted_matrix(const MovingMode& mode, const TorusGeometry& geom,
                                   const SiteMask& obstacles) {
  if (mode.d != geom.d) fail(Errc::ConfigInvalid, "mode and torus dimension mismatch");
  if (obstacles.volume != geom.volume) fail(Errc::ConfigInvalid, "obstacle mask has wrong volume");
  if (obstacles.count == 0) fail(Errc::ConfigInvalid, "obstacle set is empty");
  if (obstacles.count >= geom.volume) fail(Errc::ConfigInvalid, "obstacles leave no states");

  RestrictedMatrix m;
  m.n = geom.volume - obstacles.count;
  m.sites.reserve(std::size_t(m.n));
  std::vector<i32> row(std::size_t(geom.volume), -1);
  for (i64 s = 0; s < geom.volume; ++s)
    if (!obstacles.test(s)) {
      row[std::size_t(s)] = i32(m.sites.size());
      m.sites.push_back(s);
    }

  const int nj = int(mode.jumps.size());
  m.rowPtr.assign(std::size_t(m.n) + 1, 0);
  m.col.reserve(std::size_t(m.n) * std::size_t(nj));
  m.val.reserve(std::size_t(m.n) * std::size_t(nj));
  std::vector<std::pair<i32, double>> entries;
  for (i64 r = 0; r < m.n; ++r) {
    const Pt p = geom.point(m.sites[std::size_t(r)]);
    entries.clear();
    for (int j = 0; j < nj; ++j) {
      Pt q = p;
      for (int i = 0; i < geom.d; ++i) q[std::size_t(i)] += mode.jumps[std::size_t(j)][std::size_t(i)];
      const i64 y = geom.index(q);
      if (y == m.sites[std::size_t(r)]) continue;  // self-jumps carry no weight by definition
      const i32 c = row[std::size_t(y)];
      if (c < 0) continue;  // jump lands in the obstacle set: mass dropped
      entries.emplace_back(c, mode.jump_prob[std::size_t(j)]);
    }
    std::sort(entries.begin(), entries.end());
    for (std::size_t k = 0; k < entries.size(); ++k) {
      if (!m.col.empty() && i64(m.col.size()) > m.rowPtr[std::size_t(r)] &&
          m.col.back() == entries[k].first)
        m.val.back() += entries[k].second;  // distinct jumps can wrap to one site
      else {
        m.col.push_back(entries[k].first);
        m.val.push_back(entries[k].second);
      }
    }
    m.rowPtr[std::size_t(r) + 1] = i64(m.col.size());
  }

  // flood fill over the kept graph
  std::vector<char> seen(std::size_t(m.n), 0);
  std::vector<i32> stack{0};
  seen[0] = 1;
  i64 reached = 1;
  while (!stack.empty()) {
    const i32 r = stack.back();
    stack.pop_back();
    for (i64 k = m.rowPtr[std::size_t(r)]; k < m.rowPtr[std::size_t(r) + 1]; ++k) {
      const i32 c = m.col[std::size_t(k)];
      if (!seen[std::size_t(c)]) {
        seen[std::size_t(c)] = 1;
        ++reached;
        stack.push_back(c);
      }
    }
  }
  if (reached != m.n) fail(Errc::Disconnected, "complement splits under the mode's jumps");
  return m;
}

SpectralSummary perron_pair(const RestrictedMatrix& m, double tol) {
  if (m.n < 2) fail(Errc::ConfigInvalid, "need at least two states for two eigenvalues");
  if (!(tol > 0)) fail(Errc::ConfigInvalid, "tolerance must be positive");
  const std::size_t n = std::size_t(m.n);

  SpectralSummary out;
  std::vector<double> v(n, 1.0);  // positive start overlaps the Perron vector
  double resid1 = 0.0;
  out.iterations = power_phase(m, v, nullptr, tol, &out.lambda1, &resid1);

  // fixed pseudo-random start so the second phase is deterministic and has
  // generic overlap with the next eigenspace
  std::vector<double> u(n);
  u32 state = 0x9e3779b9u;
  for (std::size_t i = 0; i < n; ++i) {
    state = state * 1664525u + 1013904223u;
    u[i] = double((state >> 8) & 0xffffu) / 65536.0 - 0.5;
  }
  double resid2 = 0.0;
  out.iterations += power_phase(m, u, &v, tol, &out.lambda2, &resid2);
  out.residual = std::max(resid1, resid2);

  if (!(out.lambda1 < 1.0)) fail(Errc::SolveFailed, "leading eigenvalue reached one");
  if (!(out.lambda2 < out.lambda1)) fail(Errc::SolveFailed, "eigenvalue ordering lost");
  if (!(out.lambda2 > 0.0)) fail(Errc::SolveFailed, "second eigenvalue not positive at this scale");

  long double sum = 0.0L;
  for (double x : v) sum += x;
  const double sign = sum < 0 ? -1.0 : 1.0;
  long double total = sign * sum;
  out.sigma.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = sign * v[i];
    if (!(x > 0.0)) fail(Errc::NoConvergence, "Perron vector not strictly positive");
    out.sigma[i] = double(x / total);
  }
  return out;
}

GapScalingReport gap_scaling(const MovingMode& mode, const std::vector<int>& sides, i32 boxRadius,
                             double tol) {
  if (sides.size() < 3) fail(Errc::ConfigInvalid, "need at least three torus sides");
  GapScalingReport rep;
  std::vector<double> xs, ys;
  for (int N : sides) {
    const TorusGeometry geom(mode.d, N);
    const SiteMask obs = obstacle_boxes(geom, {Pt{}}, boxRadius);
    const RestrictedMatrix m = restricted_matrix(mode, geom, obs);
    const SpectralSummary sp = perron_pair(m, tol);
    GapScalingPoint p;
    p.N = N;
    p.lambda1 = sp.lambda1;
    p.lambda2 = sp.lambda2;
    p.gap = sp.lambda1 - sp.lambda2;
    p.minSigma = *std::min_element(sp.sigma.begin(), sp.sigma.end());
    rep.points.push_back(p);
    xs.push_back(double(N));
    ys.push_back(p.gap);
  }
  rep.fit = fit_loglog(xs, ys);
  return rep;
}

std::vector<double> default_time_grid(const TorusGeometry& geom, int steps) {
  if (steps < 1) fail(Errc::ConfigInvalid, "need at least one grid step");
  std::vector<double> grid;
  grid.reserve(std::size_t(steps) + 1);
  for (int k = 0; k <= steps; ++k) grid.push_back(double(k) * double(geom.N) * double(geom.N));
  return grid;
}

ConvergenceReport conditional_convergence(const MovingMode& mode, const TorusGeometry& geom,
                                          const SiteMask& obstacles,
                                          const std::vector<double>& tgrid) {
  if (tgrid.empty()) fail(Errc::ConfigInvalid, "time grid is empty");
  for (std::size_t k = 0; k < tgrid.size(); ++k) {
    if (!(tgrid[k] >= 0.0) || !std::isfinite(tgrid[k]))
      fail(Errc::ConfigInvalid, "time grid entries must be finite and nonnegative");
    if (k > 0 && tgrid[k] <= tgrid[k - 1])
      fail(Errc::ConfigInvalid, "time grid must increase strictly");
  }
  const RestrictedMatrix m = restricted_matrix(mode, geom, obstacles);
  if (m.n > kMaxDenseStates) fail(Errc::CapExceeded, "state count exceeds the dense solver cap");
  const int n = int(m.n);

  std::vector<double> dense(std::size_t(n) * std::size_t(n), 0.0);
  for (i64 r = 0; r < m.n; ++r)
    for (i64 k = m.rowPtr[std::size_t(r)]; k < m.rowPtr[std::size_t(r) + 1]; ++k)
      dense[std::size_t(r) * std::size_t(n) + std::size_t(m.col[std::size_t(k)])] =
          m.val[std::size_t(k)];
  const SpectralDecomposition eig = eigen_symmetric(std::move(dense), n);

  ConvergenceReport rep;
  rep.lambda1 = eig.values[0];
  rep.lambda2 = eig.values[1];
  rep.lambdaRatio = eig.values[1] / eig.values[0];
  rep.times = tgrid;

  const double* v1 = eig.vectors.data();
  long double s1 = 0.0L;
  for (int y = 0; y < n; ++y) s1 += v1[y];
  const double sign = s1 < 0 ? -1.0 : 1.0;
  std::vector<double> sigma(std::size_t(n), 0.0);
  for (int y = 0; y < n; ++y) sigma[std::size_t(y)] = double(sign * v1[y] / (sign * s1));

  std::vector<double> law(std::size_t(n) * std::size_t(n));
  for (double t : tgrid) {
    std::fill(law.begin(), law.end(), 0.0);
    const double lead = std::exp(t * (eig.values[0] - 1.0));
    if (!(lead > 0.0))
      fail(Errc::SolveFailed, "time grid reaches the numerical underflow range");
    for (int i = 0; i < n; ++i) {
      const double c = std::exp(t * (eig.values[std::size_t(i)] - 1.0));
      if (c < lead * 1e-18) continue;  // below double precision of the leading mode
      const double* vi = eig.vectors.data() + std::size_t(i) * std::size_t(n);
      for (int x = 0; x < n; ++x) {
        const double cv = c * vi[x];
        if (cv == 0.0) continue;
        double* lrow = law.data() + std::size_t(x) * std::size_t(n);
        for (int y = 0; y < n; ++y) lrow[std::size_t(y)] += cv * vi[y];
      }
    }
    double tvMax = 0.0;
    for (int x = 0; x < n; ++x) {
      const double* lrow = law.data() + std::size_t(x) * std::size_t(n);
      long double denom = 0.0L;
      for (int y = 0; y < n; ++y) denom += lrow[y];
      if (!(denom > 0.0L)) fail(Errc::SolveFailed, "conditional mass vanished numerically");
      long double tv = 0.0L;
      for (int y = 0; y < n; ++y) tv += std::fabs(double(lrow[y] / denom) - sigma[std::size_t(y)]);
      tvMax = std::max(tvMax, double(tv) * 0.5);
    }
    rep.tvMax.push_back(tvMax);
  }

  // fit the geometric stretch: above the numerical floor, below the burn-in
  std::vector<double> ts, logs;
  for (std::size_t k = 0; k < tgrid.size(); ++k)
    if (rep.tvMax[k] >= 1e-11 && rep.tvMax[k] <= 0.5) {
      ts.push_back(tgrid[k]);
      logs.push_back(std::log(rep.tvMax[k]));
    }
  if (ts.size() >= 2) rep.decayRatio = std::exp(fit_line(ts, logs).slope);
  return rep;
}

EntryReport hitting_from_sigma(const MovingMode& mode, const TorusGeometry& geom,
                               const std::vector<Pt>& centers, i32 rA, i32 rC, i64 reps,
                               double minExpected, RngStream& rng) {
  const std::vector<Pt> cs = validate_nested_boxes(mode, geom, centers, rA, rC);
  if (reps < 1) fail(Errc::ConfigInvalid, "need at least one replicate");
  if (minExpected < 0) fail(Errc::ConfigInvalid, "minimum expected count must be >= 0");

  const SiteMask obstacles = obstacle_boxes(geom, cs, rC);
  const RestrictedMatrix m = restricted_matrix(mode, geom, obstacles);
  const SpectralSummary sp = perron_pair(m, 1e-10);
  AliasTable sampler(sp.sigma);

  const SiteMask maskA = obstacle_boxes(geom, cs, rA);
  const std::vector<i64> asites = maskA.sites();
  auto slot_of = [&asites](i64 site) {
    return std::size_t(std::lower_bound(asites.begin(), asites.end(), site) - asites.begin());
  };

  EntryReport rep;
  rep.reps = reps;
  rep.minExpected = minExpected;
  rep.table.resize(asites.size());
  for (std::size_t k = 0; k < asites.size(); ++k) rep.table[k].site = asites[k];

  const CapacityEstimate est = ball_capacity(mode, geom.d, rA);
  const double norm = est.last.capacity * double(cs.size());
  for (const Pt& c : cs)
    for (const auto& [offset, mass] : est.last.measure) {
      Pt p = c;
      for (int i = 0; i < geom.d; ++i) p[std::size_t(i)] += offset[std::size_t(i)];
      rep.table[slot_of(geom.index(p))].target += mass / norm;
    }

  const TorusWalker walker(mode, geom);
  const WalkOptions opts{};
  for (i64 rep_i = 0; rep_i < reps; ++rep_i) {
    const i64 start = m.sites[std::size_t(sampler.pick(rng))];
    const WalkResult res = walker.hitting_time(geom.point(start), maskA, false, opts, rng);
    ++rep.table[slot_of(geom.index(res.end))].hits;
  }

  for (const EntrySiteStat& st : rep.table) {
    if (st.target <= 0.0) {
      rep.offTargetHits += st.hits;
      continue;
    }
    if (st.target * double(reps) < minExpected) continue;
    ++rep.qualifying;
    const double dev = std::fabs(double(st.hits) / (double(reps) * st.target) - 1.0);
    rep.maxRelDev = std::max(rep.maxRelDev, dev);
  }
  return rep;
}

DualityReport capacity_hitting_duality(const MovingMode& mode, const TorusGeometry& geom,
                                       const std::vector<Pt>& centers, i32 rA, i32 rC, i64 reps,
                                       RngStream& rng) {
  const std::vector<Pt> cs = validate_nested_boxes(mode, geom, centers, rA, rC);
  if (reps < 2) fail(Errc::ConfigInvalid, "need at least two replicates");
  if (geom.volume > (i64(1) << 26)) fail(Errc::CapExceeded, "torus too large for the probe scan");
  if (2 * rC + 1 > geom.N) fail(Errc::DegenerateScale, "box side exceeds torus side");

  // one scan gives the far probe (most distant from every center) and the
  // near probe (closest site outside every C box)
  i64 farSite = -1, nearSite = -1;
  i32 farDist = -1, nearDist = geom.N + 1;
  for (i64 s = 0; s < geom.volume; ++s) {
    const Pt p = geom.point(s);
    i32 md = geom.N;
    for (const Pt& c : cs) md = std::min(md, geom.dinf(p, c));
    if (md > farDist) {
      farDist = md;
      farSite = s;
    }
    if (md > rC && md < nearDist) {
      nearDist = md;
      nearSite = s;
    }
  }
  if (nearSite < 0) fail(Errc::ConfigInvalid, "no sites outside the C boxes");

  const CapacityEstimate est = ball_capacity(mode, geom.d, rA);

  DualityReport rep;
  rep.reps = reps;
  rep.capSum = est.extrapolated * double(cs.size());

  const SiteMask maskA = obstacle_boxes(geom, cs, rA);
  const TorusWalker walker(mode, geom);
  const WalkOptions opts{};
  auto mean_from = [&](i64 site, i64 count, double* se) {
    long double sum = 0.0L, sq = 0.0L;
    const Pt start = geom.point(site);
    for (i64 i = 0; i < count; ++i) {
      const WalkResult res = walker.hitting_time(start, maskA, false, opts, rng);
      const double h = double(res.eventStep);
      sum += h;
      sq += h * h;
    }
    const double mean = double(sum / count);
    if (se) {
      const double var = double((sq - sum * sum / count) / (count - 1));
      *se = std::sqrt(std::max(var, 0.0) / double(count));
    }
    return mean;
  };

  long double sum = 0.0L, sq = 0.0L;
  for (i64 i = 0; i < reps; ++i) {
    const WalkResult res =
        walker.hitting_time(geom.point(geom.uniform_site(rng)), maskA, false, opts, rng);
    const double h = double(res.eventStep);
    sum += h;
    sq += h * h;
  }
  rep.meanH = double(sum / reps);
  rep.seH = std::sqrt(std::max(double((sq - sum * sum / reps) / (reps - 1)), 0.0) / double(reps));
  rep.ratio = double(geom.volume) / (rep.meanH * rep.capSum);

  const i64 probeReps = std::max<i64>(reps / 2, 2);
  rep.farMean = mean_from(farSite, probeReps, nullptr);
  rep.nearMean = mean_from(nearSite, probeReps, nullptr);
  rep.spreadRatio = rep.farMean / rep.nearMean;
  return rep;
}

}  // namespace covertime

#include "covertime/cover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "covertime/green.hpp"
#include "covertime/walk.hpp"

namespace covertime {

namespace {

// Stream map: every replicate draws from its own stream keyed by
// (experiment tag, side, replicate), so reruns are identical no matter how
// replicates are batched across threads.
enum : u64 { kTagHit = 1, kTagCover = 2, kTagVacancy = 3, kTagUncovered = 4, kTagSeparated = 5 };

RngStream replicate_stream(u64 seed, u64 tag, int N, i64 rep) {
  const u64 key = (tag << 56) | (u64(u32(N)) << 32) | u64(u32(rep));
  return make_stream(seed, StreamPurpose::Cover, key);
}

double green_origin(const MovingMode& mode, double gTol) {
  if (!(gTol > 0.0)) fail(Errc::ConfigInvalid, "green tolerance must be positive");
  return green(mode, Pt{}, gTol).value;
}

struct MeanSe {
  double mean = 0.0, se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  const double n = double(v.size());
  double m = 0.0;
  for (double x : v) m += x;
  m /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  MeanSe r;
  r.mean = m;
  r.se = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return r;
}

GumbelTestReport normalized_report(double g0, double g0Tol, double logF, double normalizer,
                                   std::vector<i64> jumps, std::vector<double> times) {
  GumbelTestReport r;
  r.replicates = i64(times.size());
  r.g0 = g0;
  r.g0Tol = g0Tol;
  r.logF = logF;
  r.normalizer = normalizer;
  r.jumps = std::move(jumps);
  r.times = std::move(times);
  r.samples.resize(r.times.size());
  for (std::size_t i = 0; i < r.times.size(); ++i) r.samples[i] = r.times[i] / normalizer - logF;
  r.zGrid = default_z_grid();
  std::vector<double> sorted = r.samples;
  std::sort(sorted.begin(), sorted.end());
  r.cdf.resize(r.zGrid.size());
  for (std::size_t i = 0; i < r.zGrid.size(); ++i) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), r.zGrid[i]);
    r.cdf[i] = double(it - sorted.begin()) / double(sorted.size());
  }
  r.ksDistance = ks_to_gumbel(r.samples);
  return r;
}

// Continuous hitting times of site 0 from uniform starts (a start on the site
// itself counts as an immediate hit, matching the stationary average).
std::vector<double> point_hit_times(const TorusWalker& walker, i64 replicates, u64 seed, u64 tag) {
  const TorusGeometry& geom = walker.geometry();
  SiteMask target = mask_from_sites(geom, {0});
  std::vector<double> times(static_cast<std::size_t>(replicates));
  WalkOptions opts;
  for (i64 rep = 0; rep < replicates; ++rep) {
    RngStream rng = replicate_stream(seed, tag, geom.N, rep);
    const Pt start = geom.point(geom.uniform_site(rng));
    times[std::size_t(rep)] = walker.hitting_time(start, target, false, opts, rng).totalTime;
  }
  return times;
}

i32 min_pair_dinf(const TorusGeometry& geom, const std::vector<i64>& sites) {
  if (sites.size() < 2) return std::numeric_limits<i32>::max();
  std::vector<Pt> pts(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) pts[i] = geom.point(sites[i]);
  i32 best = std::numeric_limits<i32>::max();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, geom.dinf(pts[i], pts[j]));
  return best;
}

}  // namespace

double u_of_z(double gZero, i64 targetSize, double z) {
  if (!(gZero > 0.0)) fail(Errc::ConfigInvalid, "potential at the origin must be positive");
  if (targetSize < 1) fail(Errc::ConfigInvalid, "target size must be at least one site");
  return gZero * (std::log(double(targetSize)) + z);
}

double gumbel_cdf(double z) { return std::exp(-std::exp(-z)); }

std::vector<double> default_z_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 16; ++k) grid.push_back(-2.0 + 0.5 * k);
  return grid;
}

double ks_to_gumbel(std::vector<double> samples) {
  if (samples.empty()) fail(Errc::ConfigInvalid, "KS distance needs at least one sample");
  std::sort(samples.begin(), samples.end());
  const double n = double(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double g = gumbel_cdf(samples[i]);
    d = std::max(d, std::max(double(i + 1) / n - g, g - double(i) / n));
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) fail(Errc::ConfigInvalid, "KS distance needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / double(a.size()) - double(j) / double(b.size())));
  }
  return d;
}

SiteMask cover_target_mask(const TorusGeometry& geom, const CoverTarget& target) {
  SiteMask mask(geom.volume);
  if (target.kind == CoverTarget::Kind::Full) {
    for (i64 s = 0; s < geom.volume; ++s) mask.set(s);
    return mask;
  }
  if (target.spacing < 1 || geom.N % target.spacing != 0)
    fail(Errc::ConfigInvalid, "grid spacing must divide the torus side");
  const i32 s = target.spacing;
  for (i64 idx = 0; idx < geom.volume; ++idx) {
    const Pt p = geom.point(idx);
    bool on = true;
    for (int k = 0; k < geom.d; ++k) on = on && (p[std::size_t(k)] % s == 0);
    if (on) mask.set(idx);
  }
  return mask;
}

std::vector<GumbelSuitePoint> gumbel_suite(const MovingMode& mode, const std::vector<int>& sides,
                                           const CoverTarget& target, i64 replicates,
                                           i64 hitReplicates, double gTol, u64 seed) {
  if (sides.empty()) fail(Errc::ConfigInvalid, "gumbel suite needs at least one torus side");
  if (replicates < 2 || hitReplicates < 2)
    fail(Errc::ConfigInvalid, "gumbel suite needs at least two replicates per phase");
  const double g0 = green_origin(mode, gTol);
  std::vector<GumbelSuitePoint> out;
  out.reserve(sides.size());
  for (int N : sides) {
    const TorusGeometry geom(mode.d, N);
    const TorusWalker walker(mode, geom);
    const SiteMask mask = cover_target_mask(geom, target);
    const bool full = mask.count == geom.volume;
    const double logF = std::log(double(mask.count));

    GumbelSuitePoint point;
    point.N = N;
    const MeanSe hit = mean_se(point_hit_times(walker, hitReplicates, seed, kTagHit));
    point.meanHit = hit.mean;
    point.meanHitSE = hit.se;

    std::vector<i64> jumps(static_cast<std::size_t>(replicates));
    std::vector<double> times(static_cast<std::size_t>(replicates));
    WalkOptions opts;
    WalkResult res;
    for (i64 rep = 0; rep < replicates; ++rep) {
      RngStream rng = replicate_stream(seed, kTagCover, N, rep);
      const Pt start = geom.point(geom.uniform_site(rng));
      StopRule rule;
      rule.kind = StopKind::Coverage;
      rule.target = full ? nullptr : &mask;
      WalkOptions o = opts;
      o.attach_time = true;
      walker.run(start, rule, o, rng, res);
      jumps[std::size_t(rep)] = res.jumpCount;
      times[std::size_t(rep)] = res.totalTime;
    }
    const double vol = double(geom.volume);
    point.byGreen = normalized_report(g0, gTol, logF, g0 * vol, jumps, times);
    point.byMeanHit = normalized_report(g0, gTol, logF, point.meanHit, std::move(jumps), std::move(times));
    out.push_back(std::move(point));
  }
  return out;
}

MeanHitEstimate mean_hitting_ratio(const MovingMode& mode, int N, i64 replicates, double gTol,
                                   u64 seed) {
  if (replicates < 2) fail(Errc::ConfigInvalid, "mean hitting ratio needs at least two replicates");
  const double g0 = green_origin(mode, gTol);
  const TorusGeometry geom(mode.d, N);
  const TorusWalker walker(mode, geom);
  const MeanSe hit = mean_se(point_hit_times(walker, replicates, seed, kTagHit));
  MeanHitEstimate est;
  est.N = N;
  est.replicates = replicates;
  est.g0 = g0;
  est.g0Tol = gTol;
  est.mean = hit.mean;
  est.se = hit.se;
  const double norm = g0 * double(geom.volume);
  est.ratio = hit.mean / norm;
  est.ratioSE = hit.se / norm;
  return est;
}

VacancyReport vacancy_check(const MovingMode& mode, int N, const std::vector<double>& uGrid,
                            i64 replicates, double slack, double gTol, u64 seed) {
  if (uGrid.empty()) fail(Errc::ConfigInvalid, "vacancy check needs a nonempty level grid");
  for (std::size_t i = 0; i < uGrid.size(); ++i) {
    if (uGrid[i] < 0.1 || uGrid[i] > 5.0)
      fail(Errc::ConfigInvalid, "vacancy level outside the [0.1, 5] policy window");
    if (i > 0 && uGrid[i] <= uGrid[i - 1])
      fail(Errc::ConfigInvalid, "vacancy levels must be strictly increasing");
  }
  if (replicates < 2) fail(Errc::ConfigInvalid, "vacancy check needs at least two replicates");
  if (slack < 0.0) fail(Errc::ConfigInvalid, "vacancy slack must be nonnegative");
  const double g0 = green_origin(mode, gTol);
  const TorusGeometry geom(mode.d, N);
  const TorusWalker walker(mode, geom);

  // One walk per replicate runs to its first visit of the probe site; every
  // level reads the same continuous first-visit time, so vacancy indicators
  // are monotone in u along each path.
  const std::vector<double> firstVisit =
      point_hit_times(walker, replicates, seed, kTagVacancy);
  VacancyReport report;
  report.N = N;
  report.replicates = replicates;
  report.g0 = g0;
  report.g0Tol = gTol;
  report.slack = slack;
  report.table.resize(uGrid.size());
  const double vol = double(geom.volume);
  for (std::size_t i = 0; i < uGrid.size(); ++i) {
    VacancyPoint& pt = report.table[i];
    pt.u = uGrid[i];
    pt.horizon = uGrid[i] * vol;
    i64 vacant = 0;
    for (double t : firstVisit) vacant += t > pt.horizon ? 1 : 0;
    pt.empirical = double(vacant) / double(replicates);
    pt.se = std::sqrt(std::max(pt.empirical * (1.0 - pt.empirical), 0.0) / double(replicates));
    pt.predicted = std::exp(-pt.u / g0);
    pt.flagged = std::abs(pt.empirical - pt.predicted) > 3.0 * pt.se + slack;
  }
  return report;
}

UncoveredSetReport uncovered_pipeline(const MovingMode& mode, const TorusGeometry& geom,
                                      const SiteMask& F, double rho, i64 replicates, double gTol,
                                      u64 seed) {
  if (F.volume != geom.volume) fail(Errc::ConfigInvalid, "target mask volume mismatch");
  if (F.count < 1) fail(Errc::ConfigInvalid, "target set must be nonempty");
  if (!(rho > 0.0) || !(rho < 1.0)) fail(Errc::ConfigInvalid, "rho must lie in (0, 1)");
  if (replicates < 1) fail(Errc::ConfigInvalid, "uncovered pipeline needs replicates");
  const double g0 = green_origin(mode, gTol);
  const TorusWalker walker(mode, geom);
  const std::vector<i64> fSites = F.sites();

  UncoveredSetReport report;
  report.N = geom.N;
  report.rho = rho;
  report.g0 = g0;
  report.g0Tol = gTol;
  report.fSize = F.count;
  const double logF = std::log(double(F.count));
  report.tRho = double(geom.volume) * (1.0 - rho) * g0 * logF;
  report.sizeCenter = std::pow(double(F.count), rho);
  report.sizeSlack = std::pow(double(F.count), 2.0 * rho / 3.0);
  report.minDistBar = std::pow(double(F.count), 1.0 / (2.0 * double(geom.d)));
  report.rows.resize(static_cast<std::size_t>(replicates));

  StopRule rule;
  rule.kind = StopKind::FixedTime;
  rule.time = report.tRho;
  WalkOptions opts;
  WalkResult res;
  std::vector<i64> leftover;
  i64 hits = 0;
  for (i64 rep = 0; rep < replicates; ++rep) {
    RngStream rng = replicate_stream(seed, kTagUncovered, geom.N, rep);
    const Pt start = geom.point(geom.uniform_site(rng));
    walker.run(start, rule, opts, rng, res);
    leftover.clear();
    for (i64 s : fSites)
      if (!res.trace.visited(s)) leftover.push_back(s);
    UncoveredReplicate& row = report.rows[std::size_t(rep)];
    row.size = i64(leftover.size());
    row.minPairDist = min_pair_dinf(geom, leftover);
    row.sizeOk = std::abs(double(row.size) - report.sizeCenter) <= report.sizeSlack;
    row.distOk = leftover.size() < 2 || double(row.minPairDist) >= report.minDistBar;
    row.inG1 = row.sizeOk && row.distOk;
    row.h = row.size > 0 ? std::log(double(row.size)) - rho * logF
                         : -std::numeric_limits<double>::infinity();
    hits += row.inG1 ? 1 : 0;
  }
  report.g1Frequency = double(hits) / double(replicates);
  return report;
}

GumbelTestReport separated_subset_gumbel(const MovingMode& mode, const TorusGeometry& geom,
                                         const std::vector<Pt>& F, const Pt& start, i64 replicates,
                                         double gTol, u64 seed) {
  if (F.empty()) fail(Errc::ConfigInvalid, "separated target must be nonempty");
  if (replicates < 2) fail(Errc::ConfigInvalid, "separated cover needs at least two replicates");
  std::set<i64> distinct;
  std::vector<i64> sites;
  sites.reserve(F.size());
  for (const Pt& p : F) {
    const i64 idx = geom.index(p);
    if (!distinct.insert(idx).second) fail(Errc::ConfigInvalid, "separated target repeats a site");
    sites.push_back(idx);
  }
  const double bar = std::pow(double(F.size()), 1.0 / (2.0 * double(geom.d)));
  const i32 minDist = min_pair_dinf(geom, sites);
  if (F.size() >= 2 && double(minDist) < bar)
    fail(Errc::SeparationViolated, "separated target sites sit closer than the separation bar");
  const double g0 = green_origin(mode, gTol);
  const TorusWalker walker(mode, geom);
  const SiteMask mask = mask_from_sites(geom, sites);
  const Pt origin = geom.canonical(start);

  std::vector<i64> jumps(static_cast<std::size_t>(replicates));
  std::vector<double> times(static_cast<std::size_t>(replicates));
  WalkOptions opts;
  for (i64 rep = 0; rep < replicates; ++rep) {
    RngStream rng = replicate_stream(seed, kTagSeparated, geom.N, rep);
    const WalkResult res = walker.cover_time(origin, &mask, opts, rng);
    jumps[std::size_t(rep)] = res.jumpCount;
    times[std::size_t(rep)] = res.totalTime;
  }
  return normalized_report(g0, gTol, std::log(double(F.size())), g0 * double(geom.volume),
                           std::move(jumps), std::move(times));
}

}  // namespace covertime

#pragma once

#include <vector>

#include "covertime/mode.hpp"
#include "covertime/rng.hpp"
#include "covertime/torus.hpp"

namespace covertime {

// Cover-time statistics against the Gumbel law, plus the partial-uncovered-set
// experiments. All operations normalize by the walk's potential at the origin
// (computed by quadrature at a recorded tolerance) and derive one RNG stream
// per replicate from the caller's seed, so results are independent of any
// batching or thread layout.

// Threshold level: the continuous time per unit volume at which a target of
// the given size is covered up to the Gumbel fluctuation z. May be negative
// for very negative z; callers clamp if they need a physical level.
double u_of_z(double gZero, i64 targetSize, double z);

double gumbel_cdf(double z);

// Fixed reporting grid for empirical CDFs, z = -2.0, -1.5, ..., 6.0.
std::vector<double> default_z_grid();

// One-sample Kolmogorov-Smirnov distance to the standard Gumbel CDF.
double ks_to_gumbel(std::vector<double> samples);

// Two-sample Kolmogorov-Smirnov distance between empirical CDFs.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Cover target: the full torus, or the lattice grid of sites whose
// coordinates are all multiples of `spacing` (requires spacing | N).
struct CoverTarget {
  enum class Kind { Full, GridSpacing };
  Kind kind = Kind::Full;
  i32 spacing = 0;
};
SiteMask cover_target_mask(const TorusGeometry& geom, const CoverTarget& target);

struct GumbelTestReport {
  i64 replicates = 0;
  double g0 = 0.0, g0Tol = 0.0;  // normalization constant and its quadrature tolerance
  double logF = 0.0;             // log of the target size
  double normalizer = 0.0;       // divisor applied to the raw times
  std::vector<i64> jumps;        // raw cover jump counts, replicate order
  std::vector<double> times;     // raw continuous cover times, replicate order
  std::vector<double> samples;   // normalized statistic per replicate
  std::vector<double> zGrid;
  std::vector<double> cdf;       // empirical CDF at zGrid
  double ksDistance = 1.0;
  u64 configHash = 0;  // filled by callers that carry a config
};

struct GumbelSuitePoint {
  int N = 0;
  double meanHit = 0.0, meanHitSE = 0.0;  // empirical mean hitting time of a point
  GumbelTestReport byGreen;               // T / (g0 N^d) - log|F|
  GumbelTestReport byMeanHit;             // T / meanHit - log|F|
};

// Cover-time Gumbel suite across torus sides. Per side: `hitReplicates`
// uniform-start hitting runs estimate the mean hitting time of a point, then
// `replicates` uniform-start cover runs of the selected target produce the
// normalized statistic under both normalizations, with empirical CDFs and KS
// distances to the Gumbel law.
std::vector<GumbelSuitePoint> gumbel_suite(const MovingMode& mode, const std::vector<int>& sides,
                                           const CoverTarget& target, i64 replicates,
                                           i64 hitReplicates, double gTol, u64 seed);

struct MeanHitEstimate {
  int N = 0;
  i64 replicates = 0;
  double g0 = 0.0, g0Tol = 0.0;
  double mean = 0.0, se = 0.0;  // continuous hitting time of a fixed site, uniform start
  double ratio = 0.0, ratioSE = 0.0;  // mean / (g0 N^d)
};
MeanHitEstimate mean_hitting_ratio(const MovingMode& mode, int N, i64 replicates, double gTol,
                                   u64 seed);

struct VacancyPoint {
  double u = 0.0;
  double horizon = 0.0;    // u N^d
  double empirical = 0.0;  // fraction of replicates with the site still unvisited
  double se = 0.0;
  double predicted = 0.0;  // exp(-u / g0)
  bool flagged = false;    // |empirical - predicted| > 3 se + slack
};
struct VacancyReport {
  int N = 0;
  i64 replicates = 0;
  double g0 = 0.0, g0Tol = 0.0;
  double slack = 0.0;
  std::vector<VacancyPoint> table;
};
// Vacancy of a fixed site at horizons u N^d from uniform starts. One walk per
// replicate runs to its first visit of the site; the whole u-grid reads off
// that one continuous first-visit time, so the indicators are monotone in u
// pathwise. The grid must be strictly increasing inside the policy window
// [0.1, 5].
VacancyReport vacancy_check(const MovingMode& mode, int N, const std::vector<double>& uGrid,
                            i64 replicates, double slack, double gTol, u64 seed);

struct UncoveredReplicate {
  std::vector<i64> sites;  // the uncovered remainder of F, ascending site index
  i64 size = 0;            // |F_rho|
  i32 minPairDist = 0;     // sup-metric; INT32_MAX sentinel when fewer than two sites
  bool sizeOk = false;
  bool distOk = false;
  bool inG1 = false;
  double h = 0.0;  // log(|F_rho| / |F|^rho), -inf when empty
};
struct UncoveredSetReport {
  int N = 0;
  double rho = 0.0;
  double tRho = 0.0;  // N^d (1-rho) g0 log|F|
  double g0 = 0.0, g0Tol = 0.0;
  i64 fSize = 0;
  double sizeCenter = 0.0;   // |F|^rho
  double sizeSlack = 0.0;    // |F|^{2 rho / 3}
  double minDistBar = 0.0;   // |F|^{1/(2d)}
  std::vector<UncoveredReplicate> rows;
  double g1Frequency = 0.0;
};
// Runs each replicate to the fixed horizon t(rho) and keeps the sites of F
// that the walk has not visited. The two membership conditions are the size
// window | |F_rho| - |F|^rho | <= |F|^{2 rho/3} and pairwise sup-distance
// >= |F|^{1/(2d)} (vacuous below two sites).
UncoveredSetReport uncovered_pipeline(const MovingMode& mode, const TorusGeometry& geom,
                                      const SiteMask& F, double rho, i64 replicates, double gTol,
                                      u64 seed);

// Cover-time Gumbel statistic for an explicit separated target from a fixed
// start. Requires pairwise sup-separation >= |F|^{1/(2d)} (SeparationViolated
// otherwise); a singleton target is allowed and reduces the statistic to a
// normalized hitting time.
GumbelTestReport separated_subset_gumbel(const MovingMode& mode, const TorusGeometry& geom,
                                         const std::vector<Pt>& F, const Pt& start, i64 replicates,
                                         double gTol, u64 seed);

}  // namespace covertime

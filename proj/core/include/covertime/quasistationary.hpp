#pragma once

#include <array>
#include <vector>

#include "covertime/mode.hpp"
#include "covertime/rng.hpp"
#include "covertime/stats.hpp"
#include "covertime/torus.hpp"

namespace covertime {

// Nested boxes B(x_i, r_k) around each obstacle center with radii
// floor(s^(1 - eps0 / 2^k)) for k = 0..5 (levels A..F); s is the torus side
// for a single center and the minimum pairwise l-infinity separation
// otherwise. The level-2 (C) boxes are the excised set, the larger levels
// are diagnostic scales.
struct ObstacleGeometry {
  TorusGeometry torus;
  std::vector<Pt> centers;  // canonical, distinct
  double epsilon0 = 0.0;
  i32 separation = 0;
  std::array<i32, 6> radii{};  // A..F
};

// Throws ConfigInvalid for bad inputs, DegenerateScale when the floored
// radii stop increasing strictly or the C boxes are not pairwise disjoint
// genuine boxes on the torus. Small sides fail here by design: the scaling
// policy only separates once s is large.
ObstacleGeometry obstacle_geometry(const TorusGeometry& geom, const std::vector<Pt>& centers,
                                   double eps0);

// Union of B(center_i, radius) as a site mask. Desk-scale instances pick the
// box radius directly instead of going through the scaling policy.
SiteMask obstacle_boxes(const TorusGeometry& geom, const std::vector<Pt>& centers, i32 radius);

// Jump-chain transition matrix restricted to the complement of `obstacles`:
// entry (x, y) sums the jump probabilities moving x to y, diagonal forced to
// zero, rows and columns ordered by ascending torus index of the kept sites.
// Symmetric and substochastic; a row loses exactly the mass of jumps landing
// in the obstacle set. Throws ConfigInvalid when the obstacle set is empty
// (the quasistationary law is undefined) or leaves no states, Disconnected
// when the complement splits under the mode's jumps.
struct RestrictedMatrix {
  i64 n = 0;
  std::vector<i64> sites;   // kept torus sites, ascending
  std::vector<i64> rowPtr;  // CSR
  std::vector<i32> col;
  std::vector<double> val;
};
RestrictedMatrix restricted_matrix(const MovingMode& mode, const TorusGeometry& geom,
                                   const SiteMask& obstacles);

// Largest two eigenvalues and the normalized Perron vector sigma of the
// restricted matrix. Power iteration runs on P + I so the shifted spectrum
// is nonnegative (the plain matrix can have eigenvalues near -lambda1 on
// bipartite complements); the second pair deflates by re-orthogonalizing
// against the converged Perron vector every step. residual is the 2-norm
// eigen-residual in P units, at most tol for both pairs.
struct SpectralSummary {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::vector<double> sigma;  // positive, sums to 1, over matrix.sites order
  i64 iterations = 0;
  double residual = 0.0;
};
SpectralSummary perron_pair(const RestrictedMatrix& m, double tol);

// Spectral gap of the torus with a single box B(0, boxRadius) excised, over
// several sides. Needs at least three sides; the fit is log gap against
// log N.
struct GapScalingPoint {
  int N = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double gap = 0.0;
  double minSigma = 0.0;
};
struct GapScalingReport {
  std::vector<GapScalingPoint> points;
  LineFit fit;
};
GapScalingReport gap_scaling(const MovingMode& mode, const std::vector<int>& sides, i32 boxRadius,
                             double tol);

// Times k * N^2 for k = 0..steps, the desk-scale stand-in for the mixing
// horizon of the conditioned walk.
std::vector<double> default_time_grid(const TorusGeometry& geom, int steps);

// Total-variation distance between the continuous-time law conditioned on
// avoiding the obstacles and sigma, maximized over starts, on a time grid.
// Dense spectral evaluation, so the kept state count is capped at
// kMaxDenseStates (CapExceeded). decayRatio is the fitted per-unit-time
// geometric factor of the curve, which should track lambda2 / lambda1:
// conditioning divides the lambda2 mode by the lambda1 one, and with unit
// holding rates exp(lambda2 - lambda1) differs from the eigenvalue ratio
// only at second order in 1 - lambda1.
struct ConvergenceReport {
  std::vector<double> times;
  std::vector<double> tvMax;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambdaRatio = 0.0;  // lambda2 / lambda1
  double decayRatio = 0.0;   // 0 when fewer than two grid points sit in the fit window
};
ConvergenceReport conditional_convergence(const MovingMode& mode, const TorusGeometry& geom,
                                          const SiteMask& obstacles,
                                          const std::vector<double>& tgrid);

// Starts walks from sigma (computed with the C boxes excised) and records the
// entry site into the union of A boxes. The prediction per site is the
// normalized equilibrium measure of B(0, rA) translated to each center and
// divided by the center count. maxRelDev is the largest |empirical/target - 1|
// over sites whose expected hit count reps * target reaches minExpected.
struct EntrySiteStat {
  i64 site = 0;        // torus index inside the A boxes
  double target = 0.0; // predicted entry probability
  i64 hits = 0;
};
struct EntryReport {
  i64 reps = 0;
  double minExpected = 0.0;
  std::vector<EntrySiteStat> table;
  double maxRelDev = 0.0;
  i64 qualifying = 0;
  i64 offTargetHits = 0;  // entries at sites the prediction gives zero mass
};
EntryReport hitting_from_sigma(const MovingMode& mode, const TorusGeometry& geom,
                               const std::vector<Pt>& centers, i32 rA, i32 rC, i64 reps,
                               double minExpected, RngStream& rng);

// Mean entrance time of the union of A boxes from uniform starts against
// N^d over the summed Zd box capacities. Probe starts bracket the spread of
// the per-start means: far sits at the torus point most distant from every
// center, near just outside the C boxes; each probe gets reps / 2 walks.
struct DualityReport {
  i64 reps = 0;
  double capSum = 0.0;  // sum of extrapolated Zd capacities of the A boxes
  double meanH = 0.0;
  double seH = 0.0;
  double ratio = 0.0;  // N^d / (meanH * capSum)
  double farMean = 0.0;
  double nearMean = 0.0;
  double spreadRatio = 0.0;  // farMean / nearMean
};
DualityReport capacity_hitting_duality(const MovingMode& mode, const TorusGeometry& geom,
                                       const std::vector<Pt>& centers, i32 rA, i32 rC, i64 reps,
                                       RngStream& rng);

}  // namespace covertime

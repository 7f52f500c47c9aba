#pragma once

#include <map>
#include <vector>

#include "covertime/green.hpp"
#include "covertime/mode.hpp"
#include "covertime/stats.hpp"
#include "covertime/torus.hpp"

namespace covertime {

// All balls and boxes are dinf balls B(0,R) in Z^d.
std::vector<Pt> zd_ball(int d, i32 r);
std::vector<Pt> zd_sphere(int d, i32 r);

// largest box radius the capacity ladder will solve (one CG solve at this
// size already costs minutes); the first rung must fit twice below it
constexpr i32 kCapacityLadderMaxRadius = 128;

struct EquilibriumResult {
  std::vector<Pt> K;             // deduplicated, sorted
  i32 boxRadius = 0;             // radius of the enclosing box A
  std::map<Pt, double> measure;  // mass per site of K (zeros kept)
  double capacity = 0.0;
  double errorBound = 0.0;       // coarse solver-level bound
  int cgIterations = 0;
  double residual = 0.0;         // final relative residual
};

// Escape system h(y) = P_y[T_A < H_K] solved on A\K by conjugate gradients
// (the restricted operator I - P is symmetric positive definite, unit
// diagonal), residual <= 1e-10 relative; then the relative equilibrium
// measure e(x) = sum over one jump from x in K of the kappa/2-weighted
// escape values, with h = 1 outside A and 0 on K. Capacity by summation.
EquilibriumResult equilibrium(const MovingMode& mode, const std::vector<Pt>& K, i32 R);

struct CapacityLadderStep {
  i32 R = 0;
  double capacity = 0.0;
};

struct CapacityEstimate {
  EquilibriumResult last;  // equilibrium in the largest box used
  std::vector<CapacityLadderStep> ladder;
  double capacity = 0.0;      // last-rung capacity (upper value, ladder decreasing)
  double error = 0.0;         // extrapolated remaining decrease plus slack
  double extrapolated = 0.0;  // 1/R-model limit of the last two rungs
};

// Runs equilibrium over boxes B(0, r0 * 2^j) and accepts once successive
// capacities differ by <= tol. The relative measures dominate the absolute one
// and the ladder is monotone decreasing, so the last rung is an upper value;
// `extrapolated` removes the leading 1/R bias from the last two rungs and
// `error` covers the modeled remaining decrease plus the last increment.
CapacityEstimate capacity_extrapolated(const MovingMode& mode, const std::vector<Pt>& K, double tol);

struct HitScalingPoint {
  i32 r1 = 0, r2 = 0;
  i64 reps = 0;
  double pInf = 0.0, seInf = 0.0;          // hit B(0,r1) ever, from |x|inf = r2+1
  double pHorizon = 0.0, seHorizon = 0.0;  // hit within the time horizon
  double pEscape = 0.0, seEscape = 0.0;    // exit B(0,r2) before hitting B(0,r1), from |x|inf = r1+1
};

struct HitScalingReport {
  i32 r1 = 0;
  double horizon = -1.0;  // <= 0: horizon variant not run
  double capBall = 0.0;   // capacity of B(0,r1) used for truncation completion
  std::vector<HitScalingPoint> points;
  LineFit fitInf;      // log p vs log(r1/r2); slope ~ d-2
  LineFit fitHorizon;  // same for the horizon variant (slope left 0 when not run)
  LineFit fitEscape;   // log p vs log(r2-r1); slope ~ -1
};

// Monte Carlo estimates of the three hitting/escape probabilities from
// uniformly sampled boundary starts, with the open-horizon variant completed
// past the truncation sphere by cap(B(0,r1)) * far-field. Requires r1 >= 1 and
// every r2 > r1 so the escape starts at |x|inf = r1+1 lie inside B(0,r2).
HitScalingReport hit_probability_scaling(const MovingMode& mode, i32 r1, std::vector<i32> r2s,
                                         i64 reps, u64 seed, double horizon = -1.0);

}  // namespace covertime

#pragma once

#include <vector>

#include "covertime/capacity.hpp"
#include "covertime/green.hpp"
#include "covertime/mode.hpp"
#include "covertime/rng.hpp"
#include "covertime/walk.hpp"

namespace covertime {

struct InterlacementSample {
  std::vector<Pt> K;  // window sites, sorted
  double u = 0.0;
  i64 trajectoryCount = 0;
  std::vector<Pt> trace;        // distinct visited sites, sorted
  std::vector<double> labels;   // ascending, one per trajectory
  std::vector<std::vector<Pt>> trajectorySites;  // aligned with labels
};

// Samples the interlacement trace inside a finite window: trajectory count
// Poisson(u * cap(K)), starts from the normalized equilibrium measure, each
// trajectory walked until it leaves B(center, R_esc) where R_esc is sized so
// the probability of a dropped return to K is at most kReturnBias. Windows
// are centered internally, so translated windows yield translated samples
// from the same stream. Construction solves the capacity ladder once; sample
// draws are cheap by comparison.
class InterlacementSampler {
 public:
  static constexpr double kReturnBias = 1e-3;

  InterlacementSampler(const MovingMode& mode, const std::vector<Pt>& K);

  InterlacementSample sample(double u, RngStream& rng) const;

  double capacity() const { return capacity_; }
  i32 escapeRadius() const { return rEsc_; }
  const std::vector<Pt>& window() const { return k_; }
  double startMass(const Pt& site) const;  // normalized start probability

 private:
  MovingMode mode_;
  ZdWalker walker_;
  std::vector<Pt> k_;   // sorted window, caller coordinates
  std::vector<Pt> kc_;  // centered copy, aligned with k_
  Pt shift_{};          // caller = centered + shift
  std::vector<double> startProb_;
  AliasTable startAlias_;
  ZdWindow win_;
  double capacity_ = 0.0;
  i32 rEsc_ = 0;
  i64 budget_ = 0;
};

// one-shot convenience wrapper
InterlacementSample sample_window(const MovingMode& mode, const std::vector<Pt>& K, double u,
                                  RngStream& rng);

// Restriction to the trajectories with label <= v: the thinned process is an
// exact sample at the lower level, and its trace is a subset by construction.
InterlacementSample nested_levels(const InterlacementSample& sample, double v);

struct TwoPointSum {
  double lhs = 0.0;   // sum over v in K of exp(-2u/(g(0)+g(v)))
  double base = 0.0;  // |K| * exp(-2u/g(0))
  double ratio = 0.0;
};

// Exact two-point vacancy sum over the window from tabulated potentials; the
// table must hold the origin and every site of K.
TwoPointSum two_point_sum(const PotentialTable& table, const std::vector<Pt>& K, double u);

}  // namespace covertime

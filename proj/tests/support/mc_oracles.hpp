#pragma once

#include "covertime/green.hpp"
#include "covertime/mode.hpp"
#include "covertime/rng.hpp"
#include "covertime/torus.hpp"

namespace covertime::testsupport {

struct McEstimate {
  double value = 0.0;
  double se = 0.0;
};

// Mean number of jump-chain visits to x for a walk started at 0, truncated at
// the first exit from B(0,R) under dinf and corrected by the far-field
// potential at the exit point. Deliberately a bare lattice loop, independent
// of the torus walker, so it can serve as an oracle for the quadrature.
McEstimate green_visits(const MovingMode& mode, const Pt& x, i32 R, i64 reps, u64 seed);

// P_start[H_target < infinity]: truncated at exit from B(0,R), unfinished
// trajectories continued analytically via g(exit - target)/gZero.
McEstimate hit_probability(const MovingMode& mode, const Pt& start, const Pt& target, i32 R,
                           i64 reps, u64 seed, double gZero);

}  // namespace covertime::testsupport

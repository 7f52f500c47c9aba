#pragma once

#include <vector>

#include "covertime/mode.hpp"
#include "covertime/torus.hpp"

namespace covertime {

// Dense reference solvers for small instances. These share no code with the
// samplers: everything here is exact linear algebra on the jump-chain
// transition matrix, used to pin expected values in tests.

inline constexpr i64 kMaxDenseStates = 2048;

// Row-major transition matrix of the jump chain restricted to `keep`
// (transitions leaving `keep` are dropped, so rows sum to <= 1).
std::vector<double> restricted_matrix(const MovingMode& mode, const TorusGeometry& geom,
                                      const std::vector<i64>& keep);

// Solve a x = b with partial pivoting; a is n x n row-major, consumed.
std::vector<double> lu_solve(std::vector<double> a, std::vector<double> b, int n);

// Expected jump count to enter `absorbing` from every site (0 on the set
// itself). Also the expected continuous time, since holding times have mean 1.
// Throws NotAbsorbing when some site cannot reach the set, CapExceeded when
// the complement is larger than kMaxDenseStates.
std::vector<double> expected_entry_jumps(const MovingMode& mode, const TorusGeometry& geom,
                                         const SiteMask& absorbing);

// Expected jump count to visit every torus site at least once, starting from
// `start`. Exact, by block elimination over visited sets in decreasing
// popcount order; needs volume <= 20.
double expected_cover_jumps(const MovingMode& mode, const TorusGeometry& geom, const Pt& start);

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Eigenvalues are sorted in decreasing order; vectors[i * n + j] is the j-th
// component of the i-th eigenvector.
struct SpectralDecomposition {
  int n = 0;
  std::vector<double> values;
  std::vector<double> vectors;
};
SpectralDecomposition eigen_symmetric(std::vector<double> a, int n);

// Law of the walk at continuous time t conditioned on staying in `keep`,
// started from keep[start_pos], via the spectral form of exp(t (Q - I)).
std::vector<double> conditional_law_dense(const MovingMode& mode, const TorusGeometry& geom,
                                          const std::vector<i64>& keep, int start_pos, double t);

// Same conditioning after a fixed number of jumps (no clock); exposes the
// parity oscillation that the continuous-time law smooths out.
std::vector<double> conditional_law_discrete(const MovingMode& mode, const TorusGeometry& geom,
                                             const std::vector<i64>& keep, int start_pos, i64 steps);

}  // namespace covertime

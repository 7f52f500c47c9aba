#pragma once

#include <string>
#include <vector>

#include "covertime/common.hpp"

namespace covertime {

// Finite symmetric moving mode on Z^d: generating vectors V (each with its
// first nonzero component positive, no repeats, generating all of Z^d) and
// rates kappa(v) > 0 normalized to sum 1. The jump chain moves by +v or -v
// with probability kappa(v)/2; holding times are Exp(1).
struct MovingMode {
  int d = 0;
  std::vector<std::vector<i32>> vectors;  // size l, each of length d
  std::vector<double> weights;            // kappa, sum 1
  std::string name;

  // derived, filled by validate_mode
  std::vector<std::vector<i32>> jumps;  // 2l signed moves: +v_0, -v_0, +v_1, ...
  std::vector<double> jump_prob;        // kappa/2 per signed move
  i32 max_abs_coord = 0;                // max |v_i| over vectors and coordinates

  int l() const { return int(vectors.size()); }
  // covariance per unit time: Sigma = sum_v kappa(v) v v^T, row-major d x d
  std::vector<double> covariance() const;
  u64 hash() const;
};

// Checks orientation, weights, and that V generates Z^d (lattice index 1 via
// Hermite normal form). Throws BadOrientation / BadWeights / NotGenerating.
MovingMode validate_mode(int d, std::vector<std::vector<i32>> vectors, std::vector<double> weights,
                         std::string name = "");

// "srw3": V={e1,e2,e3}, kappa=1/3; "diag4": V={e1,e2,e3,e1+e2+e3}, kappa=1/4.
MovingMode builtin_mode(const std::string& name);

// Flat key-value mode file: "d = 3", repeated "vector = 1,0,0" lines, and
// either repeated "weight = ..." lines (paired in order) or "weights = uniform".
// Optional "N = ..." is exposed via *N_out if present. Parse errors carry
// 1-based line numbers.
MovingMode parse_mode_file(const std::string& path, int* N_out = nullptr);

// Accepts a builtin name or a path to a mode file.
MovingMode resolve_mode(const std::string& name_or_path, int* N_out = nullptr);

}  // namespace covertime

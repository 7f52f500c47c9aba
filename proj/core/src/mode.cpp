#include "covertime/mode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace covertime {

namespace {

// Lattice index of the subgroup of Z^d generated by the columns, via integer
// column reduction to Hermite form. Returns 0 if rank < d.
i64 lattice_index(int d, const std::vector<std::vector<i32>>& vecs) {
  const int m = int(vecs.size());
  std::vector<std::vector<i64>> a(d, std::vector<i64>(m));
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < d; ++i) a[i][j] = vecs[j][i];

  int col = 0;
  for (int row = 0; row < d && col < m; ++row) {
    // eliminate across columns col..m-1 with gcd steps until one nonzero pivot remains in this row
    while (true) {
      int nz = -1, cnt = 0;
      for (int j = col; j < m; ++j)
        if (a[row][j] != 0) {
          ++cnt;
          if (nz < 0 || std::llabs(a[row][j]) < std::llabs(a[row][nz])) nz = j;
        }
      if (cnt == 0) return 0;  // rank deficient
      if (cnt == 1) {
        std::swap(a[row][col], a[row][nz]);
        for (int i = 0; i < d; ++i)
          if (i != row) std::swap(a[i][col], a[i][nz]);
        break;
      }
      for (int j = col; j < m; ++j) {
        if (j == nz || a[row][j] == 0) continue;
        const i64 q = a[row][j] / a[row][nz];
        for (int i = 0; i < d; ++i) a[i][j] -= q * a[i][nz];
      }
    }
    ++col;
  }
  if (col < d) return 0;
  i64 det = 1;
  for (int i = 0; i < d; ++i) det *= a[i][i];
  return std::llabs(det);
}

std::string vec_str(const std::vector<i32>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s + ")";
}

}  // namespace

std::vector<double> MovingMode::covariance() const {
  std::vector<double> sigma(std::size_t(d) * d, 0.0);
  for (int k = 0; k < l(); ++k)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) sigma[std::size_t(i) * d + j] += weights[k] * double(vectors[k][i]) * double(vectors[k][j]);
  return sigma;
}

u64 MovingMode::hash() const {
  u64 h = fnv1a(&d, sizeof d);
  for (int k = 0; k < l(); ++k) {
    h = fnv1a(vectors[k].data(), vectors[k].size() * sizeof(i32), h);
    h = fnv1a(&weights[k], sizeof(double), h);
  }
  return h;
}

MovingMode validate_mode(int d, std::vector<std::vector<i32>> vectors, std::vector<double> weights,
                         std::string name) {
  if (d < 3) fail(Errc::BadOrientation, "dimension must be >= 3, got " + std::to_string(d));
  if (vectors.empty()) fail(Errc::NotGenerating, "empty generating set");
  if (vectors.size() != weights.size())
    fail(Errc::BadWeights, "need one weight per vector: " + std::to_string(vectors.size()) + " vectors, " +
                               std::to_string(weights.size()) + " weights");

  std::set<std::vector<i32>> seen;
  for (const auto& v : vectors) {
    if (int(v.size()) != d) fail(Errc::BadOrientation, "vector " + vec_str(v) + " has wrong dimension");
    int first_nz = 0;
    for (int i = 0; i < d; ++i)
      if (v[i] != 0) {
        first_nz = v[i];
        break;
      }
    if (first_nz == 0) fail(Errc::BadOrientation, "zero vector is not a valid move");
    if (first_nz < 0)
      fail(Errc::BadOrientation, "vector " + vec_str(v) + " must have positive first nonzero component");
    if (!seen.insert(v).second) fail(Errc::BadOrientation, "duplicate vector " + vec_str(v));
  }

  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w <= 0.0) fail(Errc::BadWeights, "weights must be positive and finite");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-9) fail(Errc::BadWeights, "weights must sum to 1, got " + std::to_string(sum));

  const i64 index = lattice_index(d, vectors);
  if (index != 1)
    fail(Errc::NotGenerating, "vectors generate a sublattice of index " +
                                  (index == 0 ? std::string("infinity (rank deficient)") : std::to_string(index)));

  MovingMode m;
  m.d = d;
  m.vectors = std::move(vectors);
  m.weights = std::move(weights);
  m.name = std::move(name);
  m.jumps.reserve(2 * m.vectors.size());
  m.jump_prob.reserve(2 * m.vectors.size());
  for (std::size_t k = 0; k < m.vectors.size(); ++k) {
    m.jumps.push_back(m.vectors[k]);
    std::vector<i32> neg(m.vectors[k].size());
    for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -m.vectors[k][i];
    m.jumps.push_back(std::move(neg));
    m.jump_prob.push_back(m.weights[k] / 2.0);
    m.jump_prob.push_back(m.weights[k] / 2.0);
    for (i32 c : m.vectors[k]) m.max_abs_coord = std::max(m.max_abs_coord, std::abs(c));
  }
  return m;
}

MovingMode builtin_mode(const std::string& name) {
  if (name == "srw3") {
    return validate_mode(3, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, "srw3");
  }
  if (name == "diag4") {
    return validate_mode(3, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}}, {0.25, 0.25, 0.25, 0.25}, "diag4");
  }
  fail(Errc::ConfigInvalid, "unknown builtin mode '" + name + "' (have: srw3, diag4)");
}

namespace {

std::vector<i32> parse_int_list(const std::string& s, int lineno) {
  std::vector<i32> out;
  std::string tok;
  std::stringstream ss(s);
  while (std::getline(ss, tok, ',')) {
    std::size_t pos = 0;
    int value = 0;
    try {
      value = std::stoi(tok, &pos);
    } catch (...) {
      fail(Errc::ConfigInvalid, "line " + std::to_string(lineno) + ": bad integer '" + tok + "'");
    }
    while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
    if (pos != tok.size())
      fail(Errc::ConfigInvalid, "line " + std::to_string(lineno) + ": trailing junk in '" + tok + "'");
    out.push_back(value);
  }
  if (out.empty()) fail(Errc::ConfigInvalid, "line " + std::to_string(lineno) + ": empty vector");
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

MovingMode parse_mode_file(const std::string& path, int* N_out) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open mode file '" + path + "'");
  int d = -1, N = -1;
  bool uniform_weights = false;
  std::vector<std::vector<i32>> vectors;
  std::vector<double> weights;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(Errc::ConfigInvalid, "line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "d") {
      d = std::atoi(value.c_str());
      if (d <= 0) fail(Errc::ConfigInvalid, "line " + std::to_string(lineno) + ": bad dimension '" + value + "'");
    } else if (key == "N") {
      N = std::atoi(value.c_str());
      if (N <= 1) fail(Errc::ConfigInvalid, "line " + std::to_string(lineno) + ": bad torus side '" + value + "'");
    } else if (key == "vector") {
      vectors.push_back(parse_int_list(value, lineno));
    } else if (key == "weight") {
      char* end = nullptr;
      const double w = std::strtod(value.c_str(), &end);
      if (end == value.c_str() || *end != '\0')
        fail(Errc::ConfigInvalid, "line " + std::to_string(lineno) + ": bad weight '" + value + "'");
      weights.push_back(w);
    } else if (key == "weights") {
      if (value != "uniform")
        fail(Errc::ConfigInvalid, "line " + std::to_string(lineno) + ": weights supports only 'uniform'");
      uniform_weights = true;
    } else {
      fail(Errc::ConfigInvalid, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (d < 0) fail(Errc::ConfigInvalid, "mode file '" + path + "' missing 'd'");
  if (vectors.empty()) fail(Errc::ConfigInvalid, "mode file '" + path + "' has no vectors");
  if (uniform_weights) {
    if (!weights.empty()) fail(Errc::ConfigInvalid, "mode file mixes 'weights = uniform' with explicit weights");
    weights.assign(vectors.size(), 1.0 / double(vectors.size()));
  }
  if (N_out) *N_out = N;
  return validate_mode(d, std::move(vectors), std::move(weights), path);
}

MovingMode resolve_mode(const std::string& name_or_path, int* N_out) {
  if (name_or_path == "srw3" || name_or_path == "diag4") {
    if (N_out) *N_out = -1;
    return builtin_mode(name_or_path);
  }
  return parse_mode_file(name_or_path, N_out);
}

}  // namespace covertime

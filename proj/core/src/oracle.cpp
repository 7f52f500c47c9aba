#include "covertime/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace covertime {

std::vector<double> restricted_matrix(const MovingMode& mode, const TorusGeometry& geom,
                                      const std::vector<i64>& keep) {
  const int n = int(keep.size());
  if (n == 0) fail(Errc::ConfigInvalid, "empty state set");
  if (i64(n) > kMaxDenseStates) fail(Errc::CapExceeded, "dense matrix over " + std::to_string(n) + " states");
  std::vector<i64> pos(std::size_t(geom.volume), -1);
  for (int i = 0; i < n; ++i) {
    if (pos[std::size_t(keep[std::size_t(i)])] != -1) fail(Errc::ConfigInvalid, "duplicate state");
    pos[std::size_t(keep[std::size_t(i)])] = i;
  }
  std::vector<double> a(std::size_t(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    const Pt p = geom.point(keep[std::size_t(i)]);
    for (std::size_t k = 0; k < mode.jumps.size(); ++k) {
      Pt q = p;
      for (int c = 0; c < geom.d; ++c) q[std::size_t(c)] += mode.jumps[k][std::size_t(c)];
      const i64 j = pos[std::size_t(geom.index(q))];
      if (j >= 0) a[std::size_t(i) * n + j] += mode.jump_prob[k];
    }
  }
  return a;
}

std::vector<double> lu_solve(std::vector<double> a, std::vector<double> b, int n) {
  if (int(b.size()) != n) fail(Errc::SolveFailed, "rhs size mismatch");
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a[std::size_t(r) * n + col]) > std::fabs(a[std::size_t(piv) * n + col])) piv = r;
    if (std::fabs(a[std::size_t(piv) * n + col]) < 1e-14)
      fail(Errc::SolveFailed, "singular linear system at column " + std::to_string(col));
    if (piv != col) {
      for (int c = col; c < n; ++c) std::swap(a[std::size_t(piv) * n + c], a[std::size_t(col) * n + c]);
      std::swap(b[std::size_t(piv)], b[std::size_t(col)]);
    }
    const double inv = 1.0 / a[std::size_t(col) * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double f = a[std::size_t(r) * n + col] * inv;
      if (f == 0.0) continue;
      a[std::size_t(r) * n + col] = 0.0;
      for (int c = col + 1; c < n; ++c) a[std::size_t(r) * n + c] -= f * a[std::size_t(col) * n + c];
      b[std::size_t(r)] -= f * b[std::size_t(col)];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[std::size_t(r)];
    for (int c = r + 1; c < n; ++c) s -= a[std::size_t(r) * n + c] * b[std::size_t(c)];
    b[std::size_t(r)] = s / a[std::size_t(r) * n + r];
  }
  return b;
}

std::vector<double> expected_entry_jumps(const MovingMode& mode, const TorusGeometry& geom,
                                         const SiteMask& absorbing) {
  if (absorbing.count == 0) fail(Errc::NotAbsorbing, "empty absorbing set");
  std::vector<i64> keep;
  keep.reserve(std::size_t(geom.volume - absorbing.count));
  for (i64 s = 0; s < geom.volume; ++s)
    if (!absorbing.test(s)) keep.push_back(s);

  std::vector<double> out(std::size_t(geom.volume), 0.0);
  if (keep.empty()) return out;
  if (i64(keep.size()) > kMaxDenseStates)
    fail(Errc::CapExceeded, "complement has " + std::to_string(keep.size()) + " states");

  // reachability of the absorbing set (jumps are symmetric, so search forward)
  {
    std::vector<char> reach(std::size_t(geom.volume), 0);
    std::vector<i64> stack;
    for (i64 s = 0; s < geom.volume; ++s)
      if (absorbing.test(s)) {
        reach[std::size_t(s)] = 1;
        stack.push_back(s);
      }
    while (!stack.empty()) {
      const i64 s = stack.back();
      stack.pop_back();
      const Pt p = geom.point(s);
      for (const auto& j : mode.jumps) {
        Pt q = p;
        for (int c = 0; c < geom.d; ++c) q[std::size_t(c)] += j[std::size_t(c)];
        const i64 t = geom.index(q);
        if (!reach[std::size_t(t)]) {
          reach[std::size_t(t)] = 1;
          stack.push_back(t);
        }
      }
    }
    for (i64 s : keep)
      if (!reach[std::size_t(s)])
        fail(Errc::NotAbsorbing, "site " + std::to_string(s) + " cannot reach the absorbing set");
  }

  const int n = int(keep.size());
  std::vector<double> a = restricted_matrix(mode, geom, keep);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[std::size_t(i) * n + j] = (i == j ? 1.0 : 0.0) - a[std::size_t(i) * n + j];
  const std::vector<double> sol = lu_solve(std::move(a), std::vector<double>(std::size_t(n), 1.0), n);
  for (int i = 0; i < n; ++i) out[std::size_t(keep[std::size_t(i)])] = sol[std::size_t(i)];
  return out;
}

double expected_cover_jumps(const MovingMode& mode, const TorusGeometry& geom, const Pt& start) {
  const int vol = int(geom.volume);
  if (vol > 20) fail(Errc::CapExceeded, "cover oracle needs volume <= 20, got " + std::to_string(vol));

  // neighbor table with probabilities
  const int nj = int(mode.jumps.size());
  std::vector<int> nbr(std::size_t(vol) * nj);
  for (int s = 0; s < vol; ++s) {
    const Pt p = geom.point(s);
    for (int k = 0; k < nj; ++k) {
      Pt q = p;
      for (int c = 0; c < geom.d; ++c) q[std::size_t(c)] += mode.jumps[std::size_t(k)][std::size_t(c)];
      nbr[std::size_t(s) * nj + k] = int(geom.index(q));
    }
  }

  const u32 full = (vol == 32) ? 0xffffffffu : ((u32(1) << vol) - 1);
  const std::size_t nsets = std::size_t(1) << vol;
  // E[(x, S)] indexed S * vol + x; states with x not in S never arise
  std::vector<double> E(nsets * std::size_t(vol), 0.0);

  std::vector<u32> by_pop(nsets);
  std::iota(by_pop.begin(), by_pop.end(), 0u);
  std::sort(by_pop.begin(), by_pop.end(),
            [](u32 a, u32 b) { return __builtin_popcount(a) > __builtin_popcount(b); });

  std::vector<int> members(static_cast<std::size_t>(vol));
  std::vector<double> a, b;
  for (u32 S : by_pop) {
    if (S == full) continue;
    int m = 0;
    for (int x = 0; x < vol; ++x)
      if (S >> x & 1) members[std::size_t(m++)] = x;
    if (m == 0) continue;
    a.assign(std::size_t(m) * m, 0.0);
    b.assign(std::size_t(m), 1.0);
    for (int i = 0; i < m; ++i) {
      const int x = members[std::size_t(i)];
      a[std::size_t(i) * m + i] = 1.0;
      for (int k = 0; k < nj; ++k) {
        const int y = nbr[std::size_t(x) * nj + k];
        const double p = mode.jump_prob[std::size_t(k)];
        if (S >> y & 1) {
          const int j = int(std::lower_bound(members.begin(), members.begin() + m, y) - members.begin());
          a[std::size_t(i) * m + j] -= p;
        } else {
          b[std::size_t(i)] += p * E[(std::size_t(S) | (std::size_t(1) << y)) * std::size_t(vol) + std::size_t(y)];
        }
      }
    }
    const std::vector<double> sol = lu_solve(std::move(a), std::move(b), m);
    for (int i = 0; i < m; ++i) E[std::size_t(S) * std::size_t(vol) + std::size_t(members[std::size_t(i)])] = sol[std::size_t(i)];
  }

  const int s0 = int(geom.index(start));
  return E[(std::size_t(1) << s0) * std::size_t(vol) + std::size_t(s0)];
}

SpectralDecomposition eigen_symmetric(std::vector<double> a, int n) {
  if (i64(n) > kMaxDenseStates) fail(Errc::CapExceeded, "eigensolver over " + std::to_string(n) + " states");
  SpectralDecomposition out;
  out.n = n;
  out.vectors.assign(std::size_t(n) * n, 0.0);
  for (int i = 0; i < n; ++i) out.vectors[std::size_t(i) * n + i] = 1.0;

  auto A = [&](int i, int j) -> double& { return a[std::size_t(i) * n + j]; };
  auto V = [&](int i, int j) -> double& { return out.vectors[std::size_t(i) * n + j]; };

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += A(i, j) * A(i, j);
    if (off < 1e-24 * n * n) break;
    if (sweep == 99) fail(Errc::NoConvergence, "jacobi sweeps exhausted");
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (std::fabs(apq) < 1e-18) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = V(p, k), vkq = V(q, k);
          V(p, k) = c * vkp - s * vkq;
          V(q, k) = s * vkp + c * vkq;
        }
      }
  }

  out.values.resize(std::size_t(n));
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i < n; ++i) out.values[std::size_t(i)] = a[std::size_t(i) * n + i];
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return out.values[std::size_t(x)] > out.values[std::size_t(y)]; });
  SpectralDecomposition sorted;
  sorted.n = n;
  sorted.values.resize(std::size_t(n));
  sorted.vectors.resize(std::size_t(n) * n);
  for (int i = 0; i < n; ++i) {
    sorted.values[std::size_t(i)] = out.values[std::size_t(order[std::size_t(i)])];
    for (int j = 0; j < n; ++j)
      sorted.vectors[std::size_t(i) * n + j] = out.vectors[std::size_t(order[std::size_t(i)]) * n + j];
  }
  return sorted;
}

namespace {

std::vector<double> normalize_l1(std::vector<double> v) {
  double s = 0.0;
  for (double& x : v) {
    if (x < 0.0 && x > -1e-13) x = 0.0;  // clip eigen-roundoff
    s += x;
  }
  if (s <= 0.0) fail(Errc::SolveFailed, "conditional mass vanished");
  for (double& x : v) x /= s;
  return v;
}

}  // namespace

std::vector<double> conditional_law_dense(const MovingMode& mode, const TorusGeometry& geom,
                                          const std::vector<i64>& keep, int start_pos, double t) {
  const int n = int(keep.size());
  if (start_pos < 0 || start_pos >= n) fail(Errc::ConfigInvalid, "start outside the kept set");
  const SpectralDecomposition eig = eigen_symmetric(restricted_matrix(mode, geom, keep), n);
  // row of exp(t(Q - I)): sum_k e^{t(lambda_k - 1)} phi_k(start) phi_k(.)
  std::vector<double> law(std::size_t(n), 0.0);
  for (int k = 0; k < n; ++k) {
    const double w = std::exp(t * (eig.values[std::size_t(k)] - 1.0)) *
                     eig.vectors[std::size_t(k) * n + start_pos];
    if (w == 0.0) continue;
    for (int j = 0; j < n; ++j) law[std::size_t(j)] += w * eig.vectors[std::size_t(k) * n + j];
  }
  return normalize_l1(std::move(law));
}

std::vector<double> conditional_law_discrete(const MovingMode& mode, const TorusGeometry& geom,
                                             const std::vector<i64>& keep, int start_pos, i64 steps) {
  const int n = int(keep.size());
  if (start_pos < 0 || start_pos >= n) fail(Errc::ConfigInvalid, "start outside the kept set");
  const std::vector<double> Q = restricted_matrix(mode, geom, keep);
  std::vector<double> law(std::size_t(n), 0.0), next(std::size_t(n), 0.0);
  law[std::size_t(start_pos)] = 1.0;
  for (i64 s = 0; s < steps; ++s) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      const double w = law[std::size_t(i)];
      if (w == 0.0) continue;
      const double* row = Q.data() + std::size_t(i) * n;
      for (int j = 0; j < n; ++j) next[std::size_t(j)] += w * row[j];
    }
    law.swap(next);
  }
  return normalize_l1(std::move(law));
}

}  // namespace covertime

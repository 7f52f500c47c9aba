#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "covertime/common.hpp"
#include "covertime/mode.hpp"
#include "covertime/rng.hpp"

namespace covertime {

inline constexpr int kMaxDim = 8;
using Pt = std::array<i32, kMaxDim>;  // first d entries active

inline Pt make_pt(std::initializer_list<i32> cs) {
  Pt p{};
  int i = 0;
  for (i32 c : cs) p[std::size_t(i++)] = c;
  return p;
}

// Discrete torus (Z/NZ)^d with row-major site indexing.
struct TorusGeometry {
  int d = 0;
  int N = 0;
  i64 volume = 0;

  TorusGeometry() = default;
  TorusGeometry(int d_, int N_) : d(d_), N(N_) {
    if (d_ < 1 || d_ > kMaxDim) fail(Errc::ConfigInvalid, "dimension out of range");
    if (N_ < 2) fail(Errc::ConfigInvalid, "torus side must be >= 2");
    volume = 1;
    for (int i = 0; i < d; ++i) {
      if (volume > (i64(1) << 40) / N) fail(Errc::ConfigInvalid, "torus too large");
      volume *= N;
    }
  }

  i32 wrap(i64 c) const {
    i64 r = c % N;
    if (r < 0) r += N;
    return i32(r);
  }

  Pt canonical(const Pt& p) const {
    Pt q{};
    for (int i = 0; i < d; ++i) q[std::size_t(i)] = wrap(p[std::size_t(i)]);
    return q;
  }

  i64 index(const Pt& p) const {
    i64 idx = 0;
    for (int i = 0; i < d; ++i) idx = idx * N + wrap(p[std::size_t(i)]);
    return idx;
  }

  Pt point(i64 idx) const {
    Pt p{};
    for (int i = d - 1; i >= 0; --i) {
      p[std::size_t(i)] = i32(idx % N);
      idx /= N;
    }
    return p;
  }

  // l-infinity distance on the torus
  i32 dinf(const Pt& a, const Pt& b) const {
    i32 best = 0;
    for (int i = 0; i < d; ++i) {
      i32 diff = std::abs(wrap(a[std::size_t(i)]) - wrap(b[std::size_t(i)]));
      diff = std::min(diff, N - diff);
      best = std::max(best, diff);
    }
    return best;
  }

  i64 uniform_site(RngStream& rng) const { return i64(rng.uniform_below(u64(volume))); }

  // default simulation budget: 1e4 * N^d * (1 + log N^d) jumps
  i64 default_step_budget() const {
    const double v = double(volume);
    const double b = 1e4 * v * (1.0 + std::log(v));
    return b > 9e18 ? i64(9e18) : i64(b);
  }
};

// Dense bit mask over torus sites.
struct SiteMask {
  i64 volume = 0;
  i64 count = 0;
  std::vector<u64> bits;

  SiteMask() = default;
  explicit SiteMask(i64 vol) : volume(vol), bits(std::size_t((vol + 63) / 64), 0) {}

  bool test(i64 idx) const { return (bits[std::size_t(idx >> 6)] >> (idx & 63)) & 1u; }
  void set(i64 idx) {
    u64& w = bits[std::size_t(idx >> 6)];
    const u64 m = u64(1) << (idx & 63);
    if (!(w & m)) {
      w |= m;
      ++count;
    }
  }
  std::vector<i64> sites() const {
    std::vector<i64> out;
    out.reserve(std::size_t(count));
    for (i64 i = 0; i < volume; ++i)
      if (test(i)) out.push_back(i);
    return out;
  }
};

inline SiteMask mask_from_sites(const TorusGeometry& g, const std::vector<i64>& sites) {
  SiteMask m(g.volume);
  for (i64 s : sites) m.set(s);
  return m;
}

// All torus sites within l-infinity distance r of center (cubic box).
std::vector<i64> box_sites(const TorusGeometry& g, const Pt& center, i32 r);

}  // namespace covertime

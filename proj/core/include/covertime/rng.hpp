#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "covertime/common.hpp"

namespace covertime {

// Philox4x32-10 counter-based generator. Streams are cheap: a stream is
// (key = master seed, counter high words = stream id, counter low words =
// running block index), so any (seed, purpose, replicate) triple addresses an
// independent sequence without shared state. Results are identical for any
// thread count as long as work is partitioned by replicate index.
struct Philox4x32 {
  static std::array<u32, 4> block(const std::array<u32, 4>& ctr, std::array<u32, 2> key) {
    std::array<u32, 4> x = ctr;
    for (int round = 0; round < 10; ++round) {
      const u64 p0 = u64(0xD2511F53u) * x[0];
      const u64 p1 = u64(0xCD9E8D57u) * x[2];
      const u32 hi0 = u32(p0 >> 32), lo0 = u32(p0);
      const u32 hi1 = u32(p1 >> 32), lo1 = u32(p1);
      x = {hi1 ^ x[1] ^ key[0], lo1, hi0 ^ x[3] ^ key[1], lo0};
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    return x;
  }
};

enum class StreamPurpose : u64 {
  Walk = 1,
  Clock = 2,
  Start = 3,
  Interlace = 4,
  OracleMc = 5,
  GreenMc = 6,
  Audit = 7,
  Entry = 8,
  Scaling = 9,
  Cover = 10,
  Thinning = 11,
};

class RngStream {
 public:
  RngStream(u64 seed, u64 stream_id) : key_{u32(seed), u32(seed >> 32)}, stream_(stream_id) {}

  u32 next_u32() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  u64 next_u64() {
    const u64 lo = next_u32();
    const u64 hi = next_u32();
    return (hi << 32) | lo;
  }

  // [0,1), 53-bit resolution
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // exact uniform on {0,...,n-1} (Lemire with rejection)
  u64 uniform_below(u64 n) {
    while (true) {
      const u64 x = next_u64();
      const unsigned __int128 m = (unsigned __int128)x * n;
      const u64 lo = (u64)m;
      if (lo >= n) return (u64)(m >> 64);
      const u64 threshold = (0 - n) % n;
      if (lo >= threshold) return (u64)(m >> 64);
    }
  }

  double exponential() {
    double u;
    do {
      u = next_double();
    } while (u <= 0.0);
    return -std::log(u);
  }

  double normal();
  // shape >= 1 (Marsaglia-Tsang); shape == 0 returns 0
  double gamma(double shape);
  i64 poisson(double lambda);

 private:
  void refill() {
    const std::array<u32, 4> ctr = {u32(block_), u32(block_ >> 32), u32(stream_), u32(stream_ >> 32)};
    buf_ = Philox4x32::block(ctr, key_);
    ++block_;
    pos_ = 0;
  }

  std::array<u32, 2> key_;
  u64 stream_;
  u64 block_ = 0;
  std::array<u32, 4> buf_{};
  int pos_ = 4;
  bool have_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

inline RngStream make_stream(u64 seed, StreamPurpose purpose, u64 replicate) {
  return RngStream(seed, (u64(purpose) << 48) | (replicate & 0xFFFFFFFFFFFFull));
}

// Walker alias table for O(1) sampling from a fixed finite distribution.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(const std::vector<double>& weights);

  int pick(RngStream& rng) const {
    const double s = rng.next_double() * double(n_);
    int k = int(s);
    if (k >= n_) k = n_ - 1;
    const double f = s - double(k);
    return f < prob_[k] ? k : alias_[k];
  }

  int size() const { return n_; }

 private:
  int n_ = 0;
  std::vector<double> prob_;
  std::vector<int> alias_;
};

}  // namespace covertime

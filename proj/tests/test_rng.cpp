#include "covertime/rng.hpp"

#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"

using namespace covertime;

TEST_CASE("philox4x32-10 known answers") {
  // reference vectors for the 10-round 4x32 variant
  {
    auto r = Philox4x32::block({0, 0, 0, 0}, {0, 0});
    CHECK(r[0] == 0x6627e8d5u);
    CHECK(r[1] == 0xe169c58du);
    CHECK(r[2] == 0xbc57ac4cu);
    CHECK(r[3] == 0x9b00dbd8u);
  }
  {
    auto r = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                               {0xffffffffu, 0xffffffffu});
    CHECK(r[0] == 0x408f276du);
    CHECK(r[1] == 0x41c83b0eu);
    CHECK(r[2] == 0xa20bc7c6u);
    CHECK(r[3] == 0x6d5451fdu);
  }
  {
    auto r = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                               {0xa4093822u, 0x299f31d0u});
    CHECK(r[0] == 0xd16cfe09u);
    CHECK(r[1] == 0x94fdccebu);
    CHECK(r[2] == 0x5001e420u);
    CHECK(r[3] == 0x24126ea1u);
  }
}

TEST_CASE("stream addressing is reproducible and purpose-separated") {
  RngStream a = make_stream(12345, StreamPurpose::Walk, 7);
  RngStream b = make_stream(12345, StreamPurpose::Walk, 7);
  for (int i = 0; i < 64; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c = make_stream(12345, StreamPurpose::Clock, 7);
  RngStream d = make_stream(12345, StreamPurpose::Walk, 8);
  RngStream e = make_stream(12346, StreamPurpose::Walk, 7);
  RngStream f = make_stream(12345, StreamPurpose::Walk, 7);
  int differs_c = 0, differs_d = 0, differs_e = 0;
  for (int i = 0; i < 16; ++i) {
    const u64 base = f.next_u64();
    differs_c += base != c.next_u64();
    differs_d += base != d.next_u64();
    differs_e += base != e.next_u64();
  }
  CHECK(differs_c == 16);
  CHECK(differs_d == 16);
  CHECK(differs_e == 16);
}

TEST_CASE("next_double range and uniformity") {
  RngStream rng = make_stream(99, StreamPurpose::Walk, 0);
  const int n = 200000;
  const int bins = 16;
  std::vector<int> count(bins, 0);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    ++count[int(u * bins)];
  }
  CHECK(std::fabs(sum / n - 0.5) < 0.004);
  double chi2 = 0.0;
  const double expect = double(n) / bins;
  for (int b = 0; b < bins; ++b) chi2 += (count[b] - expect) * (count[b] - expect) / expect;
  CHECK(chi2 < 37.70);  // chi2(15) at 0.999
}

TEST_CASE("uniform_below is exact and in range") {
  RngStream rng = make_stream(4242, StreamPurpose::Start, 0);
  const u64 n = 13;
  const int draws = 130000;
  std::vector<int> count(n, 0);
  for (int i = 0; i < draws; ++i) {
    const u64 x = rng.uniform_below(n);
    REQUIRE(x < n);
    ++count[x];
  }
  const double expect = double(draws) / double(n);
  double chi2 = 0.0;
  for (u64 b = 0; b < n; ++b) chi2 += (count[b] - expect) * (count[b] - expect) / expect;
  CHECK(chi2 < 32.91);  // chi2(12) at 0.999

  CHECK(rng.uniform_below(1) == 0);
}

TEST_CASE("exponential moments") {
  RngStream rng = make_stream(7, StreamPurpose::Clock, 0);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.exponential();
    CHECK(x >= 0.0);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  CHECK(std::fabs(mean - 1.0) < 0.012);  // 5 sigma
  CHECK(std::fabs(var - 1.0) < 0.06);
}

TEST_CASE("normal moments") {
  RngStream rng = make_stream(8, StreamPurpose::Clock, 1);
  const int n = 200000;
  double s = 0.0, s2 = 0.0, s3 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
    s3 += x * x * x;
  }
  CHECK(std::fabs(s / n) < 0.012);
  CHECK(std::fabs(s2 / n - 1.0) < 0.02);
  CHECK(std::fabs(s3 / n) < 0.05);
}

TEST_CASE("gamma moments for several shapes") {
  for (double shape : {1.0, 2.5, 7.0}) {
    RngStream rng = make_stream(19, StreamPurpose::Clock, u64(shape * 10));
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = rng.gamma(shape);
      CHECK(x > 0.0);
      s += x;
      s2 += x * x;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    CHECK(std::fabs(mean - shape) < 5.0 * std::sqrt(shape / n));
    CHECK(std::fabs(var - shape) < 0.05 * shape + 0.02);
  }
  RngStream rng = make_stream(19, StreamPurpose::Clock, 999);
  CHECK(rng.gamma(0.0) == 0.0);
  CHECK_THROWS_AS((void)rng.gamma(0.5), Error);
}

TEST_CASE("poisson moments across the sampler split") {
  for (double lambda : {0.3, 3.0, 9.5, 10.5, 40.0, 400.0}) {
    RngStream rng = make_stream(23, StreamPurpose::Clock, u64(lambda * 10));
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const i64 k = rng.poisson(lambda);
      REQUIRE(k >= 0);
      s += double(k);
      s2 += double(k) * double(k);
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    const double se = std::sqrt(lambda / n);
    CHECK(std::fabs(mean - lambda) < 5.0 * se);
    CHECK(std::fabs(var - lambda) < 0.05 * lambda + 0.05);
  }
  RngStream rng = make_stream(23, StreamPurpose::Clock, 999);
  CHECK(rng.poisson(0.0) == 0);
}

TEST_CASE("alias table matches its weights") {
  const std::vector<double> w = {0.5, 0.25, 0.125, 0.125};
  AliasTable tab(w);
  RngStream rng = make_stream(31, StreamPurpose::Walk, 5);
  const int n = 400000;
  std::vector<int> count(w.size(), 0);
  for (int i = 0; i < n; ++i) {
    const int k = tab.pick(rng);
    REQUIRE(k >= 0);
    REQUIRE(k < int(w.size()));
    ++count[k];
  }
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double p = count[k] / double(n);
    const double se = std::sqrt(w[k] * (1 - w[k]) / n);
    CHECK(std::fabs(p - w[k]) < 5.0 * se);
  }

  AliasTable single(std::vector<double>{2.0});
  for (int i = 0; i < 10; ++i) CHECK(single.pick(rng) == 0);

  CHECK_THROWS_AS(AliasTable(std::vector<double>{}), Error);
  CHECK_THROWS_AS(AliasTable(std::vector<double>{0.0, 0.0}), Error);
  CHECK_THROWS_AS(AliasTable(std::vector<double>{1.0, -0.5}), Error);
}

TEST_CASE("unnormalized alias weights are rescaled") {
  const std::vector<double> w = {3.0, 1.0};
  AliasTable tab(w);
  RngStream rng = make_stream(37, StreamPurpose::Walk, 6);
  const int n = 200000;
  int zero = 0;
  for (int i = 0; i < n; ++i) zero += tab.pick(rng) == 0;
  CHECK(std::fabs(zero / double(n) - 0.75) < 0.006);
}

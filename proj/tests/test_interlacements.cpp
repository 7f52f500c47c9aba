#include "covertime/interlacements.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "covertime/green.hpp"
#include "covertime/rng.hpp"
#include "doctest.h"

using namespace covertime;

namespace {

constexpr double kSrwGreenOrigin = 1.516386059152;

bool subset_of(const std::vector<Pt>& a, const std::vector<Pt>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// srw3's potential is invariant under coordinate permutations and sign flips,
// so one quadrature call per sorted nonnegative triple fills a whole orbit
PotentialTable srw_symmetric_table(const MovingMode& srw, i32 maxR, double tol) {
  PotentialTable table(srw, PotentialMethod::Quadrature);
  for (i32 x = 0; x <= maxR; ++x)
    for (i32 y = x; y <= maxR; ++y)
      for (i32 z = y; z <= maxR; ++z) {
        const GreenValue g = green(srw, make_pt({x, y, z}), tol);
        i32 c[3] = {x, y, z};
        std::sort(c, c + 3);
        do {
          for (int sx = -1; sx <= 1; sx += 2)
            for (int sy = -1; sy <= 1; sy += 2)
              for (int sz = -1; sz <= 1; sz += 2) {
                const Pt p = make_pt({sx * c[0], sy * c[1], sz * c[2]});
                if (!table.contains(p)) table.insert(p, g.value, g.error);
              }
        } while (std::next_permutation(c, c + 3));
      }
  return table;
}

}  // namespace

TEST_CASE("level zero gives an empty sample") {
  const MovingMode srw = builtin_mode("srw3");
  RngStream rng = make_stream(11, StreamPurpose::Interlace, 0);
  const InterlacementSample s = sample_window(srw, {make_pt({0, 0, 0})}, 0.0, rng);
  CHECK(s.trajectoryCount == 0);
  CHECK(s.trace.empty());
  CHECK(s.labels.empty());
  CHECK(s.u == 0.0);
}

TEST_CASE("singleton window: counts, labels, and the vacancy law") {
  const MovingMode srw = builtin_mode("srw3");
  const Pt o = make_pt({0, 0, 0});
  const InterlacementSampler sampler(srw, {o});
  const double g0 = kSrwGreenOrigin;
  CHECK(std::fabs(sampler.capacity() - 1.0 / g0) <= 5e-4);
  CHECK(std::fabs(sampler.startMass(o) - 1.0) <= 1e-12);

  RngStream rng = make_stream(5150, StreamPurpose::Interlace, 0);
  const i64 n = 20000;
  const double u = 1.0;
  i64 vacant = 0, count = 0;
  double count2 = 0.0;
  for (i64 i = 0; i < n; ++i) {
    const InterlacementSample s = sampler.sample(u, rng);
    REQUIRE(s.labels.size() == std::size_t(s.trajectoryCount));
    REQUIRE(s.trajectorySites.size() == std::size_t(s.trajectoryCount));
    CHECK(std::is_sorted(s.labels.begin(), s.labels.end()));
    for (double lab : s.labels) {
      CHECK(lab >= 0.0);
      CHECK(lab <= u);
    }
    // every trajectory starts in the window, so it records its start site
    CHECK(s.trace.empty() == (s.trajectoryCount == 0));
    for (const std::vector<Pt>& sites : s.trajectorySites) {
      REQUIRE(sites.size() == 1);
      CHECK(sites[0] == o);
    }
    if (s.trace.empty()) ++vacant;
    count += s.trajectoryCount;
    count2 += double(s.trajectoryCount) * double(s.trajectoryCount);
  }

  // trajectory count is Poisson(u * cap)
  const double lambda = u * sampler.capacity();
  const double meanCount = double(count) / double(n);
  CHECK(std::fabs(meanCount - lambda) <= 3.0 * std::sqrt(lambda / double(n)));
  const double varCount = count2 / double(n) - meanCount * meanCount;
  CHECK(varCount / meanCount > 0.93);
  CHECK(varCount / meanCount < 1.07);

  // vacancy law, with slack for the capacity bias and dropped returns
  const double pv = double(vacant) / double(n);
  const double se = std::sqrt(pv * (1.0 - pv) / double(n));
  CHECK(std::fabs(pv - std::exp(-u / g0)) <= 3.0 * se + 0.002 * (1.0 + u));
}

TEST_CASE("pair window obeys the two-point vacancy law") {
  const MovingMode srw = builtin_mode("srw3");
  const Pt o = make_pt({0, 0, 0});
  const Pt e1 = make_pt({1, 0, 0});
  const InterlacementSampler sampler(srw, {o, e1});

  // cap({0,e1}) = 2/(g(0)+g(e1)) and g(e1) = g(0)-1 for the nearest-neighbor
  // mode, both starts equally likely
  const double g0 = kSrwGreenOrigin;
  const double capPair = 2.0 / (2.0 * g0 - 1.0);
  CHECK(std::fabs(sampler.capacity() - capPair) <= 1e-3);
  // the centered box leaves e1 one step off center, so the finite-box
  // measure is symmetric only up to a small boundary effect
  CHECK(std::fabs(sampler.startMass(o) - 0.5) <= 1e-5);
  CHECK(std::fabs(sampler.startMass(e1) - 0.5) <= 1e-5);

  RngStream rng = make_stream(62, StreamPurpose::Interlace, 1);
  const i64 n = 6000;
  const double u = 1.0;
  i64 vacBoth = 0, vacOrigin = 0;
  for (i64 i = 0; i < n; ++i) {
    const InterlacementSample s = sampler.sample(u, rng);
    CHECK(subset_of(s.trace, s.K));
    if (s.trace.empty()) ++vacBoth;
    if (!std::binary_search(s.trace.begin(), s.trace.end(), o)) ++vacOrigin;
  }
  const double pBoth = double(vacBoth) / double(n);
  const double seBoth = std::sqrt(pBoth * (1.0 - pBoth) / double(n));
  CHECK(std::fabs(pBoth - std::exp(-2.0 * u / (2.0 * g0 - 1.0))) <= 3.0 * seBoth + 0.004);
  // the one-point marginal inside a larger window follows the same law
  const double pOr = double(vacOrigin) / double(n);
  const double seOr = std::sqrt(pOr * (1.0 - pOr) / double(n));
  CHECK(std::fabs(pOr - std::exp(-u / g0)) <= 3.0 * seOr + 0.004);
}

TEST_CASE("nested levels thin to exact lower-level samples") {
  const MovingMode srw = builtin_mode("srw3");
  const Pt o = make_pt({0, 0, 0});
  const InterlacementSampler sampler(srw, {o});
  const double g0 = kSrwGreenOrigin;

  RngStream rng = make_stream(5151, StreamPurpose::Interlace, 2);
  const i64 n = 2000;
  const double u = 2.0, v = 1.0;
  i64 vacFull = 0, vacThin = 0;
  for (i64 i = 0; i < n; ++i) {
    const InterlacementSample s = sampler.sample(u, rng);

    const InterlacementSample same = nested_levels(s, u);
    CHECK(same.trajectoryCount == s.trajectoryCount);
    CHECK(same.trace == s.trace);
    CHECK(same.labels == s.labels);

    const InterlacementSample none = nested_levels(s, 0.0);
    CHECK(none.trajectoryCount == 0);
    CHECK(none.trace.empty());

    const InterlacementSample thin = nested_levels(s, v);
    CHECK(thin.u == v);
    CHECK(subset_of(thin.trace, s.trace));
    CHECK(thin.trajectoryCount == i64(thin.labels.size()));
    for (double lab : thin.labels) CHECK(lab <= v);
    i64 below = 0;
    for (double lab : s.labels)
      if (lab <= v) ++below;
    CHECK(thin.trajectoryCount == below);

    if (s.trace.empty()) ++vacFull;
    if (thin.trace.empty()) ++vacThin;
  }
  // both levels obey the vacancy law: the thinned ensemble is a real sample
  const double pF = double(vacFull) / double(n);
  const double pT = double(vacThin) / double(n);
  const double seF = std::sqrt(pF * (1.0 - pF) / double(n));
  const double seT = std::sqrt(pT * (1.0 - pT) / double(n));
  CHECK(std::fabs(pF - std::exp(-u / g0)) <= 3.0 * seF + 0.002 * (1.0 + u));
  CHECK(std::fabs(pT - std::exp(-v / g0)) <= 3.0 * seT + 0.002 * (1.0 + v));
  CHECK(pT > pF);
}

TEST_CASE("translated windows give identically shifted samples") {
  const MovingMode srw = builtin_mode("srw3");
  const Pt w = make_pt({7, -3, 2});
  const InterlacementSampler a(srw, {make_pt({2, 1, 0})});
  const InterlacementSampler b(srw, {make_pt({9, -2, 2})});
  CHECK(a.escapeRadius() == b.escapeRadius());
  CHECK(a.capacity() == b.capacity());

  for (i64 rep = 0; rep < 50; ++rep) {
    RngStream ra = make_stream(303, StreamPurpose::Interlace, u64(rep));
    RngStream rb = make_stream(303, StreamPurpose::Interlace, u64(rep));
    const InterlacementSample sa = a.sample(1.5, ra);
    const InterlacementSample sb = b.sample(1.5, rb);
    CHECK(sa.trajectoryCount == sb.trajectoryCount);
    CHECK(sa.labels == sb.labels);
    REQUIRE(sa.trace.size() == sb.trace.size());
    for (std::size_t i = 0; i < sa.trace.size(); ++i)
      for (int c = 0; c < 3; ++c)
        CHECK(sa.trace[i][std::size_t(c)] + w[std::size_t(c)] == sb.trace[i][std::size_t(c)]);
  }
}

TEST_CASE("two-point sums from the tabulated potential") {
  const MovingMode srw = builtin_mode("srw3");
  const PotentialTable table = srw_symmetric_table(srw, 5, 1e-5);

  std::vector<Pt> K;
  for (const Pt& p : zd_ball(3, 5))
    if (p != Pt{}) K.push_back(p);
  REQUIRE(K.size() == 1330);

  const TwoPointSum zero = two_point_sum(table, K, 0.0);
  CHECK(zero.lhs == double(K.size()));
  CHECK(zero.ratio == 1.0);

  double prev = 1.0;
  for (double u : {1.0, 2.0, 4.0}) {
    const TwoPointSum t = two_point_sum(table, K, u);
    CHECK(t.lhs >= t.base);  // g >= 0 raises every term
    CHECK(t.ratio > prev);   // consistent with the (1+u) growth
    prev = t.ratio;
  }
}

TEST_CASE("invalid windows and levels are rejected") {
  const MovingMode srw = builtin_mode("srw3");
  const Pt o = make_pt({0, 0, 0});

  CHECK_THROWS_AS(InterlacementSampler(srw, {}), Error);
  Pt beyond{};
  beyond[3] = 2;
  CHECK_THROWS_AS(InterlacementSampler(srw, {beyond}), Error);
  try {
    // centered half-width 64 pushes the first ladder rung past the box cap
    InterlacementSampler(srw, {o, make_pt({128, 0, 0})});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CapacityUnavailable);
  }

  const InterlacementSampler sampler(srw, {o});
  RngStream rng = make_stream(99, StreamPurpose::Interlace, 0);
  CHECK_THROWS_AS(sampler.sample(-0.5, rng), Error);
  CHECK_THROWS_AS(sampler.sample(std::nan(""), rng), Error);
  CHECK_THROWS_AS(sampler.startMass(make_pt({1, 1, 1})), Error);

  const InterlacementSample s = sampler.sample(1.0, rng);
  CHECK_THROWS_AS(nested_levels(s, -0.1), Error);
  CHECK_THROWS_AS(nested_levels(s, 1.1), Error);

  PotentialTable table(srw, PotentialMethod::Quadrature);
  const Pt e1 = make_pt({1, 0, 0});
  try {
    two_point_sum(table, {e1}, 1.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CapacityUnavailable);  // origin missing
  }
  table.insert(o, kSrwGreenOrigin, 1e-9);
  try {
    two_point_sum(table, {make_pt({5, 5, 5})}, 1.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CapacityUnavailable);  // site missing
  }
  table.insert(e1, kSrwGreenOrigin - 1.0, 1e-9);
  CHECK_THROWS_AS(two_point_sum(table, {e1, o}, 1.0), Error);  // origin in K
  CHECK_THROWS_AS(two_point_sum(table, {}, 1.0), Error);
  CHECK_THROWS_AS(two_point_sum(table, {e1}, -1.0), Error);
  CHECK(two_point_sum(table, {e1}, 3.0).ratio > 1.0);
}

#include "covertime/green.hpp"

#include <cmath>

#include "doctest.h"
#include "support/mc_oracles.hpp"

using namespace covertime;
using testsupport::green_visits;
using testsupport::hit_probability;
using testsupport::McEstimate;

namespace {

// closed-form value of (2pi)^-3 Int 1/(1 - (cos a + cos b + cos c)/3) over
// the cube [-pi,pi]^3, i.e. the nearest-neighbor potential at the origin
constexpr double kSrwGreenOrigin = 1.516386059152;

double linf_err(const GreenValue& g, double truth) { return std::fabs(g.value - truth); }

}  // namespace

TEST_CASE("origin value matches the closed form and the visit-count oracle") {
  const MovingMode srw = builtin_mode("srw3");
  const GreenValue g0 = green(srw, make_pt({0, 0, 0}), 1e-9);
  CHECK(g0.error <= 1e-9);
  CHECK(linf_err(g0, kSrwGreenOrigin) <= g0.error + 2e-12);

  const McEstimate mc = green_visits(srw, make_pt({0, 0, 0}), 24, 150000, 20260201);
  CHECK(std::fabs(g0.value - mc.value) <= 3.0 * (mc.se + g0.error));
  CHECK(std::fabs(mc.value - 1.5164) < 0.02);  // coarse sanity on the oracle itself
}

TEST_CASE("quadrature against the visit-count oracle on two modes") {
  const std::vector<Pt> pts = {make_pt({0, 0, 0}), make_pt({1, 0, 0}), make_pt({1, 1, 0}),
                               make_pt({2, 0, 0})};
  int point_index = 0;
  for (const char* name : {"srw3", "diag4"}) {
    const MovingMode mode = builtin_mode(name);
    const PotentialTable table = tabulate_green(mode, pts, 1e-7);
    CHECK(table.size() == 4);
    const double g0 = table.at(make_pt({0, 0, 0})).value;
    for (const Pt& x : pts) {
      const GreenValue gq = table.at(x);
      CHECK(gq.value > 0.0);
      CHECK(gq.value <= g0);
      const McEstimate mc = green_visits(mode, x, 24, 150000, 777000 + u64(point_index));
      CHECK(std::fabs(gq.value - mc.value) <= 3.0 * (mc.se + gq.error));
      ++point_index;
    }
  }
}

TEST_CASE("one-jump harmonic identity at the origin") {
  // g(0) = 1 + sum_v kappa(v) g(v) for both builtin modes
  for (const char* name : {"srw3", "diag4"}) {
    const MovingMode mode = builtin_mode(name);
    const GreenValue g0 = green(mode, make_pt({0, 0, 0}), 1e-8);
    double rhs = 1.0, budget = g0.error;
    for (int k = 0; k < mode.l(); ++k) {
      Pt v{};
      for (int i = 0; i < mode.d; ++i) v[std::size_t(i)] = mode.vectors[std::size_t(k)][std::size_t(i)];
      const GreenValue gv = green(mode, v, 1e-8);
      rhs += mode.weights[std::size_t(k)] * gv.value;
      budget += mode.weights[std::size_t(k)] * gv.error;
    }
    CHECK(std::fabs(g0.value - rhs) <= budget + 1e-12);
  }
}

TEST_CASE("evenness and a nontrivial lattice automorphism") {
  const MovingMode srw = builtin_mode("srw3");
  const GreenValue a = green(srw, make_pt({2, -1, 0}), 1e-7);
  const GreenValue b = green(srw, make_pt({-2, 1, 0}), 1e-7);
  CHECK(std::fabs(a.value - b.value) <= a.error + b.error + 1e-14);

  // the map e1 -> (1,1,1), e2 -> -e2, e3 -> -e1 permutes the diag4 jump set
  // (det -1), so the potential is equal at e1 and (1,1,1)
  const MovingMode dg = builtin_mode("diag4");
  const GreenValue ge1 = green(dg, make_pt({1, 0, 0}), 1e-7);
  const GreenValue g111 = green(dg, make_pt({1, 1, 1}), 1e-7);
  CHECK(std::fabs(ge1.value - g111.value) <= ge1.error + g111.error + 1e-14);
}

TEST_CASE("hit probability identity g(x) = g(0) P_x[H_0 < inf]") {
  const MovingMode srw = builtin_mode("srw3");
  const GreenValue g0 = green(srw, make_pt({0, 0, 0}), 1e-8);
  for (const Pt& x : {make_pt({1, 0, 0}), make_pt({2, 1, 0})}) {
    const GreenValue gx = green(srw, x, 1e-7);
    const double ratio = gx.value / g0.value;
    CHECK(ratio < 1.0);  // transience
    const McEstimate hit = hit_probability(srw, x, make_pt({0, 0, 0}), 24, 200000,
                                           555000 + u64(x[0]), g0.value);
    CHECK(std::fabs(ratio - hit.value) <= 3.0 * (hit.se + 1e-6));
  }
}

TEST_CASE("far field approximation improves with distance") {
  const MovingMode srw = builtin_mode("srw3");
  const FarFieldGreen ff = far_field_green(srw);
  // isotropic covariance 1/3: amplitude recovers the classical 3/(2 pi) |x|^-1
  CHECK(std::fabs(ff.at(make_pt({10, 0, 0})) - 3.0 / (2.0 * M_PI * 10.0)) < 1e-12);

  const GreenValue g5 = green(srw, make_pt({5, 0, 0}), 1e-6);
  const GreenValue g8 = green(srw, make_pt({8, 0, 0}), 1e-6);
  const double dev5 = std::fabs(g5.value / ff.at(make_pt({5, 0, 0})) - 1.0);
  const double dev8 = std::fabs(g8.value / ff.at(make_pt({8, 0, 0})) - 1.0);
  CHECK(dev5 < 0.05);
  CHECK(dev8 < dev5);

  const MovingMode dg = builtin_mode("diag4");
  const FarFieldGreen ffd = far_field_green(dg);
  const GreenValue gd = green(dg, make_pt({4, 4, 4}), 1e-6);
  CHECK(std::fabs(gd.value / ffd.at(make_pt({4, 4, 4})) - 1.0) < 0.05);
}

TEST_CASE("table canonicalizes x and -x and validates entries") {
  const MovingMode srw = builtin_mode("srw3");
  const std::vector<Pt> pts = {make_pt({1, 0, 0}), make_pt({-1, 0, 0}), make_pt({0, 1, 0})};
  const PotentialTable table = tabulate_green(srw, pts, 1e-6);
  CHECK(table.size() == 2);  // +-e1 collapse to one entry
  CHECK(table.contains(make_pt({-1, 0, 0})));
  CHECK(table.at(make_pt({1, 0, 0})).value == table.at(make_pt({-1, 0, 0})).value);
  CHECK(table.method() == PotentialMethod::Quadrature);
  CHECK_THROWS_AS(table.at(make_pt({3, 3, 3})), Error);

  PotentialTable manual(srw, PotentialMethod::Solve);
  CHECK_THROWS_AS(manual.insert(make_pt({1, 0, 0}), -0.25, 1e-9), Error);
  CHECK_THROWS_AS(manual.insert(make_pt({1, 0, 0}), 0.25, -1e-9), Error);
  manual.insert(make_pt({1, 0, 0}), 0.25, 1e-9);
  CHECK(manual.at(make_pt({-1, 0, 0})).value == 0.25);
}

TEST_CASE("error handling: bad tolerance and exhausted budget") {
  const MovingMode srw = builtin_mode("srw3");
  CHECK_THROWS_AS(green(srw, make_pt({0, 0, 0}), 0.0), Error);
  try {
    green(srw, make_pt({0, 0, 0}), -1.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ConfigInvalid);
  }

  // a 4d mode forces 256^4 evaluations per subbox at the deepest refinement
  // level, so an absurd tolerance hits the evaluation cap quickly
  const MovingMode srw4 = validate_mode(
      4, {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}, {0.25, 0.25, 0.25, 0.25}, "srw4");
  try {
    green(srw4, make_pt({1, 0, 0, 0}), 1e-15);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ToleranceUnreachable);
  }
}

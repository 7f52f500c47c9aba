#include "covertime/mode.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>

#include "doctest.h"

using namespace covertime;

namespace {

Errc thrown_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::ConfigInvalid;
}

std::string write_temp(const std::string& name, const std::string& body) {
  const std::string path = name;
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("builtin modes") {
  const MovingMode srw = builtin_mode("srw3");
  CHECK(srw.d == 3);
  CHECK(srw.l() == 3);
  CHECK(srw.jumps.size() == 6);
  for (double p : srw.jump_prob) CHECK(p == doctest::Approx(1.0 / 6));
  CHECK(srw.max_abs_coord == 1);
  const auto sigma = srw.covariance();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(sigma[i * 3 + j] == doctest::Approx(i == j ? 1.0 / 3 : 0.0));

  const MovingMode diag = builtin_mode("diag4");
  CHECK(diag.l() == 4);
  const auto sd = diag.covariance();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(sd[i * 3 + j] == doctest::Approx(i == j ? 0.5 : 0.25));

  CHECK(srw.hash() != diag.hash());
  CHECK(srw.hash() == builtin_mode("srw3").hash());
  CHECK_THROWS_AS(builtin_mode("nope"), Error);
}

TEST_CASE("validation rejects bad inputs with the right codes") {
  auto u = [](int l) { return std::vector<double>(l, 1.0 / l); };

  CHECK(thrown_code([&] { validate_mode(2, {{1, 0}, {0, 1}}, u(2)); }) == Errc::BadOrientation);
  CHECK(thrown_code([&] { validate_mode(3, {}, {}); }) == Errc::NotGenerating);
  CHECK(thrown_code([&] {
          validate_mode(3, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, u(2));
        }) == Errc::BadWeights);
  CHECK(thrown_code([&] {
          validate_mode(3, {{1, 0, 0}, {0, 0, 0}, {0, 0, 1}}, u(3));
        }) == Errc::BadOrientation);
  CHECK(thrown_code([&] {
          validate_mode(3, {{1, 0, 0}, {0, -1, 0}, {0, 0, 1}}, u(3));
        }) == Errc::BadOrientation);
  CHECK(thrown_code([&] {
          validate_mode(3, {{1, 0, 0}, {1, 0, 0}, {0, 0, 1}}, u(3));
        }) == Errc::BadOrientation);
  CHECK(thrown_code([&] {
          validate_mode(3, {{1, 0}, {0, 1, 0}, {0, 0, 1}}, u(3));
        }) == Errc::BadOrientation);
  CHECK(thrown_code([&] {
          validate_mode(3, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {0.5, 0.5, -0.1});
        }) == Errc::BadWeights);
  CHECK(thrown_code([&] {
          validate_mode(3, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {0.5, 0.4, 0.2});
        }) == Errc::BadWeights);
}

TEST_CASE("generation test distinguishes full lattices from sublattices") {
  auto u = [](int l) { return std::vector<double>(l, 1.0 / l); };

  // index-2 sublattice
  CHECK(thrown_code([&] {
          validate_mode(3, {{2, 0, 0}, {0, 1, 0}, {0, 0, 1}}, u(3));
        }) == Errc::NotGenerating);
  CHECK(thrown_code([&] {
          validate_mode(3, {{1, 1, 0}, {0, 1, 1}, {1, 0, 1}}, u(3));
        }) == Errc::NotGenerating);
  // rank deficient
  CHECK(thrown_code([&] {
          validate_mode(3, {{1, 0, 0}, {0, 1, 0}, {1, 1, 0}}, u(3));
        }) == Errc::NotGenerating);

  // non-obvious full-rank generating sets
  CHECK_NOTHROW(validate_mode(3, {{1, 1, 0}, {0, 1, 0}, {0, 0, 1}}, u(3)));
  CHECK_NOTHROW(validate_mode(3, {{2, 0, 0}, {1, 1, 0}, {1, 0, 1}, {3, 1, 1}}, u(4)));
  CHECK_NOTHROW(validate_mode(4, {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}, u(4)));
  // redundant extra vector keeps index 1
  CHECK_NOTHROW(validate_mode(3, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {5, 3, 2}}, u(4)));
}

TEST_CASE("mode file roundtrip") {
  const std::string path = write_temp("tmp_mode_ok.mode",
                                      "# anisotropic example\n"
                                      "d = 3\n"
                                      "N = 12\n"
                                      "vector = 1, 0, 0\n"
                                      "vector = 0,1,0\n"
                                      "vector = 0,0,1\n"
                                      "vector = 2,1,0   # long move\n"
                                      "weight = 0.4\n"
                                      "weight = 0.3\n"
                                      "weight = 0.2\n"
                                      "weight = 0.1\n");
  int N = 0;
  const MovingMode m = parse_mode_file(path, &N);
  CHECK(N == 12);
  CHECK(m.d == 3);
  CHECK(m.l() == 4);
  CHECK(m.weights[3] == doctest::Approx(0.1));
  CHECK(m.max_abs_coord == 2);
  std::remove(path.c_str());

  const std::string upath = write_temp("tmp_mode_uniform.mode",
                                       "d = 3\n"
                                       "vector = 1,0,0\n"
                                       "vector = 0,1,0\n"
                                       "vector = 0,0,1\n"
                                       "weights = uniform\n");
  int N2 = 7;
  const MovingMode mu = parse_mode_file(upath, &N2);
  CHECK(N2 == -1);
  CHECK(mu.weights[0] == doctest::Approx(1.0 / 3));
  std::remove(upath.c_str());
}

TEST_CASE("mode file errors carry line numbers") {
  const std::string bad1 = write_temp("tmp_mode_bad1.mode", "d = 3\nvector = 1,0,0\nbogus = 1\n");
  try {
    parse_mode_file(bad1);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ConfigInvalid);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::remove(bad1.c_str());

  const std::string bad2 = write_temp("tmp_mode_bad2.mode", "d = 3\nvector = 1,x,0\n");
  CHECK(thrown_code([&] { parse_mode_file(bad2); }) == Errc::ConfigInvalid);
  std::remove(bad2.c_str());

  const std::string bad3 = write_temp("tmp_mode_bad3.mode",
                                      "d = 3\nvector = 1,0,0\nweight = 0.5\nweights = uniform\n");
  CHECK(thrown_code([&] { parse_mode_file(bad3); }) == Errc::ConfigInvalid);
  std::remove(bad3.c_str());

  CHECK(thrown_code([&] { parse_mode_file("no_such_file.mode"); }) == Errc::IoError);
}

TEST_CASE("resolve_mode dispatches builtins and paths") {
  int N = 0;
  const MovingMode m = resolve_mode("srw3", &N);
  CHECK(N == -1);
  CHECK(m.name == "srw3");

  const std::string path = write_temp("tmp_mode_res.mode",
                                      "d = 3\nN = 6\nvector = 1,0,0\nvector = 0,1,0\nvector = 0,0,1\n"
                                      "weights = uniform\n");
  const MovingMode mf = resolve_mode(path, &N);
  CHECK(N == 6);
  CHECK(mf.l() == 3);
  std::remove(path.c_str());
}

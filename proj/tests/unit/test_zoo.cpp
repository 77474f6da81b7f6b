#include <doctest.h>

#include <cmath>

#include "bmcd/error.hpp"
#include "bmcd/zoo.hpp"

using namespace bmcd;

TEST_CASE("builtin names and defaults") {
  CHECK(builtin("sphere(2)").name == "sphere(2,1)");
  CHECK(builtin("sphere(2,3)").name == "sphere(2,3)");
  CHECK(builtin("euclidean(3)").manifold.dim() == 3);
  CHECK(builtin("gaussian", {2, 0.5}).params[1] == 0.5);
  CHECK(builtin_families().size() == 5);
  CHECK_THROWS_AS(builtin("torus(2)"), InputError);
  CHECK_THROWS_AS(builtin("sphere(0)"), InputError);
  CHECK_THROWS_AS(builtin("sphere(2,-1)"), InputError);
  CHECK_THROWS_AS(builtin("sphere(2"), InputError);
  CHECK_THROWS_AS(builtin("hyperbolic(2.5)"), InputError);
}

TEST_CASE("chart domains") {
  auto s = builtin("sphere(2,2)").manifold;
  CHECK(s.domain().hi(0) == 4.0);
  auto h = builtin("hyperbolic(2)").manifold;
  CHECK(h.domain().hi(1) == doctest::Approx(0.9 / std::sqrt(2.0)));
  CHECK(builtin("saddle_weight(2)").manifold.domain().lo(0) == -5.0);
}

TEST_CASE("cd status") {
  using V = CdStatus::Verdict;
  CHECK(builtin("sphere(2,1)").cd_status(1, 2).verdict == V::Holds);
  CHECK(builtin("sphere(2,1)").cd_status(1.5, 3).verdict == V::Fails);
  CHECK(builtin("euclidean(2)").cd_status(0, 2).verdict == V::Holds);
  CHECK(builtin("euclidean(2)").cd_status(0.1, 5).verdict == V::Fails);
  CHECK(builtin("hyperbolic(3)").cd_status(-2, 3).verdict == V::Holds);
  CHECK(builtin("hyperbolic(3)").cd_status(-1, 3).verdict == V::Fails);
  CHECK(builtin("gaussian(2,1)").cd_status(0.99, 1e9).verdict == V::Holds);
  auto g = builtin("gaussian(2,1)").cd_status(1, 3);
  CHECK(g.verdict == V::Fails);
  CHECK(g.ricci_lower_bound == doctest::Approx(1 - 50.0));
  auto sw = builtin("saddle_weight(2,1)").cd_status(0, 3);
  CHECK(sw.verdict == V::Fails);
  CHECK(sw.ricci_lower_bound <= -2.0);
  CHECK(builtin("sphere(3,1)").cd_status(1, 2).verdict == V::Unknown);
}

#include <doctest.h>

#include <cmath>

#include "bmcd/bm.hpp"
#include "bmcd/error.hpp"
#include "bmcd/zoo.hpp"

using namespace bmcd;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

RasterOptions quick() {
  RasterOptions o;
  o.lines_per_side = 1024;
  return o;
}

ParamSet square(const Vec& corner, double eps) {
  return {2, eps, [corner](const Vec& u) -> Vec { return corner + u; }};
}

}  // namespace

TEST_CASE("curvature aligned cubes") {
  auto e = builtin("euclidean(2)").manifold;
  PotentialSpec se = build_potential(e, vec2(0.1, 0.2), vec2(0.6, 0.8), 3.0, 0.1);
  CubeSet ce = curvature_aligned_cube(se, 1e-4);
  CHECK(ce.basis.isApprox(Mat::Identity(2, 2)));
  CHECK_THROWS_AS(curvature_aligned_cube(se, 2e-4), InputError);
  CHECK_THROWS_AS(curvature_aligned_cube(se, 0.0), InputError);

  auto s = builtin("sphere(2,1)").manifold;
  Vec x0 = vec2(0.2, -0.1), v0 = vec2(1, 0);
  v0 /= std::sqrt(norm2(s, x0, v0));
  const double lambda = 0.1;
  PotentialSpec ss = build_potential(s, x0, v0, 3.0, lambda);
  CubeSet cs = curvature_aligned_cube(ss, std::pow(lambda, 4));
  CHECK(cs.eigenvalues(0) == doctest::Approx(0.0).scale(1e-8));
  CHECK(cs.eigenvalues(1) == doctest::Approx(lambda * lambda).epsilon(1e-4));
  CHECK((cs.basis.transpose() * s.metric(x0) * cs.basis - Mat::Identity(2, 2)).norm() <= 1e-10);
  // the zero eigenvector is the transport direction
  CHECK(std::abs(inner(s, x0, cs.basis.col(0), v0)) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("flat measures") {
  auto e = builtin("euclidean(2)").manifold;
  PotentialSpec s = build_potential(e, vec2(0, 0), vec2(1, 0), 3.0, 0.1);
  const double eps = 1e-4;
  CubeSet A = curvature_aligned_cube(s, eps);
  CHECK(cube_measure(A).value == doctest::Approx(eps * eps).epsilon(1e-12));
  CHECK(transported_measure(s, 0.6, A).value == doctest::Approx(eps * eps).epsilon(1e-8));
  for (double t : {0.0, 0.5, 1.0}) {
    auto p = pushforward_raster(s, t, A, quick());
    CHECK(std::abs(p.raster.value - eps * eps) <= p.raster.error + 1e-3 * eps * eps);
  }
  auto mid = midpoint_raster(s, A, 0.5, quick());
  CHECK(std::abs(mid.raster.value - eps * eps) <= mid.raster.error + 1e-3 * eps * eps);
  CHECK(mid.raster.error < 0.02 * eps * eps);
}

TEST_CASE("saddle pushforward ratio") {
  auto m = builtin("saddle_weight(2,1)").manifold;
  const double lambda = 0.05, eps = 1e-3;
  PotentialSpec s = build_potential(m, vec2(0, 0), vec2(1, 0), 4.0, lambda);
  CHECK(s.alpha0 == 0.0);
  CubeSet A = make_cube(m, s.x0, Mat::Identity(2, 2), eps);
  const double mA = cube_measure(A).value;
  const double expected = std::exp(lambda * lambda);
  const double jac = transported_measure(s, 1.0, A).value / mA;
  CHECK(std::abs(jac / expected - 1) <= 3 * eps * lambda);
  auto p = pushforward_raster(s, 1.0, A, quick());
  CHECK(std::abs(p.raster.value / mA / expected - 1) <= 3 * (p.raster.error / mA + eps * lambda));
}

TEST_CASE("degenerate cube") {
  auto e = builtin("euclidean(2)").manifold;
  PotentialSpec s = build_potential(e, vec2(0, 0), vec2(1, 0), 3.0, 0.1);
  CubeSet A = make_cube(e, s.x0, Mat::Identity(2, 2), 0.0);
  auto mid = midpoint_raster(s, A, 0.5, quick());
  CHECK(mid.raster.marked_lines == 1);
  CHECK(mid.raster.value == doctest::Approx(0.0).scale(1e-12));
}

TEST_CASE("theta brackets for flat squares") {
  auto e = builtin("euclidean(2)").manifold;
  const double eps = 0.01;
  Vec v = vec2(0.3, 0.4);
  ParamSet A = square(vec2(0, 0), eps), B = square(v, eps);
  const double pos = theta(e, A, B, 1.0), neg = theta(e, A, B, -1.0);
  CHECK(pos >= v.norm() - eps * std::sqrt(2.0) - 1e-12);
  CHECK(pos <= v.norm());
  CHECK(neg >= v.norm());
  CHECK(neg <= v.norm() + eps * std::sqrt(2.0) + 1e-12);
  CHECK(theta(e, A, A, 0.0) == 0.0);
}

TEST_CASE("flat Brunn-Minkowski is an equality for translates") {
  auto e = builtin("euclidean(2)").manifold;
  PotentialSpec s = build_potential(e, vec2(0.5, 0.5), vec2(0.6, 0.8), 2.0, 0.1);
  CubeSet A = curvature_aligned_cube(s, 1e-4);
  BMReport r = bm_check(s, A, 0.5, 0.0, 2.0, quick());
  CHECK(r.theta == doctest::Approx(0.1).epsilon(0.01));
  CHECK(r.margin >= -r.error);
  CHECK(std::abs(r.margin) <= 2 * r.error + 1e-9);
  CHECK_THROWS_AS(bm_check(s, A, 0.0, 0.0, 2.0), InputError);
  CHECK_THROWS_AS(bm_check(s, A, 0.5, 0.0, 1.0), InputError);
}

TEST_CASE("interpolation defect") {
  auto e = builtin("euclidean(2)").manifold;
  PotentialSpec se = build_potential(e, vec2(0, 0), vec2(1, 0), 3.0, 0.1);
  CHECK(std::abs(interpolation_defect(se, 0.0, 3.0).defect) <= 1e-12);

  auto m = builtin("saddle_weight(2,1)").manifold;
  double prev = 0;
  for (double lambda : {0.05, 0.025}) {
    PotentialSpec s = build_potential(m, vec2(0, 0), vec2(1, 0), 4.0, lambda);
    auto r = interpolation_defect(s, 0.0, 4.0);
    CHECK(r.D0 == 1.0);
    CHECK(r.defect > 0);
    if (prev > 0) CHECK(r.defect_over_lambda2 == doctest::Approx(prev).epsilon(0.05));
    prev = r.defect_over_lambda2;
  }

  auto sp = builtin("sphere(2,1)").manifold;
  Vec x0 = vec2(0.1, 0.1), v0 = vec2(0, 1);
  v0 /= std::sqrt(norm2(sp, x0, v0));
  PotentialSpec ss = build_potential(sp, x0, v0, 2.0, 0.1);
  CHECK(interpolation_defect(ss, 1.0, 2.0).defect <= 1e-10);
}

TEST_CASE("renyi entropy") {
  const double mA = 0.25;
  std::vector<double> rho(4, 1 / mA), w(4, mA / 4);
  CHECK(renyi_entropy(rho, w, 3.0) == doctest::Approx(-std::pow(mA, 1 / 3.0)));
  double prev = 0;
  for (double N : {2.0, 8.0, 64.0, 1024.0}) {
    const double v = renyi_entropy(rho, w, N);
    CHECK(v < prev);
    prev = v;
  }
  // -m(A)^{1/N} tends to minus the total mass
  CHECK(prev == doctest::Approx(-1.0).epsilon(2e-3));
  std::vector<double> bad(4, 1.0);
  CHECK_THROWS_AS(renyi_entropy(bad, w, 3.0), InputError);
  CHECK_THROWS_AS(renyi_entropy(rho, std::vector<double>(3, 0.1), 3.0), InputError);
}

TEST_CASE("cd check along a flat transport") {
  auto e = builtin("euclidean(2)").manifold;
  PotentialSpec s = build_potential(e, vec2(0, 0), vec2(1, 0), 3.0, 0.1);
  CubeSet A = curvature_aligned_cube(s, 1e-4);
  auto r = cd_check_along_transport(s, A, 0.0, 3.0, {0.25, 0.5, 0.75});
  REQUIRE(r.margin.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(r.normalized[k]) <= 1e-8);
  CHECK_THROWS_AS(cd_check_along_transport(s, A, 0.0, 3.0, {0.3}), InputError);
}

TEST_CASE("linear midpoint model") {
  for (const char* name : {"euclidean(2)", "sphere(2,1)", "saddle_weight(2,1)"}) {
    CAPTURE(name);
    auto m = builtin(name).manifold;
    Vec x0 = vec2(0.05, 0.1), v0 = vec2(1, 0);
    v0 /= std::sqrt(norm2(m, x0, v0));
    PotentialSpec s = build_potential(m, x0, v0, 4.0, 0.1);
    auto ops = midpoint_operators(s);
    CubeSet A = curvature_aligned_cube(s, 1e-4);
    CHECK(linear_problem_violation(ops, A) <= 1e-10);
    CHECK(midpoint_inclusion_distance(s, ops, A) <= 1e-6);
  }
}

TEST_CASE("counterexample preconditions") {
  auto sp = builtin("sphere(2,1)").manifold;
  CHECK_THROWS_AS(counterexample_search(sp, 1.0, 2.0, 0.1, vec2(0, 0), vec2(1, 0), {0.1}), PreconditionError);
  auto e = builtin("euclidean(2)").manifold;
  CHECK_THROWS_AS(counterexample_search(e, -1.0, 3.0, 0.1, vec2(0, 0), vec2(1, 0), {0.1}), PreconditionError);
}

TEST_CASE("midpoint control summary") {
  CounterexampleReport r;
  CHECK_FALSE(midpoint_control(r).bounded);
  for (double l : {0.1, 0.05}) {
    CounterexampleStage s;
    s.lambda = l;
    s.eps = std::pow(l, 4);
    s.midpoint_ratio = 0.0;
    r.stages.push_back(s);
  }
  auto c = midpoint_control(r);
  CHECK(c.bounded);
  CHECK(c.C_star == 0.0);
  r.stages[1].midpoint_ratio = 1.0;
  CHECK_FALSE(midpoint_control(r).bounded);
}

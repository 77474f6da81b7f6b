#include <doctest.h>

#include <cmath>

#include "bmcd/error.hpp"
#include "bmcd/jacobi.hpp"
#include "bmcd/zoo.hpp"

using namespace bmcd;

TEST_CASE("Euclidean field is affine") {
  auto m = builtin("euclidean(3)").manifold;
  Vec p = Vec::Zero(3), v(3);
  v << 1, 0.5, 0;
  Mat H0(3, 3);
  H0 << 0.2, 0.1, 0, 0.1, -0.3, 0, 0, 0, 0.4;
  auto path = integrate_geodesic(m, p, v, 64);
  auto f = jacobi_matrix_field(m, path, H0, 5.0);
  for (std::size_t k = 0; k < f.samples(); k += 8) {
    const double t = path.t[k];
    Mat expected = Mat::Identity(3, 3) + t * H0;
    CHECK((f.J[k] - expected).norm() <= 1e-12);
    CHECK(f.det[k] == doctest::Approx(expected.determinant()));
    CHECK(f.distortion[k] == doctest::Approx(std::pow(expected.determinant(), 0.2)));
  }
  // N = n works on flat unweighted space
  CHECK_NOTHROW(jacobi_matrix_field(m, path, 0.1 * Mat::Identity(3, 3), 3.0));
  CHECK_THROWS_AS(jacobi_matrix_field(m, path, H0, 2.0), InputError);
}

TEST_CASE("sphere field with zero Hessian follows cos") {
  auto m = builtin("sphere(2,1)").manifold;
  Vec p = Vec::Zero(2), v(2);
  v << 0.4, 0.0;  // speed 0.8 in g
  auto path = integrate_geodesic(m, p, v, 128);
  for (bool closed : {true, false}) {
    JacobiOptions o;
    o.use_closed_form = closed;
    auto f = jacobi_matrix_field(m, path, Mat::Zero(2, 2), 3.0, o);
    for (std::size_t k = 0; k < f.samples(); k += 16) CHECK(f.det[k] == doctest::Approx(std::cos(0.8 * path.t[k])).epsilon(1e-7));
    CHECK(riccati_residual(m, f).value <= 1e-4);
  }
}

TEST_CASE("focal point") {
  auto m = builtin("sphere(2,1)").manifold;
  Vec p = Vec::Zero(2), v(2);
  v << 0.9, 0.0;  // speed 1.8 > pi/2
  auto path = integrate_geodesic(m, p, v, 256);
  try {
    jacobi_matrix_field(m, path, Mat::Zero(2, 2), 3.0);
    FAIL("expected a focal point");
  } catch (const FocalPointError& e) {
    CHECK(e.time() == doctest::Approx(M_PI / 2 / 1.8).epsilon(1e-2));
  }
}

TEST_CASE("remainder term") {
  Mat U = Mat::Identity(2, 2);
  CHECK(remainder_value(U, -1.0, 3.0) == doctest::Approx(0.0));
  CHECK(remainder_value(U, 0.0, 3.0) == doctest::Approx(2.0 / 3.0));
  Mat W(2, 2);
  W << 1, 0, 0, -1;
  CHECK(remainder_value(W, 0.0, 2.0) == doctest::Approx(2.0));
}

TEST_CASE("reparametrized field scales with lambda") {
  auto m = builtin("gaussian(2,1)").manifold;
  Vec x(2), v(2);
  x << 0.1, 0.2;
  v << 1, 0;
  auto f = reparametrized_field(m, x, v, 0.5, Mat::Identity(2, 2), 4.0, 64);
  CHECK(f.det.back() == doctest::Approx(1.5 * 1.5));
  CHECK(f.path.end()(0) == doctest::Approx(0.6));
  CHECK(riccati_residual(m, f).value <= 1e-3);
}

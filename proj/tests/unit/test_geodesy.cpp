#include <doctest.h>

#include <cmath>
#include <random>

#include "bmcd/error.hpp"
#include "bmcd/geodesy.hpp"
#include "bmcd/zoo.hpp"

using namespace bmcd;

namespace {

GeodesicOptions numeric() {
  GeodesicOptions o;
  o.use_closed_form = false;
  return o;
}

}  // namespace

TEST_CASE("numeric exp matches closed form") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (const char* name : {"sphere(2,1)", "sphere(3,1)", "hyperbolic(2)", "euclidean(2)"}) {
    CAPTURE(name);
    auto m = builtin(name).manifold;
    const double s = name[0] == 'h' ? 0.4 : 1.0;
    for (int k = 0; k < 5; ++k) {
      Vec p(m.dim()), v(m.dim());
      for (int i = 0; i < m.dim(); ++i) {
        p(i) = s * u(rng);
        v(i) = s * u(rng);
      }
      Vec a = exp_map(m, p, v), b = exp_map(m, p, v, numeric());
      CHECK((a - b).norm() <= 1e-8);
      Vec la = log_map(m, p, a), lb = log_map(m, p, a, numeric());
      CHECK((la - v).norm() <= 1e-9);
      CHECK((lb - v).norm() <= 1e-7);
      CHECK(geodesic_distance(m, p, a) == doctest::Approx(std::sqrt(norm2(m, p, v))).epsilon(1e-10));
      CHECK(geodesic_distance(m, p, a, numeric()) == doctest::Approx(std::sqrt(norm2(m, p, v))).epsilon(1e-7));
    }
  }
}

TEST_CASE("sphere distance along a meridian") {
  auto m = builtin("sphere(2,1)").manifold;
  Vec p = Vec::Zero(2), q(2);
  q << std::tan(0.5), 0.0;  // polar angle 1 from the south pole
  CHECK(geodesic_distance(m, p, q) == doctest::Approx(1.0));
  CHECK(geodesic_distance(m, p, q, numeric()) == doctest::Approx(1.0).epsilon(1e-8));
  auto path = integrate_geodesic(m, p, log_map(m, p, q));
  CHECK(path_length(m, path) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("parallel transport is an isometry") {
  auto m = builtin("sphere(2,1)").manifold;
  Vec p(2), v(2);
  p << 0.1, 0.2;
  v << 0.5, -0.3;
  auto path = integrate_geodesic(m, p, v);
  Mat E = orthonormal_frame(m, p, v);
  auto frames = parallel_transport(m, path, E);
  for (std::size_t k = 0; k < frames.size(); k += 32) {
    Mat G = frames[k].transpose() * m.metric(path.x[k]) * frames[k];
    CHECK((G - Mat::Identity(2, 2)).norm() <= 1e-9);
  }
  // the velocity is parallel along its own geodesic
  auto vel = parallel_transport(m, path, v);
  CHECK((vel.back() - path.xdot.back()).norm() <= 1e-9);
}

TEST_CASE("orthonormal frame") {
  auto m = builtin("hyperbolic(3)").manifold;
  Vec p(3);
  p << 0.1, -0.2, 0.05;
  Vec pref(3);
  pref << 1, 1, 0;
  Mat E = orthonormal_frame(m, p, pref);
  CHECK((E.transpose() * m.metric(p) * E - Mat::Identity(3, 3)).norm() <= 1e-12);
  CHECK((E.col(0).normalized() - pref.normalized()).norm() <= 1e-12);
}

TEST_CASE("normal chart round trip and pulled-back metric") {
  auto m = builtin("sphere(2,1)").manifold;
  Vec x0(2);
  x0 << 0.2, 0.1;
  NormalChart c = normal_chart(m, x0, orthonormal_frame(m, x0));
  Vec u(2);
  u << 0.05, -0.03;
  CHECK((c.inverse(c.forward(u)) - u).norm() <= 1e-10);
  CHECK((c.pulled_back_metric(Vec::Zero(2)) - Mat::Identity(2, 2)).norm() <= 1e-8);
}

TEST_CASE("leaving the chart") {
  auto m = builtin("hyperbolic(2)").manifold;
  Vec p = Vec::Zero(2), v(2);
  v << 5.0, 0.0;
  CHECK_THROWS_AS(integrate_geodesic(m, p, v), DomainExitError);
  CHECK_THROWS_AS(integrate_geodesic(m, p, v, 4), InputError);
  Vec q(2);
  q << 0.99, 0;
  CHECK_THROWS_AS(log_map(m.without_closed_forms(), p, q * 10), Error);
}

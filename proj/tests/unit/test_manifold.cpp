#include <doctest.h>

#include <random>

#include "bmcd/error.hpp"
#include "bmcd/manifold.hpp"
#include "bmcd/zoo.hpp"

using namespace bmcd;

namespace {

Vec random_point(const ChartManifold& m, std::mt19937_64& rng, double shrink) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec x(m.dim());
  for (int i = 0; i < m.dim(); ++i) {
    const double c = 0.5 * (m.domain().lo(i) + m.domain().hi(i));
    const double r = 0.5 * (m.domain().hi(i) - m.domain().lo(i));
    x(i) = c + shrink * r * u(rng);
  }
  return x;
}

}  // namespace

TEST_CASE("metric must be SPD") {
  Box box{Vec::Constant(2, -1), Vec::Constant(2, 1)};
  auto m = ChartManifold::from_strings(2, box, {"1", "2", "1"}, "0");
  CHECK_THROWS_AS(m.metric(Vec::Zero(2)), ModelError);
  auto ok = ChartManifold::from_strings(2, box, {"1 + x1^2", "0", "1"}, "x2");
  CHECK(ok.metric(Vec::Ones(2))(0, 0) == 2.0);
  CHECK(ok.density(Vec::Ones(2)) == doctest::Approx(std::exp(-1.0) * std::sqrt(2.0)));
  CHECK_THROWS_AS(ChartManifold::from_strings(2, box, {"1", "0"}, "0"), InputError);
}

TEST_CASE("Box helpers") {
  Box box{Vec::Constant(2, -1), Vec::Constant(2, 1)};
  Vec x(2);
  x << 0.5, -0.2;
  CHECK(box.contains(x));
  CHECK(box.margin_of(x) == doctest::Approx(0.5));
  CHECK_FALSE(box.contains(x, 0.6));
}

TEST_CASE("closed forms agree with the expression pipeline") {
  std::mt19937_64 rng(3);
  for (const char* name : {"sphere(2,1)", "sphere(3,2)", "hyperbolic(2)", "gaussian(2,1)", "saddle_weight(3,1)"}) {
    CAPTURE(name);
    auto entry = builtin(name);
    const ChartManifold& a = entry.manifold;
    const ChartManifold b = a.without_closed_forms();
    for (int k = 0; k < 5; ++k) {
      Vec x = random_point(a, rng, 0.4);
      auto sa = a.metric_with_derivatives(x), sb = b.metric_with_derivatives(x);
      CHECK((sa.g - sb.g).norm() <= 1e-12 * sa.g.norm());
      for (int i = 0; i < a.dim(); ++i) CHECK((sa.dg[i] - sb.dg[i]).norm() <= 1e-10 * (1 + sa.dg[i].norm()));
      CHECK(a.potential(x) == doctest::Approx(b.potential(x)));
      CHECK((a.potential_gradient(x) - b.potential_gradient(x)).norm() <= 1e-12);
      CHECK((a.potential_hessian(x) - b.potential_hessian(x)).norm() <= 1e-12);
      Mat ra = modified_ricci_at(a, x, a.dim() + 1.5), rb = modified_ricci_at(b, x, a.dim() + 1.5);
      CHECK((ra - rb).norm() <= 1e-6 * (1 + ra.norm()));
    }
  }
}

TEST_CASE("constant curvature Ricci is (n - 1) K g") {
  std::mt19937_64 rng(4);
  for (auto [name, K] : {std::pair{"sphere(3,1)", 1.0}, std::pair{"sphere(2,2)", 0.25}, std::pair{"hyperbolic(3)", -1.0}}) {
    CAPTURE(name);
    const ChartManifold m = builtin(name).manifold.without_closed_forms();
    Vec x = random_point(m, rng, 0.3);
    Curvature c = curvature_at(m, x);
    Mat g = m.metric(x);
    CHECK((c.ricci - (m.dim() - 1) * K * g).norm() <= 1e-6 * g.norm());
    // sectional curvature on the first two chart axes
    Vec e1 = Vec::Unit(m.dim(), 0), e2 = Vec::Unit(m.dim(), 1);
    double num = inner(m, x, c.apply(e1, e2, e2), e1);
    double den = g(0, 0) * g(1, 1) - g(0, 1) * g(0, 1);
    CHECK(num / den == doctest::Approx(K).epsilon(1e-6));
  }
}

TEST_CASE("modified Ricci of weighted flat spaces") {
  auto g = builtin("gaussian(2,1)").manifold;
  Vec x(2);
  x << 0.3, -0.4;
  Mat r = modified_ricci_at(g, x, 3.0);
  Mat expected = Mat::Identity(2, 2) - x * x.transpose();
  CHECK((r - expected).norm() <= 1e-12);
  auto s = builtin("saddle_weight(2,1)").manifold;
  Mat rs = modified_ricci_at(s, x, 4.0);
  CHECK(rs(0, 0) == doctest::Approx(-2.0 - 4.0 * 0.09 / 2.0));
  CHECK(rs(1, 1) == doctest::Approx(0.0));
  CHECK_THROWS_AS(modified_ricci_at(g, x, 2.0), InputError);
  CHECK((modified_ricci_at(builtin("euclidean(2)").manifold, x, 2.0)).norm() == 0.0);
}

TEST_CASE("covariant Hessian and gradient") {
  auto m = builtin("sphere(2,1)").manifold;
  Box box = m.domain();
  auto w = ChartManifold(2, box, {m.metric_expr(0, 0), m.metric_expr(1, 0), m.metric_expr(1, 1)},
                         parse_expression("x1", 2));
  Vec x(2);
  x << 0.2, 0.1;
  Vec grad = potential_riemannian_gradient(w, x);
  CHECK((w.metric(x) * grad - Vec::Unit(2, 0)).norm() <= 1e-12);
  Mat H = covariant_hessian_potential(w, x);
  Christoffel c = christoffel_at(w, x);
  CHECK(H(0, 1) == doctest::Approx(-c.gamma[0](0, 1)));
  CHECK((H - H.transpose()).norm() <= 1e-12);
}

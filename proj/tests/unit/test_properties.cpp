#include <doctest.h>

#include <cmath>
#include <random>

#include "bmcd/bm.hpp"
#include "bmcd/distortion.hpp"
#include "bmcd/error.hpp"
#include "bmcd/jacobi.hpp"
#include "bmcd/zoo.hpp"

using namespace bmcd;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec random_vec(std::mt19937_64& rng, int n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

Vec unit(const ChartManifold& m, const Vec& x, Vec v) { return v / std::sqrt(norm2(m, x, v)); }

}  // namespace

TEST_CASE("lowered Riemann tensor symmetries") {
  std::mt19937_64 rng(31);
  for (const char* name : {"sphere(3,1)", "hyperbolic(3)"}) {
    const ChartManifold m = builtin(name).manifold.without_closed_forms();
    for (int s = 0; s < 3; ++s) {
      Vec x = random_vec(rng, 3, 0.2);
      Curvature c = curvature_at(m, x);
      Mat g = m.metric(x);
      auto low = [&](int l, int i, int j, int k) {
        double r = 0;
        for (int p = 0; p < 3; ++p) r += g(l, p) * c(p, i, j, k);
        return r;
      };
      double worst = 0;
      for (int l = 0; l < 3; ++l)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
              worst = std::max(worst, std::abs(low(l, i, j, k) + low(l, j, i, k)));
              worst = std::max(worst, std::abs(low(l, i, j, k) + low(k, i, j, l)));
            }
      CHECK(worst <= 1e-5);
    }
  }
}

TEST_CASE("unweighted modified Ricci is Ricci") {
  const ChartManifold m = builtin("sphere(2,1)").manifold.without_closed_forms();
  Vec x = vec2(0.3, -0.2);
  Mat ric = curvature_at(m, x).ricci;
  for (double N : {2.0, 3.5, 10.0}) CHECK((modified_ricci_at(m, x, N) - ric).norm() == 0.0);
}

TEST_CASE("exp and log are inverse and distance is symmetric") {
  std::mt19937_64 rng(32);
  for (const char* name : {"sphere(2,1)", "hyperbolic(2)"}) {
    const ChartManifold m = builtin(name).manifold.without_closed_forms();
    const double r = 0.5 * m.injectivity_bound();
    for (int s = 0; s < 10; ++s) {
      Vec p = random_vec(rng, 2, 0.15);
      Vec v = unit(m, p, random_vec(rng, 2, 1.0)) * r * std::uniform_real_distribution<double>(0.05, 1.0)(rng);
      Vec q;
      try {
        q = exp_map(m, p, v);
      } catch (const DomainExitError&) {
        continue;
      }
      CHECK((log_map(m, p, q) - v).norm() <= 1e-6);
      CHECK(geodesic_distance(m, p, q) == doctest::Approx(geodesic_distance(m, q, p)).epsilon(1e-7));
    }
  }
}

TEST_CASE("RK4 converges with order four") {
  auto m = builtin("sphere(2,1)").manifold;
  Vec p = vec2(0.1, 0.2), v = vec2(0.6, -0.4);
  const Vec exact = m.closed_forms().exp(p, v);
  const double e1 = (integrate_geodesic(m, p, v, 16).end() - exact).norm();
  const double e2 = (integrate_geodesic(m, p, v, 32).end() - exact).norm();
  const double order = std::log2(e1 / e2);
  CHECK(order >= 3.5);
  CHECK(order <= 4.5);
}

TEST_CASE("Jacobi fields: positivity, remainder sign, frame independence") {
  std::mt19937_64 rng(33);
  auto m = builtin("gaussian(2,1)").manifold;
  for (int s = 0; s < 5; ++s) {
    Vec x = random_vec(rng, 2, 0.5), v = random_vec(rng, 2, 0.5);
    Mat H = random_vec(rng, 4, 0.5).reshaped(2, 2);
    H = (0.5 * (H + H.transpose())).eval();
    auto path = integrate_geodesic(m, x, v, 64);
    auto f = jacobi_matrix_field(m, path, H, 3.5);
    for (std::size_t k = 0; k < f.samples(); ++k) {
      CHECK(f.det[k] > 0);
      CHECK(f.remainder[k] >= 0);
    }
    // rotate the initial frame, expressing H0 in the new frame
    const double a = std::uniform_real_distribution<double>(0, 2 * M_PI)(rng);
    Mat Q(2, 2);
    Q << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    JacobiOptions o;
    o.frame0 = orthonormal_frame(m, x, v) * Q;
    auto g = jacobi_matrix_field(m, path, Q.transpose() * H * Q, 3.5, o);
    for (std::size_t k = 0; k < f.samples(); k += 8) {
      CHECK(g.det[k] == doctest::Approx(f.det[k]).epsilon(1e-8));
      CHECK(g.distortion[k] == doctest::Approx(f.distortion[k]).epsilon(1e-8));
      CHECK(g.remainder[k] == doctest::Approx(f.remainder[k]).epsilon(1e-8).scale(1e-8));
    }
  }
}

TEST_CASE("remainder vanishes at the start of the seeded field") {
  for (const char* name : {"gaussian(2,1)", "sphere(2,1)", "saddle_weight(2,1)"}) {
    CAPTURE(name);
    auto m = builtin(name).manifold;
    Vec x0 = vec2(0.2, 0.1);
    Vec v0 = unit(m, x0, vec2(1, 0.5));
    PotentialSpec s = build_potential(m, x0, v0, 3.0, 0.1);
    auto f = reparametrized_field(m, x0, v0, s.lambda, s.alpha0 * Mat::Identity(2, 2), 3.0, 64);
    CHECK(f.remainder[0] == doctest::Approx(0.0).scale(1e-12));
  }
}

TEST_CASE("Riccati residual decays quadratically") {
  auto m = builtin("sphere(2,1)").manifold;
  Vec x = vec2(0.1, 0.1), v = vec2(0.5, 0.2);
  Mat H = 0.3 * Mat::Identity(2, 2);
  const double r1 = riccati_residual(m, jacobi_matrix_field(m, integrate_geodesic(m, x, v, 64), H, 3)).value;
  const double r2 = riccati_residual(m, jacobi_matrix_field(m, integrate_geodesic(m, x, v, 128), H, 3)).value;
  CHECK(std::log2(r1 / r2) >= 1.7);
}

TEST_CASE("equality-case functions satisfy the ODE") {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const double Lambda = 8 * u(rng) - 2, f0 = u(rng), f1 = u(rng);
    auto f = SampledFunction::from([&](double s) { return sigma(Lambda, 1, 1 - s, 1) * f0 + sigma(Lambda, 1, s, 1) * f1; });
    if (midpoint_inequality_defect(f, Lambda).value < -1e-9) continue;
    CHECK(ode_defect(f, Lambda).value >= -1e-3);
  }
}

TEST_CASE("potential Hessian scales linearly in lambda") {
  auto m = builtin("sphere(2,1)").manifold;
  Vec x0 = vec2(0.1, 0.0);
  Vec v0 = unit(m, x0, vec2(1, 0));
  std::vector<double> sup;
  for (double lambda : {0.2, 0.1, 0.05}) {
    PotentialOptions o;
    o.lambda_max = 0.2;
    o.r_cut = 0.5;
    PotentialSpec s = build_potential(m, x0, v0, 3.0, lambda, o);
    double best = 0;
    for (double a = -0.24; a <= 0.24; a += 0.06)
      for (double b = -0.24; b <= 0.24; b += 0.06) best = std::max(best, lambda * s.hessian_normal(vec2(a, b)).norm());
    sup.push_back(best);
  }
  CHECK(sup[0] / sup[1] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(sup[1] / sup[2] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("raster refinement is consistent") {
  auto m = builtin("sphere(2,1)").manifold;
  Vec x0 = vec2(0.1, 0.2);
  PotentialSpec s = build_potential(m, x0, unit(m, x0, vec2(1, 1)), 3.0, 0.1);
  CubeSet A = curvature_aligned_cube(s, 1e-4);
  RasterOptions a, b;
  a.lines_per_side = 512;
  b.lines_per_side = 1024;
  auto pa = pushforward_raster(s, 0.5, A, a), pb = pushforward_raster(s, 0.5, A, b);
  const double change = std::abs(pa.raster.value - pb.raster.value);
  CHECK(change < 0.03 * pb.raster.value);
  CHECK(change <= pa.raster.error);
}

TEST_CASE("counterexample stage bookkeeping") {
  auto m = builtin("saddle_weight(2,1)").manifold;
  RasterOptions o;
  o.lines_per_side = 4096;
  auto r = counterexample_search(m, 0.0, 4.0, 0.1, vec2(0, 0), vec2(1, 0), {0.1, 0.07}, o);
  REQUIRE(r.stages.size() >= 1);
  CHECK(r.ricci == doctest::Approx(-2.0));
  for (const auto& st : r.stages) {
    CHECK(st.eps == doctest::Approx(std::pow(st.lambda, 4)));
    CHECK(st.theta_offset <= 2.0);
    CHECK(st.comparability <= 1.1);
    CHECK(st.interpolation.defect_over_lambda2 == doctest::Approx(1.0 / 16).epsilon(0.02));
    CHECK(st.bm.margin < 0);
  }
}

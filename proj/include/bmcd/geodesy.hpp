#pragma once

#include <optional>
#include <vector>

#include "bmcd/manifold.hpp"

namespace bmcd {

struct GeodesicOptions {
  int steps = 256;
  /// Use a manifold's closed-form exp/log/distance when it has them.
  bool use_closed_form = true;
};

/// Constant-speed geodesic on [0, 1] sampled at steps + 1 uniform times.
struct GeodesicPath {
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> xdot;
  Vec v0;
  int steps = 0;

  const Vec& start() const { return x.front(); }
  const Vec& end() const { return x.back(); }
};

/// Classic RK4 for x'' + Gamma(x', x') = 0. Throws DomainExitError, InputError if steps < 8.
GeodesicPath integrate_geodesic(const ChartManifold& m, const Vec& p, const Vec& v, int steps = 256);

/// Length of a sampled path, Simpson's rule on the speed (steps even) or trapezoid.
double path_length(const ChartManifold& m, const GeodesicPath& path);

Vec exp_map(const ChartManifold& m, const Vec& p, const Vec& v, const GeodesicOptions& opt = {});

/// Shooting with Newton steps on v; Jacobian from central differences of exp.
/// Throws ConvergenceError if the residual is not below 1e-9 within 50 iterations.
Vec log_map(const ChartManifold& m, const Vec& p, const Vec& q, const GeodesicOptions& opt = {});

double geodesic_distance(const ChartManifold& m, const Vec& p, const Vec& q, const GeodesicOptions& opt = {});

/// Parallel transport of the columns of `w` along `path`; returns one matrix per sample.
std::vector<Mat> parallel_transport(const ChartManifold& m, const GeodesicPath& path, const Mat& w);
std::vector<Vec> parallel_transport(const ChartManifold& m, const GeodesicPath& path, const Vec& w);

/// Gram-Schmidt in g(p) on (preferred, d_1, ..., d_n), skipping dependent vectors. Columns of the result.
Mat orthonormal_frame(const ChartManifold& m, const Vec& p, const std::optional<Vec>& preferred = std::nullopt);

/// Riemannian normal coordinates u -> exp_{x0}(E u).
class NormalChart {
 public:
  NormalChart(const ChartManifold& m, Vec x0, Mat basis, GeodesicOptions opt = {});

  const Vec& center() const { return x0_; }
  const Mat& basis() const { return basis_; }
  const ChartManifold& manifold() const { return *m_; }

  Vec forward(const Vec& u) const;
  Vec inverse(const Vec& x) const;
  /// d forward / du by central differences.
  Mat forward_jacobian(const Vec& u, double h = 1e-5) const;
  /// Metric pulled back to normal coordinates.
  Mat pulled_back_metric(const Vec& u, double h = 1e-5) const;

 private:
  const ChartManifold* m_;
  Vec x0_;
  Mat basis_;
  Mat g0_;
  GeodesicOptions opt_;
};

NormalChart normal_chart(const ChartManifold& m, const Vec& x0, const Mat& basis, const GeodesicOptions& opt = {});

}  // namespace bmcd

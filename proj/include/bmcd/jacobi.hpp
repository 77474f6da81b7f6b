#pragma once

#include <optional>
#include <vector>

#include "bmcd/geodesy.hpp"

namespace bmcd {

/// Matrix Jacobi field J'' + R(J, x') x' = 0 along a geodesic, in a parallel orthonormal frame.
struct MatrixJacobiField {
  int n = 0;
  double N = 0.0;
  GeodesicPath path;
  std::vector<Mat> frame;      // e_a(t_k) as chart columns
  Mat H0;                      // J'(0), frame components
  std::vector<Mat> J;
  std::vector<Mat> Jdot;
  std::vector<Mat> U;          // J' J^{-1}
  std::vector<double> det;     // det J
  std::vector<double> weighted;    // e^{-(V(x(t)) - V(x(0)))} det J
  std::vector<double> distortion;  // weighted^{1/N}
  std::vector<double> weight_slope;  // dV(x'(t)) = g(x', grad V)
  std::vector<double> remainder;

  std::size_t samples() const { return J.size(); }
};

struct JacobiOptions {
  /// Use a constant sectional curvature override for R when the manifold has one.
  bool use_closed_form = true;
  /// Initial parallel frame (columns, g-orthonormal at the start). Default: orthonormal_frame(x, x'(0)).
  std::optional<Mat> frame0;
};

/// Integrates the Jacobi system with RK4 on the path's own grid and fills every profile.
/// Throws FocalPointError if det J reaches zero, InputError on N < n or on N = n with a
/// weight that is not stationary along the path.
MatrixJacobiField jacobi_matrix_field(const ChartManifold& m, const GeodesicPath& path, const Mat& H0, double N,
                                      const JacobiOptions& opt = {});

/// ||U - tr U / n Id||^2 + n / (N (N - n)) ((N - n) / n tr U + dV(x'))^2; the second term is
/// dropped for N = n.
double remainder_term(const MatrixJacobiField& field, std::size_t k);
double remainder_value(const Mat& U, double weight_slope, double N);

struct RiccatiResidual {
  double value = 0.0;
  std::size_t argmax = 0;
};

/// max_k | -N D''/D - Ric^{N,m}(x', x') - E | over interior grid nodes, D'' by central differences.
RiccatiResidual riccati_residual(const ChartManifold& m, const MatrixJacobiField& field);

/// Field along s -> exp_x(s lambda v) with initial Hessian lambda H0.
MatrixJacobiField reparametrized_field(const ChartManifold& m, const Vec& x, const Vec& v, double lambda,
                                       const Mat& H0, double N, int steps = 256, const JacobiOptions& opt = {});

}  // namespace bmcd

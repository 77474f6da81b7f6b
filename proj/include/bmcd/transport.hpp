#pragma once

// Potential-driven transport maps T_t(x) = exp_x(t lambda grad psi(x)) and their differentials.

#include <functional>
#include <memory>
#include <optional>

#include "bmcd/geodesy.hpp"

namespace bmcd {

/// psi(u) = (<v0_u, u> + alpha0 |u|^2 / 2) chi(|u| / r_cut) in normal coordinates u at x0,
/// chi(s) = 1 - S(2s - 1) on [1/2, 1] with S(x) = 35x^4 - 84x^5 + 70x^6 - 20x^7 (C^3), 1 below, 0 above.
struct PotentialSpec {
  const ChartManifold* manifold = nullptr;
  Vec x0;
  Vec v0;      // unit in g(x0)
  Vec v0_u;    // v0 in normal coordinates
  double alpha0 = 0.0;
  double lambda = 0.0;
  double r_cut = 0.0;
  double N = 0.0;
  std::shared_ptr<const NormalChart> chart;

  double psi_normal(const Vec& u) const;
  Vec gradient_normal(const Vec& u) const;
  Mat hessian_normal(const Vec& u) const;

  double psi(const Vec& x) const;
  /// Riemannian gradient of psi (not scaled by lambda), chart components.
  Vec gradient(const Vec& x) const;
  bool in_core(const Vec& x) const;
};

double bump(double s);

struct PotentialOptions {
  double r_cut = 0.0;       // 0: min(0.25 * chart margin at x0, 10 lambda)
  double lambda_max = 0.1;
  GeodesicOptions geodesic;
};

/// Validates inputs, builds the normal chart with basis led by v0, and audits grad psi(x0) = v0,
/// Hess psi(x0) = alpha0 Id to 1e-6 (throws EstimatorError otherwise).
PotentialSpec build_potential(const ChartManifold& m, const Vec& x0, const Vec& v0, double N, double lambda,
                              const PotentialOptions& opt = {});

/// Largest deviation from the prescribed first and second order data of psi at x0.
double potential_audit(const PotentialSpec& spec);

/// exp_x(t lambda grad psi(x)); x must lie in the chi = 1 core.
Vec transport_map(const PotentialSpec& spec, double t, const Vec& x);

/// Covariant Hessian of f at x in the g-orthonormal frame `frame`, from Richardson-extrapolated
/// second differences of f o exp_x with steps h and h/2.
Mat frame_hessian(const ChartManifold& m, const Vec& x, const Mat& frame, const std::function<double(const Vec&)>& f,
                  double h = 1e-2);

/// Covariant Hessian of psi (unscaled) at x in `frame`.
Mat potential_hessian(const PotentialSpec& spec, const Vec& x, const Mat& frame);

struct TransportDifferential {
  Mat hessian_identity;  // Hess(d_z^2 / 2 + t lambda psi)(x), z = T_t(x)
  Mat jacobian;          // d/du of frame coordinates of log_x(T_t(exp_x(E u))) at u = 0
  Mat frame;
  double discrepancy = 0.0;
};

/// Both estimates in a g-orthonormal frame at x (default orthonormal_frame(x)); throws EstimatorError
/// if they differ by more than `tolerance` entrywise.
TransportDifferential transport_differential(const PotentialSpec& spec, double t, const Vec& x,
                                             const std::optional<Mat>& frame = std::nullopt, double tolerance = 1e-4);

struct HessianDistSq {
  Mat exact;
  Mat model;  // Id - R_y(x0) / 3
};

/// Curvature form R_y(x0)(v, w) = g(R(v, L) L, w), L = log_x0(y), in `frame`.
Mat curvature_form(const ChartManifold& m, const Vec& x0, const Vec& y, const Mat& frame,
                   const GeodesicOptions& opt = {});

/// `h` is the finite-difference step of the exact Hessian.
HessianDistSq hessian_dist_sq(const ChartManifold& m, const Vec& x0, const Vec& y,
                              const std::optional<Mat>& frame = std::nullopt, const GeodesicOptions& opt = {},
                              double h = 2e-3);

struct MidpointOperators {
  Mat R;   // R_{y0}(x0) in the potential's normal frame
  Mat M1;  // Id + R / 6
  Mat M2;  // (1 + lambda alpha0) Id - R / 3
  Mat M3;  // (M1 + M2) / 2
  double lambda = 0.0;
  double alpha0 = 0.0;
  Vec y0;
};

/// Throws ModelError if some M_i is not SPD.
MidpointOperators midpoint_operators(const PotentialSpec& spec);

}  // namespace bmcd

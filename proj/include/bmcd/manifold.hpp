#pragma once

// Weighted Riemannian manifold (M, g, m = e^{-V} vol_g) presented in a single chart.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bmcd/expr.hpp"
#include "bmcd/linalg.hpp"

namespace bmcd {

/// Axis-aligned chart domain.
struct Box {
  Vec lo;
  Vec hi;

  bool contains(const Vec& x, double margin = 0.0) const;
  double margin_of(const Vec& x) const;  // distance to the nearest face (negative outside)
};

/// Metric and its first partials at a point: dg[k](i, j) = d_k g_ij.
struct MetricSample {
  Mat g;
  std::vector<Mat> dg;
};

/// Closed-form overrides a built-in manifold may provide. Every member is optional.
struct ClosedForms {
  std::function<MetricSample(const Vec&)> metric;
  std::function<double(const Vec&)> potential;
  std::function<Vec(const Vec&)> potential_gradient;
  std::function<Mat(const Vec&)> potential_hessian;
  std::function<Vec(const Vec&, const Vec&)> exp;       // (p, v) -> exp_p(v)
  std::function<Vec(const Vec&, const Vec&)> log;       // (p, q) -> log_p(q)
  std::function<double(const Vec&, const Vec&)> distance;
  std::function<Mat(const Vec&)> ricci;                 // chart components
  std::optional<double> sectional_curvature;            // constant-curvature models
};

class ChartManifold {
 public:
  /// `metric_lower` holds g_ij for i >= j in row order: g11, g21, g22, g31, ...
  ChartManifold(int dim, Box domain, std::vector<Expr> metric_lower, Expr potential, std::string name = {});

  static ChartManifold from_strings(int dim, Box domain, const std::vector<std::string>& metric_lower,
                                    const std::string& potential, std::string name = {});

  ChartManifold& set_closed_forms(ClosedForms cf);
  /// Same manifold with every closed-form override removed (pure expression pipeline).
  ChartManifold without_closed_forms() const;

  int dim() const { return dim_; }
  const Box& domain() const { return domain_; }
  const std::string& name() const { return name_; }
  const ClosedForms& closed_forms() const { return closed_; }
  bool has_closed_form_geodesics() const { return bool(closed_.exp) && bool(closed_.log); }

  double h_curv() const { return h_curv_; }
  void set_h_curv(double h) { h_curv_ = h; }
  /// Length scale below which geodesics from any chart point are minimizing.
  double injectivity_bound() const { return injectivity_bound_; }
  void set_injectivity_bound(double r) { injectivity_bound_ = r; }

  const Expr& metric_expr(int i, int j) const;  // 0-based
  const Expr& potential_expr() const { return potential_; }
  bool has_weight() const { return !potential_.is_constant(0.0); }

  /// Metric at x, verified SPD (min eigenvalue > 1e-12); throws ModelError otherwise.
  Mat metric(const Vec& x) const;
  MetricSample metric_with_derivatives(const Vec& x) const;

  double potential(const Vec& x) const;
  Vec potential_gradient(const Vec& x) const;  // chart partials d_i V
  Mat potential_hessian(const Vec& x) const;   // chart partials d_i d_j V
  /// Density of m with respect to chart Lebesgue measure: e^{-V} sqrt(det g).
  double density(const Vec& x) const;

  void require_in_domain(const Vec& x, double margin = 0.0) const;

 private:
  int dim_;
  Box domain_;
  std::vector<Expr> metric_;             // full n*n, symmetric
  std::vector<Expr> metric_partials_;    // [k*n*n + i*n + j] = d_k g_ij
  Expr potential_;
  std::vector<Expr> potential_grad_;
  std::vector<Expr> potential_hess_;
  std::string name_;
  ClosedForms closed_;
  double h_curv_ = 1e-4;
  double injectivity_bound_ = 1.0;
};

/// Christoffel symbols of the second kind: gamma[k](i, j) = Gamma^k_ij.
struct Christoffel {
  std::vector<Mat> gamma;

  /// Contraction Gamma^k_ij a^i b^j.
  Vec contract(const Vec& a, const Vec& b) const;
};

/// Riemann tensor R^l_ijk (R(d_i, d_j) d_k = R^l_ijk d_l) with its Ricci trace.
struct Curvature {
  int n = 0;
  std::vector<double> riemann;  // [((l*n + i)*n + j)*n + k]
  Mat ricci;

  double operator()(int l, int i, int j, int k) const { return riemann[((l * n + i) * n + j) * n + k]; }
  /// R(a, b) c in chart components.
  Vec apply(const Vec& a, const Vec& b, const Vec& c) const;
};

Mat metric_at(const ChartManifold& m, const Vec& x);
Christoffel christoffel_at(const ChartManifold& m, const Vec& x);
/// Derivatives of Gamma use a fourth-order central stencil of step h_curv; x must keep
/// a 2*h_curv margin from the chart boundary.
Curvature curvature_at(const ChartManifold& m, const Vec& x);
/// Ric + Hess V - dV (x) dV / (N - n), as a chart bilinear form. N = n requires dV(x) = 0.
Mat modified_ricci_at(const ChartManifold& m, const Vec& x, double N);
/// Covariant Hessian d_i d_j V - Gamma^k_ij d_k V.
Mat covariant_hessian_potential(const ChartManifold& m, const Vec& x);
/// Riemannian gradient g^{-1} dV.
Vec potential_riemannian_gradient(const ChartManifold& m, const Vec& x);

/// Squared g-norm of v at x.
double norm2(const ChartManifold& m, const Vec& x, const Vec& v);
double inner(const ChartManifold& m, const Vec& x, const Vec& a, const Vec& b);

}  // namespace bmcd

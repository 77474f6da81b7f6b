#include "bmcd/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "bmcd/error.hpp"

namespace bmcd {

namespace {

std::span<const double> coords(const Vec& x) { return {x.data(), static_cast<std::size_t>(x.size())}; }

std::string fmt(const Vec& x) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(x(i));
  }
  return s + ")";
}

}  // namespace

bool Box::contains(const Vec& x, double margin) const { return margin_of(x) >= margin; }

double Box::margin_of(const Vec& x) const {
  double m = INFINITY;
  for (Eigen::Index i = 0; i < x.size(); ++i) m = std::min({m, x(i) - lo(i), hi(i) - x(i)});
  return m;
}

ChartManifold::ChartManifold(int dim, Box domain, std::vector<Expr> metric_lower, Expr potential, std::string name)
    : dim_(dim), domain_(std::move(domain)), potential_(std::move(potential)), name_(std::move(name)) {
  if (dim < 2) throw InputError("manifold dimension must be >= 2");
  if (domain_.lo.size() != dim || domain_.hi.size() != dim) throw InputError("domain box has wrong dimension");
  for (int i = 0; i < dim; ++i)
    if (!(domain_.lo(i) < domain_.hi(i))) throw InputError("domain box is empty along axis " + std::to_string(i + 1));
  const std::size_t expected = static_cast<std::size_t>(dim * (dim + 1) / 2);
  if (metric_lower.size() != expected)
    throw InputError("expected " + std::to_string(expected) + " metric entries, got " +
                     std::to_string(metric_lower.size()));
  for (const auto& e : metric_lower)
    if (e.max_variable() > dim) throw InputError("metric entry references a variable beyond x" + std::to_string(dim));
  if (potential_.max_variable() > dim) throw InputError("potential references a variable beyond x" + std::to_string(dim));

  const int n = dim;
  metric_.resize(static_cast<std::size_t>(n * n));
  std::size_t c = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j, ++c) {
      metric_[i * n + j] = metric_lower[c];
      metric_[j * n + i] = metric_lower[c];
    }
  metric_partials_.resize(static_cast<std::size_t>(n * n * n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        Expr d = metric_[i * n + j].derivative(k + 1);
        metric_partials_[(k * n + i) * n + j] = d;
        metric_partials_[(k * n + j) * n + i] = d;
      }
  potential_grad_.resize(static_cast<std::size_t>(n));
  potential_hess_.resize(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) potential_grad_[i] = potential_.derivative(i + 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      Expr d = potential_grad_[i].derivative(j + 1);
      potential_hess_[i * n + j] = d;
      potential_hess_[j * n + i] = d;
    }
}

ChartManifold ChartManifold::from_strings(int dim, Box domain, const std::vector<std::string>& metric_lower,
                                          const std::string& potential, std::string name) {
  std::vector<Expr> g;
  g.reserve(metric_lower.size());
  for (const auto& s : metric_lower) g.push_back(parse_expression(s, dim));
  Expr v = potential.empty() ? Expr::constant(0.0) : parse_expression(potential, dim);
  return ChartManifold(dim, std::move(domain), std::move(g), std::move(v), std::move(name));
}

ChartManifold& ChartManifold::set_closed_forms(ClosedForms cf) {
  closed_ = std::move(cf);
  return *this;
}

ChartManifold ChartManifold::without_closed_forms() const {
  ChartManifold copy = *this;
  copy.closed_ = ClosedForms{};
  return copy;
}

const Expr& ChartManifold::metric_expr(int i, int j) const { return metric_.at(static_cast<std::size_t>(i * dim_ + j)); }

void ChartManifold::require_in_domain(const Vec& x, double margin) const {
  if (x.size() != dim_) throw InputError("point has dimension " + std::to_string(x.size()) + ", expected " +
                                         std::to_string(dim_));
  if (!x.allFinite()) throw InputError("point has non-finite coordinates");
  if (!domain_.contains(x, margin)) {
    if (margin > 0.0 && domain_.contains(x))
      throw InputError("point " + fmt(x) + " is closer than " + std::to_string(margin) + " to the chart boundary");
    throw InputError("point " + fmt(x) + " lies outside the chart domain");
  }
}

Mat ChartManifold::metric(const Vec& x) const {
  Mat g(dim_, dim_);
  if (closed_.metric) {
    g = closed_.metric(x).g;
  } else {
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j <= i; ++j) g(i, j) = g(j, i) = metric_[i * dim_ + j].evaluate(coords(x));
  }
  if (!is_spd(g)) throw ModelError("metric is not positive definite at " + fmt(x));
  return g;
}

MetricSample ChartManifold::metric_with_derivatives(const Vec& x) const {
  MetricSample s;
  if (closed_.metric) {
    s = closed_.metric(x);
  } else {
    const int n = dim_;
    s.g.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) s.g(i, j) = s.g(j, i) = metric_[i * n + j].evaluate(coords(x));
    s.dg.assign(static_cast<std::size_t>(n), Mat(n, n));
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j)
          s.dg[k](i, j) = s.dg[k](j, i) = metric_partials_[(k * n + i) * n + j].evaluate(coords(x));
  }
  if (!is_spd(s.g)) throw ModelError("metric is not positive definite at " + fmt(x));
  return s;
}

double ChartManifold::potential(const Vec& x) const {
  if (closed_.potential) return closed_.potential(x);
  return potential_.evaluate(coords(x));
}

Vec ChartManifold::potential_gradient(const Vec& x) const {
  if (closed_.potential_gradient) return closed_.potential_gradient(x);
  Vec d(dim_);
  for (int i = 0; i < dim_; ++i) d(i) = potential_grad_[i].evaluate(coords(x));
  return d;
}

Mat ChartManifold::potential_hessian(const Vec& x) const {
  if (closed_.potential_hessian) return closed_.potential_hessian(x);
  Mat h(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) h(i, j) = potential_hess_[i * dim_ + j].evaluate(coords(x));
  return h;
}

double ChartManifold::density(const Vec& x) const {
  return std::exp(-potential(x)) * std::sqrt(metric(x).determinant());
}

Vec Christoffel::contract(const Vec& a, const Vec& b) const {
  Vec out(static_cast<Eigen::Index>(gamma.size()));
  for (std::size_t k = 0; k < gamma.size(); ++k) out(static_cast<Eigen::Index>(k)) = a.dot(gamma[k] * b);
  return out;
}

Vec Curvature::apply(const Vec& a, const Vec& b, const Vec& c) const {
  Vec out = Vec::Zero(n);
  for (int l = 0; l < n; ++l) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double aibj = a(i) * b(j);
        if (aibj == 0.0) continue;
        for (int k = 0; k < n; ++k) s += (*this)(l, i, j, k) * aibj * c(k);
      }
    out(l) = s;
  }
  return out;
}

Mat metric_at(const ChartManifold& m, const Vec& x) {
  m.require_in_domain(x);
  return m.metric(x);
}

namespace {

Christoffel christoffel_unchecked(const ChartManifold& m, const Vec& x) {
  const int n = m.dim();
  const MetricSample s = m.metric_with_derivatives(x);
  const Mat ginv = s.g.llt().solve(Mat::Identity(n, n));
  // First kind: c[l](i, j) = 1/2 (d_i g_jl + d_j g_il - d_l g_ij).
  std::vector<Mat> first(static_cast<std::size_t>(n), Mat(n, n));
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) first[l](i, j) = 0.5 * (s.dg[i](j, l) + s.dg[j](i, l) - s.dg[l](i, j));
  Christoffel c;
  c.gamma.assign(static_cast<std::size_t>(n), Mat::Zero(n, n));
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      if (ginv(k, l) == 0.0) continue;
      c.gamma[k] += ginv(k, l) * first[l];
    }
  for (auto& gk : c.gamma) gk = sym(gk);
  return c;
}

}  // namespace

Christoffel christoffel_at(const ChartManifold& m, const Vec& x) {
  m.require_in_domain(x);
  return christoffel_unchecked(m, x);
}

Curvature curvature_at(const ChartManifold& m, const Vec& x) {
  const int n = m.dim();
  const double h = m.h_curv();
  m.require_in_domain(x, 2.0 * h);

  const Christoffel g0 = christoffel_unchecked(m, x);
  // dgamma[i][l](j, k) = d_i Gamma^l_jk
  std::vector<std::vector<Mat>> dgamma(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto at = [&](double step) {
      Vec y = x;
      y(i) += step;
      return christoffel_unchecked(m, y);
    };
    const Christoffel p2 = at(2 * h), p1 = at(h), m1 = at(-h), m2 = at(-2 * h);
    dgamma[i].resize(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l)
      dgamma[i][l] = (m2.gamma[l] - 8.0 * m1.gamma[l] + 8.0 * p1.gamma[l] - p2.gamma[l]) / (12.0 * h);
  }

  Curvature c;
  c.n = n;
  c.riemann.assign(static_cast<std::size_t>(n * n * n * n), 0.0);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double r = dgamma[i][l](j, k) - dgamma[j][l](i, k);
          for (int q = 0; q < n; ++q) r += g0.gamma[l](i, q) * g0.gamma[q](j, k) - g0.gamma[l](j, q) * g0.gamma[q](i, k);
          c.riemann[((l * n + i) * n + j) * n + k] = r;
        }
  c.ricci = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) c.ricci(j, k) += c(i, i, j, k);
  return c;
}

Mat covariant_hessian_potential(const ChartManifold& m, const Vec& x) {
  m.require_in_domain(x);
  const Christoffel c = christoffel_unchecked(m, x);
  const Vec dv = m.potential_gradient(x);
  Mat h = m.potential_hessian(x);
  for (int k = 0; k < m.dim(); ++k) h -= dv(k) * c.gamma[k];
  return sym(h);
}

Vec potential_riemannian_gradient(const ChartManifold& m, const Vec& x) {
  return m.metric(x).llt().solve(m.potential_gradient(x));
}

Mat modified_ricci_at(const ChartManifold& m, const Vec& x, double N) {
  const int n = m.dim();
  if (!(N >= n)) throw InputError("effective dimension N must be >= n");
  m.require_in_domain(x);
  const Vec dv = m.potential_gradient(x);
  if (N == n && dv.lpNorm<Eigen::Infinity>() > 1e-10)
    throw InputError("N = n requires a stationary weight at the query point");
  Mat ric = m.closed_forms().ricci ? m.closed_forms().ricci(x) : curvature_at(m, x).ricci;
  if (!m.has_weight()) return ric;
  Mat out = ric + covariant_hessian_potential(m, x);
  if (N > n) out -= dv * dv.transpose() / (N - n);
  return sym(out);
}

double norm2(const ChartManifold& m, const Vec& x, const Vec& v) { return v.dot(m.metric(x) * v); }

double inner(const ChartManifold& m, const Vec& x, const Vec& a, const Vec& b) { return a.dot(m.metric(x) * b); }

}  // namespace bmcd

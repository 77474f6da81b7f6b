#include "bmcd/geodesy.hpp"

#include <cmath>

#include "bmcd/error.hpp"

namespace bmcd {

namespace {

// State (x, xdot, W) for the geodesic equation coupled with parallel transport of W's columns.
struct State {
  Vec x;
  Vec xdot;
  Mat w;
};

State derivative(const ChartManifold& m, const State& s) {
  const Christoffel c = christoffel_at(m, s.x);
  const auto n = s.x.size();
  State d;
  d.x = s.xdot;
  d.xdot = -c.contract(s.xdot, s.xdot);
  d.w = Mat(n, s.w.cols());
  if (s.w.cols() > 0) {
    // (Gamma^k_ij xdot^i) w^j
    Mat a(n, n);
    for (Eigen::Index k = 0; k < n; ++k) a.row(k) = s.xdot.transpose() * c.gamma[k];
    d.w = -a * s.w;
  }
  return d;
}

State axpy(const State& s, double h, const State& d) { return {s.x + h * d.x, s.xdot + h * d.xdot, s.w + h * d.w}; }

bool inside(const ChartManifold& m, const Vec& x) { return x.allFinite() && m.domain().contains(x); }

// Integrates the coupled system; fills path samples and (optionally) transported matrices.
void integrate(const ChartManifold& m, const Vec& p, const Vec& v, const Mat& w0, int steps, GeodesicPath* path,
               std::vector<Mat>* frames) {
  if (steps < 8) throw InputError("geodesic integration needs at least 8 steps");
  m.require_in_domain(p);
  if (v.size() != p.size()) throw InputError("tangent vector has the wrong dimension");
  const double h = 1.0 / steps;
  State s{p, v, w0};
  if (path) {
    path->t.assign(1, 0.0);
    path->x.assign(1, p);
    path->xdot.assign(1, v);
    path->v0 = v;
    path->steps = steps;
    path->t.reserve(steps + 1);
    path->x.reserve(steps + 1);
    path->xdot.reserve(steps + 1);
  }
  if (frames) frames->assign(1, w0);
  for (int k = 0; k < steps; ++k) {
    const double t0 = k * h;
    auto stage = [&](const State& st, double t) {
      if (!inside(m, st.x)) throw DomainExitError(t, "geodesic left the chart domain");
      return derivative(m, st);
    };
    const State k1 = stage(s, t0);
    const State k2 = stage(axpy(s, 0.5 * h, k1), t0 + 0.5 * h);
    const State k3 = stage(axpy(s, 0.5 * h, k2), t0 + 0.5 * h);
    const State k4 = stage(axpy(s, h, k3), t0 + h);
    s.x += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    s.xdot += h / 6.0 * (k1.xdot + 2.0 * k2.xdot + 2.0 * k3.xdot + k4.xdot);
    s.w += h / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w);
    if (!inside(m, s.x)) throw DomainExitError(t0 + h, "geodesic left the chart domain");
    if (path) {
      path->t.push_back((k + 1) * h);
      path->x.push_back(s.x);
      path->xdot.push_back(s.xdot);
    }
    if (frames) frames->push_back(s.w);
  }
  if (path) path->t.back() = 1.0;
}

}  // namespace

GeodesicPath integrate_geodesic(const ChartManifold& m, const Vec& p, const Vec& v, int steps) {
  GeodesicPath path;
  integrate(m, p, v, Mat(p.size(), 0), steps, &path, nullptr);
  return path;
}

double path_length(const ChartManifold& m, const GeodesicPath& path) {
  const int s = path.steps;
  std::vector<double> speed(path.x.size());
  for (std::size_t k = 0; k < path.x.size(); ++k) speed[k] = std::sqrt(norm2(m, path.x[k], path.xdot[k]));
  const double h = 1.0 / s;
  double sum = 0.0;
  if (s % 2 == 0) {
    for (int k = 0; k <= s; ++k) sum += speed[k] * (k == 0 || k == s ? 1.0 : (k % 2 ? 4.0 : 2.0));
    return sum * h / 3.0;
  }
  for (int k = 0; k <= s; ++k) sum += speed[k] * (k == 0 || k == s ? 0.5 : 1.0);
  return sum * h;
}

Vec exp_map(const ChartManifold& m, const Vec& p, const Vec& v, const GeodesicOptions& opt) {
  if (v.size() != p.size()) throw InputError("tangent vector has the wrong dimension");
  if (v.isZero(0.0)) {
    m.require_in_domain(p);
    return p;
  }
  if (opt.use_closed_form && m.closed_forms().exp) {
    m.require_in_domain(p);
    Vec q = m.closed_forms().exp(p, v);
    if (!inside(m, q)) throw DomainExitError(1.0, "exponential map left the chart domain");
    return q;
  }
  GeodesicPath path;
  integrate(m, p, v, Mat(p.size(), 0), opt.steps, &path, nullptr);
  return path.end();
}

Vec log_map(const ChartManifold& m, const Vec& p, const Vec& q, const GeodesicOptions& opt) {
  m.require_in_domain(p);
  m.require_in_domain(q);
  if (opt.use_closed_form && m.closed_forms().log) return m.closed_forms().log(p, q);
  const auto n = p.size();
  if (q == p) return Vec::Zero(n);

  GeodesicOptions numeric = opt;
  numeric.use_closed_form = false;
  auto residual_of = [&](const Vec& v) -> std::optional<Vec> {
    try {
      return Vec(exp_map(m, p, v, numeric) - q);
    } catch (const DomainExitError&) {
      return std::nullopt;
    }
  };

  Vec v = q - p;
  std::optional<Vec> r = residual_of(v);
  if (!r) throw ConvergenceError(INFINITY, "log map: initial shot leaves the chart domain");
  double rn = r->norm();
  const double target = 1e-13 * std::max(1.0, q.norm());
  for (int it = 0; it < 50 && rn > target; ++it) {
    const double h = 1e-6 * std::max(1.0, v.norm());
    Mat jac(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      Vec vp = v, vm = v;
      vp(j) += h;
      vm(j) -= h;
      auto fp = residual_of(vp), fm = residual_of(vm);
      if (!fp || !fm) throw ConvergenceError(rn, "log map: Jacobian probe leaves the chart domain");
      jac.col(j) = (*fp - *fm) / (2.0 * h);
    }
    const Vec step = jac.partialPivLu().solve(*r);
    if (!step.allFinite()) throw ConvergenceError(rn, "log map: singular shooting Jacobian");
    double scale = 1.0;
    bool improved = false;
    for (int tries = 0; tries < 20; ++tries, scale *= 0.5) {
      const Vec cand = v - scale * step;
      auto rc = residual_of(cand);
      if (rc && rc->norm() < rn) {
        v = cand;
        r = rc;
        rn = rc->norm();
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  if (!(rn < 1e-9)) throw ConvergenceError(rn, "log map did not converge");
  return v;
}

double geodesic_distance(const ChartManifold& m, const Vec& p, const Vec& q, const GeodesicOptions& opt) {
  if (opt.use_closed_form && m.closed_forms().distance) {
    m.require_in_domain(p);
    m.require_in_domain(q);
    return m.closed_forms().distance(p, q);
  }
  const Vec v = log_map(m, p, q, opt);
  return std::sqrt(norm2(m, p, v));
}

std::vector<Mat> parallel_transport(const ChartManifold& m, const GeodesicPath& path, const Mat& w) {
  if (path.x.empty()) throw InputError("empty geodesic path");
  std::vector<Mat> frames;
  integrate(m, path.start(), path.v0, w, path.steps, nullptr, &frames);
  return frames;
}

std::vector<Vec> parallel_transport(const ChartManifold& m, const GeodesicPath& path, const Vec& w) {
  const auto frames = parallel_transport(m, path, Mat(w));
  std::vector<Vec> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(f.col(0));
  return out;
}

Mat orthonormal_frame(const ChartManifold& m, const Vec& p, const std::optional<Vec>& preferred) {
  m.require_in_domain(p);
  const auto n = p.size();
  const Mat g = m.metric(p);
  std::vector<Vec> candidates;
  if (preferred) {
    if (preferred->size() != n) throw InputError("preferred vector has the wrong dimension");
    if (!(preferred->dot(g * *preferred) > 0.0)) throw InputError("preferred frame vector has zero norm");
    candidates.push_back(*preferred);
  }
  for (Eigen::Index i = 0; i < n; ++i) candidates.push_back(Vec::Unit(n, i));

  Mat e(n, n);
  Eigen::Index count = 0;
  for (const Vec& c : candidates) {
    if (count == n) break;
    const double c_norm = std::sqrt(c.dot(g * c));
    Vec u = c;
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index k = 0; k < count; ++k) u -= e.col(k).dot(g * u) * e.col(k);
    const double u_norm = std::sqrt(u.dot(g * u));
    if (u_norm <= 1e-10 * c_norm) continue;
    e.col(count++) = u / u_norm;
  }
  return e;
}

NormalChart::NormalChart(const ChartManifold& m, Vec x0, Mat basis, GeodesicOptions opt)
    : m_(&m), x0_(std::move(x0)), basis_(std::move(basis)), opt_(opt) {
  m.require_in_domain(x0_);
  g0_ = m.metric(x0_);
  const auto n = x0_.size();
  if (basis_.rows() != n || basis_.cols() != n) throw InputError("normal chart basis has the wrong shape");
  const Mat gram = basis_.transpose() * g0_ * basis_;
  if ((gram - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
    throw InputError("normal chart basis is not orthonormal at the center");
}

Vec NormalChart::forward(const Vec& u) const { return exp_map(*m_, x0_, basis_ * u, opt_); }

Vec NormalChart::inverse(const Vec& x) const { return basis_.transpose() * g0_ * log_map(*m_, x0_, x, opt_); }

Mat NormalChart::forward_jacobian(const Vec& u, double h) const {
  const auto n = u.size();
  Mat d(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Vec up = u, um = u;
    up(j) += h;
    um(j) -= h;
    d.col(j) = (forward(up) - forward(um)) / (2.0 * h);
  }
  return d;
}

Mat NormalChart::pulled_back_metric(const Vec& u, double h) const {
  const Mat d = forward_jacobian(u, h);
  return sym(d.transpose() * m_->metric(forward(u)) * d);
}

NormalChart normal_chart(const ChartManifold& m, const Vec& x0, const Mat& basis, const GeodesicOptions& opt) {
  return NormalChart(m, x0, basis, opt);
}

}  // namespace bmcd

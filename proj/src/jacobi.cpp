#include "bmcd/jacobi.hpp"

#include <cmath>

#include "bmcd/error.hpp"

namespace bmcd {

namespace {

struct State {
  Vec x;
  Vec xdot;
  Mat e;
  Mat j;
  Mat jdot;
};

State axpy(const State& s, double h, const State& d) {
  return {s.x + h * d.x, s.xdot + h * d.xdot, s.e + h * d.e, s.j + h * d.j, s.jdot + h * d.jdot};
}

// Frame matrix A_ac = g(R(e_c, x') x', e_a).
Mat curvature_operator(const ChartManifold& m, const Vec& x, const Vec& u, const Mat& e, bool closed) {
  const Mat g = m.metric(x);
  const auto& cf = m.closed_forms();
  if (closed && cf.sectional_curvature) {
    const Vec b = e.transpose() * (g * u);
    return *cf.sectional_curvature * (u.dot(g * u) * (e.transpose() * g * e) - b * b.transpose());
  }
  const Curvature c = curvature_at(m, x);
  Mat re(e.rows(), e.cols());
  for (Eigen::Index k = 0; k < e.cols(); ++k) re.col(k) = c.apply(e.col(k), u, u);
  return sym(e.transpose() * g * re);
}

State derivative(const ChartManifold& m, const State& s, bool closed) {
  const Christoffel c = christoffel_at(m, s.x);
  const auto n = s.x.size();
  Mat a(n, n);
  for (Eigen::Index k = 0; k < n; ++k) a.row(k) = s.xdot.transpose() * c.gamma[k];
  State d;
  d.x = s.xdot;
  d.xdot = -c.contract(s.xdot, s.xdot);
  d.e = -a * s.e;
  d.j = s.jdot;
  d.jdot = -curvature_operator(m, s.x, s.xdot, s.e, closed) * s.j;
  return d;
}

bool inside(const ChartManifold& m, const Vec& x) { return x.allFinite() && m.domain().contains(x); }

}  // namespace

double remainder_value(const Mat& U, double weight_slope, double N) {
  const auto n = U.rows();
  const double tr = U.trace();
  const double traceless = (U - tr / n * Mat::Identity(n, n)).squaredNorm();
  if (N == n) return traceless;
  const double b = (N - n) / n * tr + weight_slope;
  return traceless + n / (N * (N - n)) * b * b;
}

double remainder_term(const MatrixJacobiField& field, std::size_t k) {
  return remainder_value(field.U.at(k), field.weight_slope.at(k), field.N);
}

MatrixJacobiField jacobi_matrix_field(const ChartManifold& m, const GeodesicPath& path, const Mat& H0, double N,
                                      const JacobiOptions& opt) {
  const int n = m.dim();
  if (!(N >= n)) throw InputError("effective dimension N must be >= n");
  if (path.x.empty() || path.steps < 8) throw InputError("invalid geodesic path");
  if (H0.rows() != n || H0.cols() != n) throw InputError("initial Hessian has the wrong shape");
  if ((H0 - H0.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, H0.cwiseAbs().maxCoeff()))
    throw InputError("initial Hessian must be symmetric");

  const Vec& x0 = path.start();
  Mat e0;
  if (opt.frame0) {
    e0 = *opt.frame0;
    const Mat gram = e0.transpose() * m.metric(x0) * e0;
    if (e0.rows() != n || e0.cols() != n || (gram - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
      throw InputError("initial frame is not orthonormal");
  } else if (path.v0.squaredNorm() > 0.0) {
    e0 = orthonormal_frame(m, x0, path.v0);
  } else {
    e0 = orthonormal_frame(m, x0);
  }

  MatrixJacobiField f;
  f.n = n;
  f.N = N;
  f.H0 = H0;
  f.path.v0 = path.v0;
  f.path.steps = path.steps;

  const int steps = path.steps;
  const double h = 1.0 / steps;
  State s{x0, path.v0, e0, Mat::Identity(n, n), H0};
  auto record = [&](const State& st, double t) {
    f.path.t.push_back(t);
    f.path.x.push_back(st.x);
    f.path.xdot.push_back(st.xdot);
    f.frame.push_back(st.e);
    f.J.push_back(st.j);
    f.Jdot.push_back(st.jdot);
  };
  record(s, 0.0);
  for (int k = 0; k < steps; ++k) {
    const double t0 = k * h;
    auto stage = [&](const State& st, double t) {
      if (!inside(m, st.x)) throw DomainExitError(t, "geodesic left the chart domain");
      return derivative(m, st, opt.use_closed_form);
    };
    const State k1 = stage(s, t0);
    const State k2 = stage(axpy(s, 0.5 * h, k1), t0 + 0.5 * h);
    const State k3 = stage(axpy(s, 0.5 * h, k2), t0 + 0.5 * h);
    const State k4 = stage(axpy(s, h, k3), t0 + h);
    s.x += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    s.xdot += h / 6.0 * (k1.xdot + 2.0 * k2.xdot + 2.0 * k3.xdot + k4.xdot);
    s.e += h / 6.0 * (k1.e + 2.0 * k2.e + 2.0 * k3.e + k4.e);
    s.j += h / 6.0 * (k1.j + 2.0 * k2.j + 2.0 * k3.j + k4.j);
    s.jdot += h / 6.0 * (k1.jdot + 2.0 * k2.jdot + 2.0 * k3.jdot + k4.jdot);
    if (!inside(m, s.x)) throw DomainExitError(t0 + h, "geodesic left the chart domain");
    record(s, k + 1 == steps ? 1.0 : t0 + h);
  }

  const double v_start = m.potential(x0);
  const std::size_t count = f.J.size();
  f.det.resize(count);
  f.U.resize(count);
  f.weighted.resize(count);
  f.distortion.resize(count);
  f.weight_slope.resize(count);
  f.remainder.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    f.det[k] = f.J[k].determinant();
    if (!(f.det[k] > 0.0)) {
      const double d0 = f.det[k - 1], d1 = f.det[k];
      const double tc = f.path.t[k - 1] + (f.path.t[k] - f.path.t[k - 1]) * d0 / (d0 - d1);
      throw FocalPointError(std::isfinite(tc) ? tc : f.path.t[k]);
    }
    f.U[k] = f.Jdot[k] * f.J[k].inverse();
    f.weight_slope[k] = m.potential_gradient(f.path.x[k]).dot(f.path.xdot[k]);
    if (N == n && std::abs(f.weight_slope[k]) > 1e-8)
      throw InputError("N = n requires the weight to be stationary along the geodesic");
    f.weighted[k] = std::exp(-(m.potential(f.path.x[k]) - v_start)) * f.det[k];
    f.distortion[k] = std::pow(f.weighted[k], 1.0 / N);
    f.remainder[k] = remainder_value(f.U[k], f.weight_slope[k], N);
  }
  f.J[0] = Mat::Identity(n, n);
  f.Jdot[0] = H0;
  f.det[0] = 1.0;
  f.weighted[0] = 1.0;
  f.distortion[0] = 1.0;
  return f;
}

RiccatiResidual riccati_residual(const ChartManifold& m, const MatrixJacobiField& field) {
  if (field.path.steps < 64) throw InputError("Riccati residual needs at least 64 steps");
  const double h = 1.0 / field.path.steps;
  RiccatiResidual out;
  for (std::size_t k = 1; k + 1 < field.samples(); ++k) {
    const auto& D = field.distortion;
    const double d2 = (D[k + 1] - 2.0 * D[k] + D[k - 1]) / (h * h);
    const Vec& u = field.path.xdot[k];
    const double ric = u.dot(modified_ricci_at(m, field.path.x[k], field.N) * u);
    const double r = std::abs(-field.N * d2 / D[k] - ric - field.remainder[k]);
    if (r > out.value) {
      out.value = r;
      out.argmax = k;
    }
  }
  return out;
}

MatrixJacobiField reparametrized_field(const ChartManifold& m, const Vec& x, const Vec& v, double lambda,
                                       const Mat& H0, double N, int steps, const JacobiOptions& opt) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw InputError("lambda must lie in (0, 1]");
  const GeodesicPath path = integrate_geodesic(m, x, lambda * v, steps);
  JacobiOptions o = opt;
  if (!o.frame0 && v.squaredNorm() > 0.0) o.frame0 = orthonormal_frame(m, x, v);
  return jacobi_matrix_field(m, path, lambda * H0, N, o);
}

}  // namespace bmcd

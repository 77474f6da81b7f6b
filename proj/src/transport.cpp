#include "bmcd/transport.hpp"

#include <cmath>

#include "bmcd/error.hpp"

namespace bmcd {

namespace {

struct Chi {
  double value, d1, d2;  // chi(s), chi'(s), chi''(s)
};

Chi chi(double s) {
  if (s <= 0.5) return {1.0, 0.0, 0.0};
  if (s >= 1.0) return {0.0, 0.0, 0.0};
  const double x = 2.0 * s - 1.0, x2 = x * x, x3 = x2 * x, x4 = x3 * x;
  const double S = x4 * (35.0 - 84.0 * x + 70.0 * x2 - 20.0 * x3);
  const double S1 = x3 * (140.0 - 420.0 * x + 420.0 * x2 - 140.0 * x3);
  const double S2 = x2 * (420.0 - 1680.0 * x + 2100.0 * x2 - 840.0 * x3);
  return {1.0 - S, -2.0 * S1, -4.0 * S2};
}

}  // namespace

double bump(double s) { return chi(s).value; }

double PotentialSpec::psi_normal(const Vec& u) const {
  const double q = v0_u.dot(u) + 0.5 * alpha0 * u.squaredNorm();
  return q * chi(u.norm() / r_cut).value;
}

Vec PotentialSpec::gradient_normal(const Vec& u) const {
  const double r = u.norm();
  const Chi c = chi(r / r_cut);
  const Vec dq = v0_u + alpha0 * u;
  if (c.d1 == 0.0) return c.value * dq;
  const double q = v0_u.dot(u) + 0.5 * alpha0 * u.squaredNorm();
  return c.value * dq + q * (c.d1 / (r_cut * r)) * u;
}

Mat PotentialSpec::hessian_normal(const Vec& u) const {
  const auto n = u.size();
  const double r = u.norm();
  const Chi c = chi(r / r_cut);
  const Mat I = Mat::Identity(n, n);
  if (c.d1 == 0.0 && c.d2 == 0.0) return c.value * alpha0 * I;
  const double q = v0_u.dot(u) + 0.5 * alpha0 * u.squaredNorm();
  const Vec dq = v0_u + alpha0 * u;
  const Vec dc = (c.d1 / (r_cut * r)) * u;
  const Mat uu = u * u.transpose() / (r * r);
  const Mat d2c = c.d2 / (r_cut * r_cut) * uu + c.d1 / r_cut * (I - uu) / r;
  return c.value * alpha0 * I + dq * dc.transpose() + dc * dq.transpose() + q * d2c;
}

double PotentialSpec::psi(const Vec& x) const { return psi_normal(chart->inverse(x)); }

Vec PotentialSpec::gradient(const Vec& x) const {
  const Vec u = chart->inverse(x);
  const Mat d = chart->forward_jacobian(u);
  const Vec du = d.transpose().partialPivLu().solve(gradient_normal(u));  // chart differential of psi
  return manifold->metric(x).llt().solve(du);
}

bool PotentialSpec::in_core(const Vec& x) const { return chart->inverse(x).norm() <= 0.5 * r_cut; }

PotentialSpec build_potential(const ChartManifold& m, const Vec& x0, const Vec& v0, double N, double lambda,
                              const PotentialOptions& opt) {
  const int n = m.dim();
  m.require_in_domain(x0);
  if (v0.size() != n) throw InputError("direction has the wrong dimension");
  if (!(N >= n)) throw InputError("effective dimension N must be >= n");
  const Mat g = m.metric(x0);
  if (std::abs(std::sqrt(v0.dot(g * v0)) - 1.0) > 1e-10) throw InputError("direction v0 must have unit length");
  if (!(lambda > 0.0 && lambda <= opt.lambda_max))
    throw InputError("lambda must lie in (0, " + std::to_string(opt.lambda_max) + "]");

  PotentialSpec s;
  s.manifold = &m;
  s.x0 = x0;
  s.v0 = v0;
  s.N = N;
  s.lambda = lambda;
  const double slope = m.potential_gradient(x0).dot(v0);
  if (N == n) {
    if (std::abs(slope) > 1e-10) throw InputError("N = n requires a weight that is stationary along v0");
    s.alpha0 = 0.0;
  } else {
    s.alpha0 = -slope / (N - n);
  }
  if (opt.r_cut > 0.0) {
    s.r_cut = opt.r_cut;
  } else {
    const double scale = std::sqrt(Eigen::SelfAdjointEigenSolver<Mat>(g, Eigen::EigenvaluesOnly).eigenvalues()(0));
    s.r_cut = std::min(0.25 * m.domain().margin_of(x0) * scale, 10.0 * lambda);
  }
  const Mat basis = orthonormal_frame(m, x0, v0);
  s.chart = std::make_shared<NormalChart>(m, x0, basis, opt.geodesic);
  s.v0_u = basis.transpose() * g * v0;
  const double audit = potential_audit(s);
  if (!(audit <= 1e-6)) throw EstimatorError("potential audit failed: deviation " + std::to_string(audit));
  return s;
}

Mat frame_hessian(const ChartManifold& m, const Vec& x, const Mat& frame, const std::function<double(const Vec&)>& f,
                  double h) {
  const auto n = frame.cols();
  auto F = [&](const Vec& s) { return f(exp_map(m, x, frame * s)); };
  const double f0 = F(Vec::Zero(n));
  auto second = [&](double step) {
    Mat H(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
      const Vec ea = Vec::Unit(n, a) * step;
      H(a, a) = (F(ea) - 2.0 * f0 + F(-ea)) / (step * step);
      for (Eigen::Index b = 0; b < a; ++b) {
        const Vec eb = Vec::Unit(n, b) * step;
        H(a, b) = H(b, a) = (F(ea + eb) - F(ea - eb) - F(eb - ea) + F(-ea - eb)) / (4.0 * step * step);
      }
    }
    return H;
  };
  const Mat coarse = second(h), fine = second(0.5 * h);
  return sym((4.0 * fine - coarse) / 3.0);
}

Mat potential_hessian(const PotentialSpec& spec, const Vec& x, const Mat& frame) {
  const double h = std::min(1e-2, spec.r_cut / 16.0);
  return frame_hessian(*spec.manifold, x, frame, [&](const Vec& y) { return spec.psi(y); }, h);
}

double potential_audit(const PotentialSpec& spec) {
  const ChartManifold& m = *spec.manifold;
  const auto n = spec.x0.size();
  const Vec grad = spec.gradient(spec.x0);
  double dev = std::sqrt(norm2(m, spec.x0, grad - spec.v0));
  const Mat H = potential_hessian(spec, spec.x0, spec.chart->basis());
  dev = std::max(dev, (H - spec.alpha0 * Mat::Identity(n, n)).cwiseAbs().maxCoeff());
  dev = std::max(dev, std::abs(H.trace() - n * spec.alpha0));
  return dev;
}

Vec transport_map(const PotentialSpec& spec, double t, const Vec& x) {
  if (!(t >= 0.0 && t <= 1.0)) throw InputError("t must lie in [0, 1]");
  if (!spec.in_core(x)) throw InputError("transport queried outside the core of the potential");
  if (t == 0.0) return x;
  return exp_map(*spec.manifold, x, t * spec.lambda * spec.gradient(x));
}

TransportDifferential transport_differential(const PotentialSpec& spec, double t, const Vec& x,
                                             const std::optional<Mat>& frame, double tolerance) {
  const ChartManifold& m = *spec.manifold;
  const auto n = x.size();
  TransportDifferential out;
  out.frame = frame ? *frame : orthonormal_frame(m, x);
  const Mat& E = out.frame;
  const Vec z = transport_map(spec, t, x);
  const double tl = t * spec.lambda;
  const double h = std::min(1e-2, spec.r_cut / 16.0);
  out.hessian_identity = frame_hessian(
      m, x, E,
      [&](const Vec& y) {
        const double d = geodesic_distance(m, y, z);
        return 0.5 * d * d + tl * spec.psi(y);
      },
      h);

  const Mat gx = m.metric(x);
  auto phi = [&](const Vec& u) -> Vec {
    const Vec y = exp_map(m, x, E * u);
    return E.transpose() * gx * log_map(m, x, transport_map(spec, t, y));
  };
  const double hj = 1e-4;
  out.jacobian.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Vec e = Vec::Unit(n, j) * hj;
    out.jacobian.col(j) = (phi(e) - phi(-e)) / (2.0 * hj);
  }
  out.discrepancy = (out.hessian_identity - out.jacobian).cwiseAbs().maxCoeff();
  if (!(out.discrepancy <= tolerance))
    throw EstimatorError("transport differential cross-check failed: discrepancy " + std::to_string(out.discrepancy));
  return out;
}

Mat curvature_form(const ChartManifold& m, const Vec& x0, const Vec& y, const Mat& frame, const GeodesicOptions& opt) {
  const Vec L = log_map(m, x0, y, opt);
  const Mat g = m.metric(x0);
  const auto& cf = m.closed_forms();
  if (opt.use_closed_form && cf.sectional_curvature) {
    const Vec b = frame.transpose() * (g * L);
    return *cf.sectional_curvature * (L.dot(g * L) * (frame.transpose() * g * frame) - b * b.transpose());
  }
  const Curvature c = curvature_at(m, x0);
  Mat rl(frame.rows(), frame.cols());
  for (Eigen::Index k = 0; k < frame.cols(); ++k) rl.col(k) = c.apply(frame.col(k), L, L);
  return sym(frame.transpose() * g * rl);
}

HessianDistSq hessian_dist_sq(const ChartManifold& m, const Vec& x0, const Vec& y, const std::optional<Mat>& frame,
                              const GeodesicOptions& opt, double h) {
  const Mat E = frame ? *frame : orthonormal_frame(m, x0);
  const auto n = x0.size();
  HessianDistSq out;
  out.exact = frame_hessian(m, x0, E, [&](const Vec& p) {
    const double d = geodesic_distance(m, p, y, opt);
    return 0.5 * d * d;
  }, h);
  out.model = Mat::Identity(n, n) - curvature_form(m, x0, y, E, opt) / 3.0;
  return out;
}

MidpointOperators midpoint_operators(const PotentialSpec& spec) {
  const ChartManifold& m = *spec.manifold;
  const auto n = spec.x0.size();
  MidpointOperators op;
  op.lambda = spec.lambda;
  op.alpha0 = spec.alpha0;
  op.y0 = transport_map(spec, 1.0, spec.x0);
  op.R = curvature_form(m, spec.x0, op.y0, spec.chart->basis());
  const Mat I = Mat::Identity(n, n);
  op.M1 = I + op.R / 6.0;
  op.M2 = (1.0 + spec.lambda * spec.alpha0) * I - op.R / 3.0;
  op.M3 = 0.5 * (op.M1 + op.M2);
  for (const Mat* M : {&op.M1, &op.M2, &op.M3}) {
    if (!is_spd(*M)) {
      const double r = std::max(op.R.norm(), 1e-300);
      const double admissible = spec.lambda * std::sqrt(std::max(0.0, 1.0 + spec.lambda * spec.alpha0) / r);
      throw ModelError("midpoint operators are not positive definite; lambda should not exceed about " +
                       std::to_string(admissible));
    }
  }
  return op;
}

}  // namespace bmcd

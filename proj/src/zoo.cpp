#include "bmcd/zoo.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "bmcd/error.hpp"

namespace bmcd {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string canonical(const std::string& family, const std::vector<double>& params) {
  std::string s = family + "(";
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) s += ",";
    s += num(params[i]);
  }
  return s + ")";
}

Box cube(int n, double half) { return Box{Vec::Constant(n, -half), Vec::Constant(n, half)}; }

std::string radius_sq(int n) {
  std::string s;
  for (int i = 1; i <= n; ++i) s += (i > 1 ? " + x" : "x") + std::to_string(i) + "^2";
  return s;
}

/// Conformal metric f(x) * identity, lower triangle.
std::vector<std::string> conformal(int n, const std::string& f) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) out.push_back(i == j ? f : "0");
  return out;
}

MetricSample conformal_sample(const Vec& x, double f, const Vec& df) {
  const auto n = x.size();
  MetricSample s;
  s.g = f * Mat::Identity(n, n);
  for (Eigen::Index k = 0; k < n; ++k) s.dg.push_back(df(k) * Mat::Identity(n, n));
  return s;
}

ClosedForms flat_forms(int n) {
  ClosedForms cf;
  cf.metric = [n](const Vec&) { return conformal_sample(Vec::Zero(n), 1.0, Vec::Zero(n)); };
  cf.exp = [](const Vec& p, const Vec& v) -> Vec { return p + v; };
  cf.log = [](const Vec& p, const Vec& q) -> Vec { return q - p; };
  cf.distance = [](const Vec& p, const Vec& q) { return (q - p).norm(); };
  cf.ricci = [n](const Vec&) -> Mat { return Mat::Zero(n, n); };
  cf.sectional_curvature = 0.0;
  return cf;
}

// Sphere of radius r in R^{n+1}, stereographic projection from (0, ..., 0, r).
struct Stereo {
  double r;

  Vec embed(const Vec& x) const {
    const double rho = x.squaredNorm(), s = rho + r * r;
    Vec X(x.size() + 1);
    X.head(x.size()) = 2.0 * r * r * x / s;
    X(x.size()) = r * (rho - r * r) / s;
    return X;
  }
  Vec chart(const Vec& X) const {
    const auto n = X.size() - 1;
    return X.head(n) * r / (r - X(n));
  }
  Mat differential(const Vec& x) const {
    const auto n = x.size();
    const double s = x.squaredNorm() + r * r;
    Mat d(n + 1, n);
    d.topRows(n) = 2.0 * r * r / s * Mat::Identity(n, n) - 4.0 * r * r / (s * s) * x * x.transpose();
    d.row(n) = 4.0 * r * r * r / (s * s) * x.transpose();
    return d;
  }
  double factor(const Vec& x) const {
    const double s = x.squaredNorm() + r * r;
    return 4.0 * r * r * r * r / (s * s);
  }

  Vec exp(const Vec& p, const Vec& v) const {
    const Vec P = embed(p), V = differential(p) * v;
    const double len = V.norm();
    if (len == 0.0) return p;
    return chart(std::cos(len / r) * P + r * std::sin(len / r) * V / len);
  }
  // Angle subtended at the centre and the unit ambient direction of the geodesic.
  double angle(const Vec& P, const Vec& Q, Vec* dir) const {
    const double c = P.dot(Q) / (r * r);
    const Vec w = Q - c * P;
    const double wn = w.norm();
    if (dir) *dir = wn > 0.0 ? Vec(w / wn) : Vec(Vec::Zero(P.size()));
    return std::atan2(wn / r, c);
  }
  Vec log(const Vec& p, const Vec& q) const {
    const Vec P = embed(p), Q = embed(q);
    Vec dir;
    const double theta = angle(P, Q, &dir);
    const Vec W = r * theta * dir;
    const Mat d = differential(p);
    return (d.transpose() * d).ldlt().solve(d.transpose() * W);
  }
  double distance(const Vec& p, const Vec& q) const { return r * angle(embed(p), embed(q), nullptr); }
};

// Poincare ball through the hyperboloid model in R^{1,n}; time coordinate stored last.
struct Ball {
  static double mink(const Vec& a, const Vec& b) {
    const auto n = a.size() - 1;
    return a.head(n).dot(b.head(n)) - a(n) * b(n);
  }
  static Vec embed(const Vec& x) {
    const double rho = x.squaredNorm();
    Vec X(x.size() + 1);
    X.head(x.size()) = 2.0 * x / (1.0 - rho);
    X(x.size()) = (1.0 + rho) / (1.0 - rho);
    return X;
  }
  static Vec chart(const Vec& X) {
    const auto n = X.size() - 1;
    return X.head(n) / (1.0 + X(n));
  }
  static Mat differential(const Vec& x) {
    const auto n = x.size();
    const double q = 1.0 - x.squaredNorm();
    Mat d(n + 1, n);
    d.topRows(n) = 2.0 / q * Mat::Identity(n, n) + 4.0 / (q * q) * x * x.transpose();
    d.row(n) = 4.0 / (q * q) * x.transpose();
    return d;
  }
  static double factor(const Vec& x) {
    const double q = 1.0 - x.squaredNorm();
    return 4.0 / (q * q);
  }

  static Vec exp(const Vec& p, const Vec& v) {
    const Vec P = embed(p), V = differential(p) * v;
    const double len = std::sqrt(std::max(mink(V, V), 0.0));
    if (len == 0.0) return p;
    return chart(std::cosh(len) * P + std::sinh(len) * V / len);
  }
  static double distance(const Vec& p, const Vec& q) {
    const double num = (p - q).norm();
    const double den = std::sqrt((1.0 - p.squaredNorm()) * (1.0 - q.squaredNorm()));
    return 2.0 * std::asinh(num / den);
  }
  static Vec log(const Vec& p, const Vec& q) {
    const Vec P = embed(p), Q = embed(q);
    const double c = -mink(P, Q);
    const Vec w = Q - c * P;
    const double wn = std::sqrt(std::max(mink(w, w), 0.0));
    const auto n = p.size();
    if (wn == 0.0) return Vec::Zero(n);
    const Vec W = distance(p, q) * w / wn;
    const Mat d = differential(p);
    Vec etaW = W;
    etaW(n) = -W(n);
    return (factor(p) * Mat::Identity(n, n)).ldlt().solve(d.transpose() * etaW);
  }
};

ZooEntry make(const std::string& family, std::vector<double> params, ChartManifold m) {
  ZooEntry e{canonical(family, params), std::move(m), family, params};
  return e;
}

int dimension_param(const std::vector<double>& params, const std::string& family) {
  if (params.empty()) throw InputError(family + ": missing dimension parameter");
  const double n = params[0];
  if (!(n >= 2) || n != std::floor(n) || n > 16) throw InputError(family + ": dimension must be an integer in [2, 16]");
  return static_cast<int>(n);
}

}  // namespace

std::vector<std::string> builtin_families() { return {"euclidean", "sphere", "hyperbolic", "gaussian", "saddle_weight"}; }

ZooEntry builtin(const std::string& family, const std::vector<double>& given) {
  std::vector<double> params = given;
  for (double p : params)
    if (!std::isfinite(p)) throw InputError(family + ": parameters must be finite");
  auto expect = [&](std::size_t count) {
    if (params.size() > count) throw InputError(family + ": too many parameters");
    while (params.size() < count) params.push_back(1.0);
  };

  if (family == "euclidean") {
    const int n = dimension_param(params, family);
    expect(1);
    ChartManifold m = ChartManifold::from_strings(n, cube(n, 10.0), conformal(n, "1"), "", canonical(family, params));
    m.set_closed_forms(flat_forms(n));
    m.set_injectivity_bound(10.0);
    return make(family, params, std::move(m));
  }
  if (family == "sphere") {
    const int n = dimension_param(params, family);
    expect(2);
    const double r = params[1];
    if (!(r > 0)) throw InputError("sphere: radius must be positive");
    const std::string f = "4*" + num(r * r * r * r) + "/(" + num(r * r) + " + " + radius_sq(n) + ")^2";
    ChartManifold m = ChartManifold::from_strings(n, cube(n, 2.0 * r), conformal(n, f), "", canonical(family, params));
    const Stereo st{r};
    ClosedForms cf;
    cf.metric = [st](const Vec& x) {
      const double s = x.squaredNorm() + st.r * st.r;
      return conformal_sample(x, st.factor(x), -16.0 * std::pow(st.r, 4) / (s * s * s) * x);
    };
    cf.exp = [st](const Vec& p, const Vec& v) { return st.exp(p, v); };
    cf.log = [st](const Vec& p, const Vec& q) { return st.log(p, q); };
    cf.distance = [st](const Vec& p, const Vec& q) { return st.distance(p, q); };
    cf.ricci = [st, n](const Vec& x) -> Mat { return (n - 1) / (st.r * st.r) * st.factor(x) * Mat::Identity(n, n); };
    cf.sectional_curvature = 1.0 / (r * r);
    m.set_closed_forms(std::move(cf));
    m.set_injectivity_bound(M_PI * r);
    return make(family, params, std::move(m));
  }
  if (family == "hyperbolic") {
    const int n = dimension_param(params, family);
    expect(1);
    const std::string f = "4/(1 - (" + radius_sq(n) + "))^2";
    ChartManifold m =
        ChartManifold::from_strings(n, cube(n, 0.9 / std::sqrt(double(n))), conformal(n, f), "", canonical(family, params));
    ClosedForms cf;
    cf.metric = [](const Vec& x) {
      const double q = 1.0 - x.squaredNorm();
      return conformal_sample(x, Ball::factor(x), 16.0 / (q * q * q) * x);
    };
    cf.exp = [](const Vec& p, const Vec& v) { return Ball::exp(p, v); };
    cf.log = [](const Vec& p, const Vec& q) { return Ball::log(p, q); };
    cf.distance = [](const Vec& p, const Vec& q) { return Ball::distance(p, q); };
    cf.ricci = [n](const Vec& x) -> Mat { return -(n - 1) * Ball::factor(x) * Mat::Identity(n, n); };
    cf.sectional_curvature = -1.0;
    m.set_closed_forms(std::move(cf));
    m.set_injectivity_bound(10.0);
    return make(family, params, std::move(m));
  }
  if (family == "gaussian") {
    const int n = dimension_param(params, family);
    expect(2);
    const double a = params[1];
    const std::string v = num(a / 2.0) + "*(" + radius_sq(n) + ")";
    ChartManifold m = ChartManifold::from_strings(n, cube(n, 5.0), conformal(n, "1"), v, canonical(family, params));
    ClosedForms cf = flat_forms(n);
    cf.potential = [a](const Vec& x) { return 0.5 * a * x.squaredNorm(); };
    cf.potential_gradient = [a](const Vec& x) -> Vec { return a * x; };
    cf.potential_hessian = [a, n](const Vec&) -> Mat { return a * Mat::Identity(n, n); };
    m.set_closed_forms(std::move(cf));
    m.set_injectivity_bound(10.0);
    return make(family, params, std::move(m));
  }
  if (family == "saddle_weight") {
    const int n = dimension_param(params, family);
    expect(2);
    const double c = params[1];
    const std::string v = num(-c) + "*x1^2";
    ChartManifold m = ChartManifold::from_strings(n, cube(n, 5.0), conformal(n, "1"), v, canonical(family, params));
    ClosedForms cf = flat_forms(n);
    cf.potential = [c](const Vec& x) { return -c * x(0) * x(0); };
    cf.potential_gradient = [c, n](const Vec& x) -> Vec {
      Vec d = Vec::Zero(n);
      d(0) = -2.0 * c * x(0);
      return d;
    };
    cf.potential_hessian = [c, n](const Vec&) -> Mat {
      Mat h = Mat::Zero(n, n);
      h(0, 0) = -2.0 * c;
      return h;
    };
    m.set_closed_forms(std::move(cf));
    m.set_injectivity_bound(10.0);
    return make(family, params, std::move(m));
  }
  throw InputError("unknown built-in manifold '" + family + "'");
}

ZooEntry builtin(const std::string& text) {
  const auto open = text.find('(');
  std::string family = text.substr(0, open);
  while (!family.empty() && std::isspace(static_cast<unsigned char>(family.back()))) family.pop_back();
  std::vector<double> params;
  if (open != std::string::npos) {
    const auto close = text.find(')', open);
    if (close == std::string::npos || close + 1 != text.size())
      throw InputError("malformed built-in manifold '" + text + "'");
    std::stringstream ss(text.substr(open + 1, close - open - 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        params.push_back(std::stod(item, &used));
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::logic_error&) {
        throw InputError("bad parameter '" + item + "' in '" + text + "'");
      }
    }
  }
  return builtin(family, params);
}

CdStatus ZooEntry::cd_status(double K, double N) const {
  const int n = manifold.dim();
  CdStatus s;
  if (!(N >= n)) return s;
  const Box& box = manifold.domain();
  Vec e1 = Vec::Zero(n);
  e1(0) = 1.0;
  s.witness_direction = e1;
  s.witness_point = Vec::Zero(n);

  if (family == "euclidean") {
    s.ricci_lower_bound = 0.0;
  } else if (family == "sphere") {
    s.ricci_lower_bound = (n - 1) / (params[1] * params[1]);
    s.witness_direction = e1 / std::sqrt(manifold.metric(s.witness_point)(0, 0));
  } else if (family == "hyperbolic") {
    s.ricci_lower_bound = -(n - 1.0);
    s.witness_direction = e1 / 2.0;
  } else if (family == "gaussian") {
    // Ric^N = a I - a^2 x x^T / (N - n); the infimum sits at a corner of the chart.
    const double a = params[1];
    if (N == n) {
      if (a != 0.0) return s;  // weight not constant: N = n is outside the convention
      s.ricci_lower_bound = 0.0;
    } else {
      s.witness_point = box.hi;
      s.witness_direction = box.hi.normalized();
      s.ricci_lower_bound = a - a * a * box.hi.squaredNorm() / (N - n);
    }
  } else if (family == "saddle_weight") {
    // Ric^N = (-2c - 4 c^2 x1^2 / (N - n)) e1 e1^T.
    const double c = params[1];
    if (N == n) {
      if (c != 0.0) return s;
      s.ricci_lower_bound = 0.0;
    } else {
      const double x1 = std::max(std::abs(box.lo(0)), std::abs(box.hi(0)));
      const double edge = -2.0 * c - 4.0 * c * c * x1 * x1 / (N - n);
      if (edge < 0.0) {
        s.ricci_lower_bound = edge;
        s.witness_point(0) = x1;
      } else {
        s.ricci_lower_bound = 0.0;
        s.witness_direction = Vec::Zero(n);
        s.witness_direction(1) = 1.0;
      }
    }
  } else {
    return s;
  }
  s.verdict = K <= s.ricci_lower_bound ? CdStatus::Verdict::Holds : CdStatus::Verdict::Fails;
  return s;
}

}  // namespace bmcd

// bmcd: curvature-dimension and Brunn-Minkowski experiments on weighted manifolds.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bmcd/bm.hpp"
#include "bmcd/distortion.hpp"
#include "bmcd/error.hpp"
#include "bmcd/jacobi.hpp"
#include "bmcd/kernels.hpp"
#include "bmcd/manifold_file.hpp"
#include "bmcd/parallel.hpp"

namespace {

using namespace bmcd;

constexpr int kUsage = 64;
constexpr int kModel = 65;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Csv {
 public:
  explicit Csv(std::ostream& out) : out_(out) {}
  Csv& row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
    return *this;
  }

 private:
  std::ostream& out_;
};

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

std::string vec_text(const Vec& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + num(v(i));
  return s;
}

void require_dim(const Vec& v, int n, const char* what) {
  if (v.size() != n) throw InputError(std::string(what) + " must have " + std::to_string(n) + " components");
}

struct Common {
  std::string manifold;
  std::string out;
  unsigned seed = 0;
  int jobs = 0;
  std::string isa = "auto";
};

void add_common(CLI::App* app, Common& c, bool with_manifold) {
  if (with_manifold)
    app->add_option("--manifold", c.manifold, "manifold file (JSON) or built-in name, e.g. sphere(2,1)")->required();
  app->add_option("--out", c.out, "write the CSV here instead of stdout");
  app->add_option("--seed", c.seed, "seed for randomized steps (reports are deterministic for a fixed seed)");
  app->add_option("--jobs", c.jobs, "worker threads (default: logical cores)")->check(CLI::NonNegativeNumber);
  app->add_option("--isa", c.isa, "kernel instruction set: auto, scalar, avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));
}

void apply_common(const Common& c) {
  if (c.jobs > 0) set_worker_count(c.jobs);
  if (c.isa == "scalar") kernels::set_isa(kernels::Isa::Scalar);
  if (c.isa == "avx2") kernels::set_isa(kernels::Isa::Avx2);
}

// Stream for the CSV: --out file or stdout.
struct Output {
  std::ofstream file;
  std::ostream* stream = &std::cout;
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file.open(path);
    if (!file) throw InputError("cannot write " + path);
    stream = &file;
  }
};

int run_distortion(double K, double N, double t, double theta, const Common& c) {
  Output o(c.out);
  Csv csv(*o.stream);
  csv.row({"K", "N", "t", "theta", "sigma", "tau", "expansion_defect"});
  csv.row({num(K), num(N), num(t), num(theta), num(sigma(K, N, t, theta)), num(tau(K, N, t, theta)),
           num(tau_expansion_defect(K, N, t, theta))});
  return 0;
}

int run_ric(const std::vector<double>& point, double N, const Common& c) {
  const LoadedManifold lm = load_manifold(c.manifold);
  const ChartManifold& m = lm.manifold;
  const Vec x = to_vec(point);
  require_dim(x, m.dim(), "--point");
  const Mat ric = modified_ricci_at(m, x, N);
  Output o(c.out);
  Csv csv(*o.stream);
  csv.row({"quantity", "i", "j", "value"});
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j)
      csv.row({"ric", std::to_string(i + 1), std::to_string(j + 1), num(ric(i, j))});
  csv.row({"min_eigenvalue", "", "", num(min_generalized_eigenvalue(ric, m.metric(x)))});
  return 0;
}

int run_cd_scan(double K, double N, int grid, const Common& c) {
  const LoadedManifold lm = load_manifold(c.manifold);
  const ChartManifold& m = lm.manifold;
  const int n = m.dim();
  if (grid < 1) throw InputError("--grid must be positive");
  if (std::pow(static_cast<double>(grid), n) > 1e7) throw InputError("--grid too large for this dimension");
  std::vector<Vec> points;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  const Box& box = m.domain();
  while (true) {
    Vec x(n);
    for (int i = 0; i < n; ++i)
      x(i) = box.lo(i) + (idx[static_cast<std::size_t>(i)] + 0.5) / grid * (box.hi(i) - box.lo(i));
    points.push_back(x);
    int a = n - 1;
    while (a >= 0 && ++idx[static_cast<std::size_t>(a)] == grid) idx[static_cast<std::size_t>(a--)] = 0;
    if (a < 0) break;
  }
  std::vector<double> value(points.size());
  parallel_for(points.size(), [&](std::size_t k) {
    value[k] = min_generalized_eigenvalue(modified_ricci_at(m, points[k], N), m.metric(points[k])) - K;
  });
  Output o(c.out);
  Csv csv(*o.stream);
  std::vector<std::string> head;
  for (int i = 0; i < n; ++i) head.push_back("x" + std::to_string(i + 1));
  head.push_back("min_eigenvalue");
  csv.row(head);
  std::size_t worst = 0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    std::vector<std::string> r;
    for (int i = 0; i < n; ++i) r.push_back(num(points[k](i)));
    r.push_back(num(value[k]));
    csv.row(r);
    if (value[k] < value[worst]) worst = k;
  }
  if (value[worst] >= -1e-8) return 0;
  std::cerr << "CD(" << num(K) << ", " << num(N) << ") fails: witness x = (" << vec_text(points[worst])
            << "), min eigenvalue of Ric^{N,m} - K g = " << num(value[worst]) << '\n';
  return 2;
}

int run_jacobian(const std::vector<double>& x0v, const std::vector<double>& v0v, double lambda, double N, int steps,
                 double alpha, const Common& c) {
  const LoadedManifold lm = load_manifold(c.manifold);
  const ChartManifold& m = lm.manifold;
  const int n = m.dim();
  const Vec x0 = to_vec(x0v), v0 = to_vec(v0v);
  require_dim(x0, n, "--x0");
  require_dim(v0, n, "--v0");
  const MatrixJacobiField f =
      reparametrized_field(m, x0, v0, lambda, alpha * Mat::Identity(n, n), N, steps);
  const double h = 1.0 / steps;
  Output o(c.out);
  Csv csv(*o.stream);
  csv.row({"t", "D", "E", "ric_term", "riccati_residual"});
  const auto& D = f.distortion;
  for (std::size_t k = 0; k < f.samples(); ++k) {
    const Vec& u = f.path.xdot[k];
    const double ric = u.dot(modified_ricci_at(m, f.path.x[k], N) * u);
    std::string res = "nan";
    if (k > 0 && k + 1 < f.samples()) {
      const double d2 = (D[k + 1] - 2.0 * D[k] + D[k - 1]) / (h * h);
      res = num(std::abs(-N * d2 / D[k] - ric - f.remainder[k]));
    }
    csv.row({num(f.path.t[k]), num(D[k]), num(f.remainder[k]), num(ric), res});
  }
  return 0;
}

PotentialSpec potential_for(const ChartManifold& m, const Vec& x0, const Vec& v0, double N, double lambda) {
  const double len = std::sqrt(norm2(m, x0, v0));
  if (!(len > 0.0)) throw InputError("--v0 must be nonzero");
  return build_potential(m, x0, v0 / len, N, lambda);
}

int run_bm_test(const std::vector<double>& x0v, const std::vector<double>& v0v, double K, double N, double lambda,
                double eps, double t, std::int64_t lines, const Common& c) {
  const LoadedManifold lm = load_manifold(c.manifold);
  const ChartManifold& m = lm.manifold;
  const Vec x0 = to_vec(x0v), v0 = to_vec(v0v);
  require_dim(x0, m.dim(), "--x0");
  require_dim(v0, m.dim(), "--v0");
  const PotentialSpec spec = potential_for(m, x0, v0, N, lambda);
  const CubeSet A = curvature_aligned_cube(spec, eps > 0.0 ? eps : std::pow(lambda, 4));
  RasterOptions ro;
  ro.lines_per_side = lines;
  const BMReport r = bm_check(spec, A, t, K, N, ro);
  Output o(c.out);
  Csv csv(*o.stream);
  csv.row({"t", "K", "N", "lambda", "eps", "theta", "m_A", "m_B", "m_M", "lhs", "rhs", "margin", "error"});
  csv.row({num(r.t), num(K), num(N), num(lambda), num(A.eps), num(r.theta), num(r.mA.value), num(r.mB.value),
           num(r.mM.value), num(r.lhs), num(r.rhs), num(r.margin), num(r.error)});
  if (r.margin >= -r.error) return 0;
  if (r.margin < -3.0 * r.error) {
    std::cerr << "certified BM(" << num(K) << ", " << num(N) << ") violation: margin " << num(r.margin)
              << " < -3 x error " << num(r.error) << '\n';
    return 2;
  }
  std::cerr << "inconclusive: margin " << num(r.margin) << " within 3 error bars " << num(r.error) << '\n';
  return 0;
}

int run_counterexample(const std::vector<double>& x0v, const std::vector<double>& v0v, double K, double N,
                       double delta, std::vector<double> schedule, std::int64_t lines, const Common& c) {
  const LoadedManifold lm = load_manifold(c.manifold);
  const ChartManifold& m = lm.manifold;
  const Vec x0 = to_vec(x0v), v0 = to_vec(v0v);
  require_dim(x0, m.dim(), "--x0");
  require_dim(v0, m.dim(), "--v0");
  if (schedule.empty()) schedule = default_lambda_schedule();
  RasterOptions ro;
  ro.lines_per_side = lines;
  const CounterexampleReport r = counterexample_search(m, K, N, delta, x0, v0, schedule, ro);
  const MidpointControl mc = midpoint_control(r);
  Output o(c.out);
  Csv csv(*o.stream);
  csv.row({"lambda", "eps", "ricci", "theta", "theta_offset", "m_A", "m_B", "m_M", "m_T_half", "lhs", "rhs", "margin",
           "error", "certified", "D0", "D_half", "D1", "tau_half", "defect", "defect_over_lambda2", "midpoint_ratio",
           "midpoint_ratio_error", "C", "comparability"});
  for (std::size_t k = 0; k < r.stages.size(); ++k) {
    const CounterexampleStage& s = r.stages[k];
    const auto& b = s.bm;
    const auto& ip = s.interpolation;
    csv.row({num(s.lambda), num(s.eps), num(r.ricci), num(b.theta), num(s.theta_offset), num(b.mA.value),
             num(b.mB.value), num(b.mM.value), num(s.pushforward_half.value), num(b.lhs), num(b.rhs), num(b.margin),
             num(b.error), s.certified ? "1" : "0", num(ip.D0), num(ip.Dhalf), num(ip.D1), num(ip.tau_half),
             num(ip.defect), num(ip.defect_over_lambda2), num(s.midpoint_ratio), num(s.midpoint_ratio_error),
             num(mc.C[k]), num(s.comparability)});
  }
  if (r.certified) {
    std::cerr << "certified BM(" << num(K) << ", " << num(N) << ") violation at lambda = "
              << num(r.stages[*r.certified].lambda) << '\n';
    return 0;
  }
  double best = r.stages.front().bm.margin / std::max(r.stages.front().bm.error, 1e-300);
  for (const auto& s : r.stages) best = std::min(best, s.bm.margin / std::max(s.bm.error, 1e-300));
  std::cerr << "schedule exhausted without a certified violation; closest margin / error = " << num(best) << '\n';
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curvature-dimension and Brunn-Minkowski experiments on weighted Riemannian manifolds"};
  app.require_subcommand(1);
  Common common;

  double K = 0.0, N = 0.0, t = 0.5, theta = 0.0, lambda = 0.05, eps = 0.0, delta = 0.0, alpha = 0.0;
  int grid = 16, steps = 256;
  std::int64_t lines = 0;
  std::vector<double> point, x0, v0, schedule;

  auto* dist = app.add_subcommand("distortion", "distortion coefficients sigma, tau at (K, N, t, theta)");
  dist->add_option("--K", K)->required();
  dist->add_option("--N", N)->required();
  dist->add_option("--t", t)->required();
  dist->add_option("--theta", theta)->required();
  add_common(dist, common, false);

  auto* ric = app.add_subcommand("ric", "modified Ricci tensor at a point");
  ric->add_option("--point", point)->required()->delimiter(',');
  ric->add_option("--N", N)->required();
  add_common(ric, common, true);

  auto* scan = app.add_subcommand("cd-scan", "scan the chart for CD(K, N) via the modified Ricci tensor");
  scan->add_option("--K", K)->required();
  scan->add_option("--N", N)->required();
  scan->add_option("--grid", grid, "cells per axis")->default_val(16);
  add_common(scan, common, true);

  auto* jac = app.add_subcommand("jacobian", "Jacobi-field distortion profile along exp(s lambda v0)");
  jac->add_option("--x0", x0)->required()->delimiter(',');
  jac->add_option("--v0", v0)->required()->delimiter(',');
  jac->add_option("--lambda", lambda)->required();
  jac->add_option("--N", N)->required();
  jac->add_option("--steps", steps)->default_val(256);
  jac->add_option("--hessian", alpha, "initial Hessian alpha Id")->default_val(0.0);
  add_common(jac, common, true);

  auto* bmt = app.add_subcommand("bm-test", "Brunn-Minkowski check on a curvature-aligned cube");
  bmt->add_option("--x0", x0)->required()->delimiter(',');
  bmt->add_option("--v0", v0)->required()->delimiter(',');
  bmt->add_option("--K", K)->required();
  bmt->add_option("--N", N)->required();
  bmt->add_option("--lambda", lambda)->required();
  bmt->add_option("--eps", eps, "cube side (default lambda^4)");
  bmt->add_option("--t", t)->default_val(0.5);
  bmt->add_option("--lines", lines, "raster lines per side (default by dimension)");
  add_common(bmt, common, true);

  auto* ce = app.add_subcommand("counterexample", "search for a certified BM(K, N) violation");
  ce->add_option("--x0", x0)->required()->delimiter(',');
  ce->add_option("--v0", v0)->required()->delimiter(',');
  ce->add_option("--K", K)->required();
  ce->add_option("--N", N)->required();
  ce->add_option("--delta", delta)->required();
  ce->add_option("--lambda-schedule", schedule, "comma-separated lambdas")->delimiter(',');
  ce->add_option("--lines", lines, "raster lines per side (default 16384 at n = 2)");
  add_common(ce, common, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    apply_common(common);
    if (*dist) return run_distortion(K, N, t, theta, common);
    if (*ric) return run_ric(point, N, common);
    if (*scan) return run_cd_scan(K, N, grid, common);
    if (*jac) return run_jacobian(x0, v0, lambda, N, steps, alpha, common);
    if (*bmt) return run_bm_test(x0, v0, K, N, lambda, eps, t, lines, common);
    if (*ce) return run_counterexample(x0, v0, K, N, delta, schedule, lines, common);
  } catch (const PreconditionError& e) {
    std::cerr << "precondition failed: " << e.what() << '\n';
    return 4;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "model error: " << e.what() << '\n';
    return kModel;
  }
  return kUsage;
}

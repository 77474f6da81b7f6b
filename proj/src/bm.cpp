#include "bmcd/bm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "bmcd/distortion.hpp"
#include "bmcd/error.hpp"
#include "bmcd/jacobi.hpp"
#include "bmcd/parallel.hpp"

namespace bmcd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Mat chart_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& u, double h) {
  const auto k = u.size();
  Mat d;
  for (Eigen::Index j = 0; j < k; ++j) {
    const Vec e = Vec::Unit(k, j) * h;
    const Vec col = (f(u + e) - f(u - e)) / (2.0 * h);
    if (j == 0) d.resize(col.size(), k);
    d.col(j) = col;
  }
  return d;
}

// P (P^T g P)^{-1/2}: restores exact orthonormality after numeric transport.
Mat reorthonormalize(const Mat& P, const Mat& g) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(P.transpose() * g * P));
  return P * es.operatorInverseSqrt();
}

// Multi-index iteration over a tensor grid.
template <class F>
void for_each_index(const std::vector<int>& counts, F&& visit) {
  std::vector<int> idx(counts.size(), 0);
  for (int c : counts)
    if (c <= 0) return;
  while (true) {
    visit(idx);
    std::size_t a = 0;
    while (a < idx.size() && ++idx[a] == counts[a]) idx[a++] = 0;
    if (a == idx.size()) return;
  }
}

double linspace(int i, int count, double eps) {
  return count <= 1 ? 0.0 : eps * static_cast<double>(i) / static_cast<double>(count - 1);
}

}  // namespace

Vec CubeSet::point(const Vec& u) const { return exp_map(*manifold, x0, basis * u); }

CubeSet make_cube(const ChartManifold& m, const Vec& x0, const Mat& basis, double eps) {
  m.require_in_domain(x0);
  if (!(eps >= 0.0)) throw InputError("cube side must be non-negative");
  const auto n = x0.size();
  if (basis.rows() != n || basis.cols() != n) throw InputError("cube basis has the wrong shape");
  const Mat gram = basis.transpose() * m.metric(x0) * basis;
  if ((gram - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
    throw InputError("cube basis is not orthonormal");
  CubeSet c;
  c.manifold = &m;
  c.x0 = x0;
  c.basis = basis;
  c.eps = eps;
  return c;
}

CubeSet curvature_aligned_cube(const PotentialSpec& spec, double eps) {
  const ChartManifold& m = *spec.manifold;
  const auto n = spec.x0.size();
  const double l4 = std::pow(spec.lambda, 4);
  if (!(eps > 0.0 && eps <= l4 * (1.0 + 1e-12))) throw InputError("cube side must lie in (0, lambda^4]");
  const Mat E = spec.chart->basis();
  const Mat g = m.metric(spec.x0);
  const Vec y0 = transport_map(spec, 1.0, spec.x0);
  const Mat R = curvature_form(m, spec.x0, y0, E);
  const SymmetricEigen eig = jacobi_eigen(R);

  Mat chart = E * eig.vectors;  // chart columns
  Vec values = eig.values;
  const double tie = 1e-10 * std::max(R.norm(), 1e-300) + 1e-14;

  auto first_nonzero_positive = [&](Vec v) {
    const double scale = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(v(i)) > 1e-12 * scale) return v(i) < 0.0 ? Vec(-v) : v;
    return v;
  };
  auto lex_greater = [&](const Vec& a, const Vec& b) {
    const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(a(i) - b(i)) > 1e-12 * scale) return a(i) > b(i);
    return false;
  };

  for (Eigen::Index start = 0; start < n;) {
    Eigen::Index end = start + 1;
    while (end < n && values(end) - values(end - 1) <= tie) ++end;
    const Eigen::Index size = end - start;
    // Degenerate eigenspaces get a canonical basis: the projected chart axes, in order.
    Mat group = chart.middleCols(start, size);
    if (size > 1) {
      const Mat proj = group * group.transpose() * g;
      Mat fresh(n, size);
      Eigen::Index have = 0;
      for (Eigen::Index k = 0; k < n && have < size; ++k) {
        Vec v = proj.col(k);
        for (int pass = 0; pass < 2; ++pass)
          for (Eigen::Index j = 0; j < have; ++j) v -= fresh.col(j).dot(g * v) * fresh.col(j);
        const double len = std::sqrt(v.dot(g * v));
        if (len > 1e-8) fresh.col(have++) = v / len;
      }
      if (have == size) group = fresh;
    }
    std::vector<Vec> cols;
    for (Eigen::Index j = 0; j < size; ++j) cols.push_back(first_nonzero_positive(group.col(j)));
    std::stable_sort(cols.begin(), cols.end(), lex_greater);
    for (Eigen::Index j = 0; j < size; ++j) chart.col(start + j) = cols[static_cast<std::size_t>(j)];
    start = end;
  }

  CubeSet c = make_cube(m, spec.x0, chart, eps);
  c.eigenvalues = values;
  c.frame_coords = E.transpose() * g * chart;
  for (int corner = 0; corner < (1 << n); ++corner) {
    Vec u(n);
    for (Eigen::Index i = 0; i < n; ++i) u(i) = (corner >> i) & 1 ? eps : 0.0;
    if (!spec.in_core(c.point(u))) throw InputError("cube leaves the core of the potential");
  }
  return c;
}

namespace {

// Tensor Gauss-Legendre over [0, eps]^n of f(u).
double cube_quadrature(int n, double eps, int order, const std::function<double(const Vec&)>& f) {
  const Quadrature1D q = gauss_legendre01(order);
  const std::vector<int> counts(static_cast<std::size_t>(n), order);
  std::vector<std::vector<int>> nodes;
  for_each_index(counts, [&](const std::vector<int>& idx) { nodes.push_back(idx); });
  std::vector<double> values(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t k) {
    Vec u(n);
    double w = 1.0;
    for (int i = 0; i < n; ++i) {
      u(i) = eps * q.nodes[static_cast<std::size_t>(nodes[k][static_cast<std::size_t>(i)])];
      w *= eps * q.weights[static_cast<std::size_t>(nodes[k][static_cast<std::size_t>(i)])];
    }
    values[k] = w * f(u);
  });
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

// e^{-V} dvol pulled back to the cube parameters.
double parameter_density(const CubeSet& A, const Vec& u) {
  const Mat D = chart_jacobian([&](const Vec& w) { return A.point(w); }, u, 1e-5);
  return A.manifold->density(A.point(u)) * std::abs(D.determinant());
}

Estimate two_orders(int n, double eps, int order, const std::function<double(const Vec&)>& f) {
  if (order < 2) throw InputError("quadrature order must be at least 2");
  Estimate e;
  e.value = cube_quadrature(n, eps, order, f);
  e.error = std::abs(e.value - cube_quadrature(n, eps, order - 1, f));
  return e;
}

}  // namespace

Estimate cube_measure(const CubeSet& A, int order) {
  const int n = static_cast<int>(A.x0.size());
  if (A.eps == 0.0) return {};
  return two_orders(n, A.eps, order, [&](const Vec& u) { return parameter_density(A, u); });
}

Estimate transported_measure(const PotentialSpec& spec, double t, const CubeSet& A, int order) {
  if (t == 0.0) return cube_measure(A, order);
  const ChartManifold& m = *spec.manifold;
  const int n = static_cast<int>(A.x0.size());
  if (A.eps == 0.0) return {};
  return two_orders(n, A.eps, order, [&](const Vec& u) {
    const Vec x = A.point(u);
    const Vec z = transport_map(spec, t, x);
    const TransportDifferential td = transport_differential(spec, t, x);
    const Mat& E = td.frame;
    const Vec w0 = E.transpose() * m.metric(x) * log_map(m, x, z);
    const Mat K = chart_jacobian([&](const Vec& w) { return exp_map(m, x, E * w); }, w0, 1e-5);
    const double vol = std::sqrt(std::max(0.0, (K.transpose() * m.metric(z) * K).determinant()));
    return parameter_density(A, u) * std::exp(-(m.potential(z) - m.potential(x))) *
           std::abs(td.hessian_identity.determinant()) * vol;
  });
}

std::int64_t default_lines_per_side(int n) {
  if (n <= 2) return 4096;
  if (n == 3) return 256;
  return 64;
}

RasterFrame transported_frame(const PotentialSpec& spec, const CubeSet& A, double t) {
  const ChartManifold& m = *spec.manifold;
  RasterFrame f;
  f.z0 = transport_map(spec, t, spec.x0);
  if (t == 0.0) {
    f.P = A.basis;
    return f;
  }
  const GeodesicPath path = integrate_geodesic(m, spec.x0, t * spec.lambda * spec.gradient(spec.x0), 64);
  f.P = reorthonormalize(parallel_transport(m, path, A.basis).back(), m.metric(f.z0));
  return f;
}

namespace {

// Image of a parameter box [0, eps]^(n1 + n2) under combine(first(p1), second(p2)).
struct Family {
  int n = 0;
  int n1 = 0, n2 = 0;
  double eps = 0.0;
  std::function<Vec(const Vec&)> first;
  std::function<Vec(const Vec&)> second;
  std::function<Vec(const Vec&, const Vec&)> combine;

  int k() const { return n1 + n2; }
  Vec eval(const Vec& p) const {
    const Vec a = first(p.head(n1));
    const Vec b = n2 > 0 ? second(p.tail(n2)) : Vec();
    return combine(a, b);
  }
};

// Per-axis sample code: -1 fixed at 0, -2 fixed at eps, c >= 1 a uniform grid of c values.
using AxisCodes = std::vector<int>;

std::vector<Vec> part_points(const Family& f, const AxisCodes& codes, bool second) {
  std::vector<int> counts;
  for (int c : codes) counts.push_back(c > 0 ? c : 1);
  std::vector<Vec> params;
  for_each_index(counts, [&](const std::vector<int>& idx) {
    Vec p(static_cast<Eigen::Index>(codes.size()));
    for (std::size_t a = 0; a < codes.size(); ++a)
      p(static_cast<Eigen::Index>(a)) = codes[a] == -1 ? 0.0 : codes[a] == -2 ? f.eps : linspace(idx[a], codes[a], f.eps);
    params.push_back(p);
  });
  std::vector<Vec> out(params.size());
  if (codes.empty()) {
    out.assign(1, Vec());
    return out;
  }
  parallel_for(params.size(), [&](std::size_t i) { out[i] = second ? f.second(params[i]) : f.first(params[i]); });
  return out;
}

// The (n-1)-skeleton of the parameter box sampled with `counts` per axis, plus a full lattice.
class Sweep {
 public:
  Sweep(const Family& f, const std::vector<int>& counts, int lattice) : f_(f) {
    const int k = f.k(), n = f.n;
    std::map<AxisCodes, std::size_t> index1, index2;
    auto intern = [&](std::map<AxisCodes, std::size_t>& index, std::vector<AxisCodes>& keys, const AxisCodes& c) {
      auto it = index.find(c);
      if (it != index.end()) return it->second;
      keys.push_back(c);
      return index[c] = keys.size() - 1;
    };
    std::vector<AxisCodes> keys1, keys2;
    auto add_job = [&](const AxisCodes& codes) {
      const AxisCodes c1(codes.begin(), codes.begin() + f.n1), c2(codes.begin() + f.n1, codes.end());
      jobs_.emplace_back(intern(index1, keys1, c1), intern(index2, keys2, c2));
    };
    if (f.eps > 0.0) {
      for (unsigned mask = 0; mask < (1u << k); ++mask) {
        if (__builtin_popcount(mask) != n - 1) continue;
        const int fixed = k - (n - 1);
        for (unsigned bits = 0; bits < (1u << fixed); ++bits) {
          AxisCodes codes(static_cast<std::size_t>(k));
          int b = 0;
          for (int a = 0; a < k; ++a)
            codes[static_cast<std::size_t>(a)] =
                (mask >> a) & 1 ? counts[static_cast<std::size_t>(a)] : ((bits >> b++) & 1 ? -2 : -1);
          add_job(codes);
        }
      }
      add_job(AxisCodes(static_cast<std::size_t>(k), std::max(lattice, 2)));
    } else {
      add_job(AxisCodes(static_cast<std::size_t>(k), -1));
    }
    parts1_.resize(keys1.size());
    parts2_.resize(keys2.size());
    for (std::size_t i = 0; i < keys1.size(); ++i) parts1_[i] = part_points(f, keys1[i], false);
    for (std::size_t i = 0; i < keys2.size(); ++i) parts2_[i] = part_points(f, keys2[i], true);
  }

  std::int64_t samples() const {
    std::int64_t s = 0;
    for (const auto& [a, b] : jobs_) s += static_cast<std::int64_t>(parts1_[a].size() * parts2_[b].size());
    return s;
  }

  /// visit(worker, image point) for every sample; workers own disjoint job subsets.
  void run(int workers, const std::function<void(int, const Vec&)>& visit) const {
    parallel_for(static_cast<std::size_t>(workers), [&](std::size_t w) {
      for (std::size_t j = w; j < jobs_.size(); j += static_cast<std::size_t>(workers)) {
        const auto& X = parts1_[jobs_[j].first];
        const auto& Y = parts2_[jobs_[j].second];
        for (const Vec& x : X)
          for (const Vec& y : Y) visit(static_cast<int>(w), f_.combine(x, y));
      }
    });
  }

 private:
  const Family& f_;
  std::vector<std::pair<std::size_t, std::size_t>> jobs_;
  std::vector<std::vector<Vec>> parts1_, parts2_;
};

struct Bounds {
  Vec lo, hi;
  double rho_max = 0.0;
};

// Image bounding box in w coordinates from a coarse sweep.
Bounds image_bounds(const ChartManifold& m, const Family& f, const RasterFrame& frame, int lattice) {
  const Mat to_w = frame.P.transpose() * m.metric(frame.z0);
  const int workers = worker_count();
  std::vector<Bounds> part(static_cast<std::size_t>(workers));
  for (auto& b : part) {
    b.lo = Vec::Constant(f.n, kInf);
    b.hi = Vec::Constant(f.n, -kInf);
  }
  const Sweep sweep(f, std::vector<int>(static_cast<std::size_t>(f.k()), 9), lattice);
  sweep.run(workers, [&](int w, const Vec& x) {
    Bounds& b = part[static_cast<std::size_t>(w)];
    const Vec v = to_w * (x - frame.z0);
    b.lo = b.lo.cwiseMin(v);
    b.hi = b.hi.cwiseMax(v);
    b.rho_max = std::max(b.rho_max, m.density(x));
  });
  Bounds out = part[0];
  for (const auto& b : part) {
    out.lo = out.lo.cwiseMin(b.lo);
    out.hi = out.hi.cwiseMax(b.hi);
    out.rho_max = std::max(out.rho_max, b.rho_max);
  }
  const double pad = 0.01 * (out.hi - out.lo).maxCoeff();
  out.lo.array() -= pad;
  out.hi.array() += pad;
  return out;
}

RasterGrid coarsen(const RasterGrid& g) {
  RasterGrid c = g;
  c.h = 2.0 * g.h;
  for (auto& k : c.counts) k = (k + 1) / 2;
  return c;
}

// Samples per parameter axis so consecutive image points are under h/2 apart in w coordinates.
std::vector<int> covering_counts(const ChartManifold& m, const Family& f, const RasterGrid& grid, double safety) {
  const int k = f.k();
  std::vector<int> counts(static_cast<std::size_t>(k), 1);
  if (f.eps == 0.0) return counts;
  const Vec center = Vec::Constant(k, 0.5 * f.eps);
  const double step = 1e-2 * f.eps;
  const Mat to_w = grid.P.transpose() * m.metric(grid.z0);
  for (int a = 0; a < k; ++a) {
    const Vec e = Vec::Unit(k, a) * step;
    const double lip = (to_w * (f.eval(center + e) - f.eval(center - e))).norm() / (2.0 * step);
    const double c = std::ceil(safety * lip * f.eps / (0.5 * grid.h)) + 1.0;
    if (c > double(1 << 24)) throw InputError("covering criterion needs more samples than the budget allows");
    counts[static_cast<std::size_t>(a)] = std::max(2, static_cast<int>(c));
  }
  return counts;
}

MeasureEstimate rasterize(const ChartManifold& m, const Family& f, const RasterGrid& grid, const RasterOptions& opt) {
  const int workers = worker_count();
  MeasureEstimate out;
  out.h = grid.h;
  double values[2];
  int level = 0;
  for (const RasterGrid& g : {coarsen(grid), grid}) {
    const Sweep sweep(f, covering_counts(m, f, g, opt.lipschitz_safety), opt.lattice_per_axis);
    std::vector<LineRaster> rasters;
    for (int w = 0; w < workers; ++w) rasters.emplace_back(g);
    std::vector<std::int64_t> lost(static_cast<std::size_t>(workers), 0);
    sweep.run(workers, [&](int w, const Vec& x) {
      if (!rasters[static_cast<std::size_t>(w)].add(x)) ++lost[static_cast<std::size_t>(w)];
    });
    for (int w = 1; w < workers; ++w) rasters[0].merge(rasters[static_cast<std::size_t>(w)]);
    for (auto l : lost)
      if (l > 0) throw EstimatorError("image left the raster grid");
    const LineRaster::Parts parts = rasters[0].measure_parts(m);
    values[level] = parts.total;
    if (level == 1) {
      out.boundary = parts.boundary;
      out.marked_lines = rasters[0].marked_lines();
      out.samples = sweep.samples();
    }
    ++level;
  }
  out.coarse = values[0];
  out.value = values[1];
  out.error = std::max(std::abs(values[0] - values[1]), out.boundary);
  return out;
}

void check_raster_dim(const ChartManifold& m, const RasterOptions& opt) {
  if (m.dim() < 2) throw InputError("rasters need dimension at least 2");
  if (m.dim() > opt.max_dim) throw InputError("raster dimension above the configured cap");
}

std::int64_t lines_for(const ChartManifold& m, const RasterOptions& opt) {
  return opt.lines_per_side > 0 ? opt.lines_per_side : default_lines_per_side(m.dim());
}

Family pushforward_family(const PotentialSpec& spec, double t, const CubeSet& A) {
  Family f;
  f.n = static_cast<int>(A.x0.size());
  f.n1 = f.n;
  f.eps = A.eps;
  f.first = [&spec, &A, t](const Vec& u) { return transport_map(spec, t, A.point(u)); };
  f.combine = [](const Vec& a, const Vec&) { return a; };
  return f;
}

Family midpoint_family(const PotentialSpec& spec, double t, const CubeSet& A) {
  const ChartManifold& m = *spec.manifold;
  Family f;
  f.n = static_cast<int>(A.x0.size());
  f.n1 = f.n2 = f.n;
  f.eps = A.eps;
  f.first = [&A](const Vec& u) { return A.point(u); };
  f.second = [&spec, &A](const Vec& u) { return transport_map(spec, 1.0, A.point(u)); };
  f.combine = [&m, t](const Vec& x, const Vec& y) -> Vec {
    if (t == 1.0) return y;
    return exp_map(m, x, t * log_map(m, x, y));
  };
  return f;
}

double box_surface(const Vec& lo, const Vec& hi) {
  const Vec w = hi - lo;
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    double face = 1.0;
    for (Eigen::Index j = 0; j < w.size(); ++j)
      if (j != i) face *= w(j);
    s += face;
  }
  return 2.0 * s;
}

}  // namespace

PushforwardReport pushforward_raster(const PotentialSpec& spec, double t, const CubeSet& A, const RasterOptions& opt,
                                     const RasterGrid* grid) {
  const ChartManifold& m = *spec.manifold;
  check_raster_dim(m, opt);
  if (!(t >= 0.0 && t <= 1.0)) throw InputError("t must lie in [0, 1]");
  const Family f = pushforward_family(spec, t, A);
  const RasterFrame frame = grid ? RasterFrame{grid->z0, grid->P} : transported_frame(spec, A, t);
  const Bounds b = image_bounds(m, f, frame, opt.lattice_per_axis);
  PushforwardReport r;
  r.grid = grid ? *grid : make_raster_grid(m, frame.z0, frame.P, b.lo, b.hi, lines_for(m, opt));
  r.raster = rasterize(m, f, r.grid, opt);
  r.jacobian = transported_measure(spec, t, A);
  r.tolerance = 2.0 * r.grid.h * box_surface(b.lo, b.hi) * b.rho_max * std::abs(frame.P.determinant());
  if (std::abs(r.raster.value - r.jacobian.value) > r.tolerance + r.jacobian.error)
    throw EstimatorError("pushforward raster and Jacobian estimates disagree: " + std::to_string(r.raster.value) +
                         " vs " + std::to_string(r.jacobian.value));
  return r;
}

MidpointRaster midpoint_raster(const PotentialSpec& spec, const CubeSet& A, double t, const RasterOptions& opt,
                               const RasterGrid* grid) {
  const ChartManifold& m = *spec.manifold;
  check_raster_dim(m, opt);
  if (!(t >= 0.0 && t <= 1.0)) throw InputError("t must lie in [0, 1]");
  const Family f = midpoint_family(spec, t, A);
  MidpointRaster r;
  if (grid) {
    r.grid = *grid;
  } else {
    const RasterFrame frame = transported_frame(spec, A, t);
    const Bounds b = image_bounds(m, f, frame, opt.lattice_per_axis);
    r.grid = make_raster_grid(m, frame.z0, frame.P, b.lo, b.hi, lines_for(m, opt));
  }
  r.raster = rasterize(m, f, r.grid, opt);
  return r;
}

namespace {

std::vector<Vec> lattice_points(const ParamSet& S, int samples) {
  std::vector<Vec> params;
  for_each_index(std::vector<int>(static_cast<std::size_t>(S.dim), samples), [&](const std::vector<int>& idx) {
    Vec u(S.dim);
    for (int i = 0; i < S.dim; ++i) u(i) = linspace(idx[static_cast<std::size_t>(i)], samples, S.side);
    params.push_back(u);
  });
  std::vector<Vec> out(params.size());
  parallel_for(params.size(), [&](std::size_t i) { out[i] = S.map(params[i]); });
  return out;
}

double lattice_extreme(const ChartManifold& m, const ParamSet& A, const ParamSet& B, double K, int samples) {
  const std::vector<Vec> a = lattice_points(A, samples), b = lattice_points(B, samples);
  const bool inf = K >= 0.0;
  std::vector<double> best(a.size(), inf ? kInf : -kInf);
  parallel_for(a.size(), [&](std::size_t i) {
    for (const Vec& y : b) {
      const double d = geodesic_distance(m, a[i], y);
      best[i] = inf ? std::min(best[i], d) : std::max(best[i], d);
    }
  });
  return inf ? *std::min_element(best.begin(), best.end()) : *std::max_element(best.begin(), best.end());
}

}  // namespace

double theta(const ChartManifold& m, const ParamSet& A, const ParamSet& B, double K, int samples) {
  if (A.dim < 0 || B.dim < 0 || !A.map || !B.map) throw InputError("theta needs two parametrized sets");
  if (samples < 2) throw InputError("theta needs at least 2 samples per axis");
  // Keep the fine lattice pair count near 2e6.
  const int dims = A.dim + B.dim;
  while (samples > 2 && std::pow(2.0 * samples - 1.0, dims) > 2e6) --samples;
  const double coarse = lattice_extreme(m, A, B, K, samples);
  const double fine = lattice_extreme(m, A, B, K, 2 * samples - 1);
  return std::max(0.0, fine + (fine - coarse) / 3.0);
}

namespace {

ParamSet cube_param(const CubeSet& A) { return {static_cast<int>(A.x0.size()), A.eps, [&A](const Vec& u) { return A.point(u); }}; }

ParamSet image_param(const PotentialSpec& spec, const CubeSet& A) {
  return {static_cast<int>(A.x0.size()), A.eps,
          [&spec, &A](const Vec& u) { return transport_map(spec, 1.0, A.point(u)); }};
}

// d(m^{1/N}) from dm.
double root_error(double value, double error, double N) {
  if (!(value > 0.0)) return error > 0.0 ? std::pow(error, 1.0 / N) : 0.0;
  return std::pow(value, 1.0 / N - 1.0) * error / N;
}

BMReport assemble(const PotentialSpec& spec, const CubeSet& A, double t, double K, double N, const MidpointRaster& mid) {
  BMReport r;
  r.t = t;
  r.K = K;
  r.N = N;
  r.grid = mid.grid;
  r.mM = mid.raster;
  r.mA = cube_measure(A);
  r.mB = transported_measure(spec, 1.0, A);
  r.theta = theta(*spec.manifold, cube_param(A), image_param(spec, A), K);
  const double ta = tau(K, N, 1.0 - t, r.theta), tb = tau(K, N, t, r.theta);
  r.lhs = std::pow(r.mM.value, 1.0 / N);
  r.rhs = ta * std::pow(r.mA.value, 1.0 / N) + tb * std::pow(r.mB.value, 1.0 / N);
  r.margin = r.lhs - r.rhs;
  r.error = root_error(r.mM.value, r.mM.error, N) + ta * root_error(r.mA.value, r.mA.error, N) +
            tb * root_error(r.mB.value, r.mB.error, N);
  return r;
}

}  // namespace

BMReport bm_check(const PotentialSpec& spec, const CubeSet& A, double t, double K, double N, const RasterOptions& opt) {
  if (!(t > 0.0 && t < 1.0)) throw InputError("t must lie in (0, 1)");
  if (!(N > 1.0)) throw InputError("N must exceed 1");
  return assemble(spec, A, t, K, N, midpoint_raster(spec, A, t, opt));
}

InterpolationReport interpolation_defect(const PotentialSpec& spec, double K, double N, int steps) {
  if (steps < 8 || steps % 2 != 0) throw InputError("steps must be even and at least 8");
  const auto n = spec.x0.size();
  const MatrixJacobiField f = reparametrized_field(*spec.manifold, spec.x0, spec.v0, spec.lambda,
                                                   spec.alpha0 * Mat::Identity(n, n), N, steps);
  InterpolationReport r;
  r.lambda = spec.lambda;
  r.D0 = f.distortion.front();
  r.Dhalf = f.distortion[static_cast<std::size_t>(steps / 2)];
  r.D1 = f.distortion.back();
  r.tau_half = tau(K, N, 0.5, spec.lambda);
  r.defect = r.tau_half * (r.D0 + r.D1) - r.Dhalf;
  r.defect_over_lambda2 = r.defect / (spec.lambda * spec.lambda);
  return r;
}

double renyi_entropy(const std::vector<double>& rho, const std::vector<double>& weights, double N) {
  if (rho.size() != weights.size()) throw InputError("density and weight lists differ in length");
  if (!(N >= 1.0)) throw InputError("N must be at least 1");
  double mass = 0.0, e = 0.0;
  for (std::size_t k = 0; k < rho.size(); ++k) {
    if (!(rho[k] >= 0.0) || !(weights[k] >= 0.0)) throw InputError("densities and weights must be non-negative");
    mass += rho[k] * weights[k];
    e -= std::pow(rho[k], 1.0 - 1.0 / N) * weights[k];
  }
  if (std::abs(mass - 1.0) > 1e-6) throw InputError("density is not normalized");
  return e;
}

CdCheckReport cd_check_along_transport(const PotentialSpec& spec, const CubeSet& A, double K, double N,
                                       const std::vector<double>& t_grid, int order, int steps) {
  const ChartManifold& m = *spec.manifold;
  const int n = static_cast<int>(A.x0.size());
  if (A.eps <= 0.0) throw InputError("cd check needs a cube with positive side");
  std::vector<std::size_t> at;
  for (double t : t_grid) {
    const double k = t * steps;
    if (!(t >= 0.0 && t <= 1.0) || std::abs(k - std::round(k)) > 1e-9)
      throw InputError("every t must be a multiple of 1 / steps in [0, 1]");
    at.push_back(static_cast<std::size_t>(std::lround(k)));
  }
  const double mA = cube_measure(A, order).value;
  const double rho0 = 1.0 / mA;
  const double scale = std::pow(mA, 1.0 / N);

  // Integrand per t at one cube parameter u.
  auto integrand = [&](const Vec& u) {
    const Vec x = A.point(u);
    const Vec grad = spec.gradient(x);
    const Mat frame = orthonormal_frame(m, x, grad);
    const Mat H = potential_hessian(spec, x, frame);
    JacobiOptions jo;
    jo.frame0 = frame;
    const MatrixJacobiField f = reparametrized_field(m, x, grad, spec.lambda, H, N, steps, jo);
    const double d = spec.lambda * std::sqrt(norm2(m, x, grad));
    const double w = parameter_density(A, u) * std::pow(rho0, 1.0 - 1.0 / N);
    std::vector<double> out;
    for (std::size_t k = 0; k < at.size(); ++k) {
      const double t = t_grid[k];
      out.push_back(w * (f.distortion[at[k]] - tau(K, N, 1.0 - t, d) - tau(K, N, t, d) * f.distortion.back()));
    }
    return out;
  };
  auto quad = [&](int q_order) {
    const Quadrature1D q = gauss_legendre01(q_order);
    std::vector<std::vector<int>> nodes;
    for_each_index(std::vector<int>(static_cast<std::size_t>(n), q_order),
                   [&](const std::vector<int>& idx) { nodes.push_back(idx); });
    std::vector<std::vector<double>> values(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t j) {
      Vec u(n);
      double w = 1.0;
      for (int i = 0; i < n; ++i) {
        const auto a = static_cast<std::size_t>(nodes[j][static_cast<std::size_t>(i)]);
        u(i) = A.eps * q.nodes[a];
        w *= A.eps * q.weights[a];
      }
      values[j] = integrand(u);
      for (double& v : values[j]) v *= w;
    });
    std::vector<double> sum(at.size(), 0.0);
    for (const auto& v : values)
      for (std::size_t k = 0; k < at.size(); ++k) sum[k] += v[k];
    return sum;
  };
  if (order < 2) throw InputError("quadrature order must be at least 2");
  const std::vector<double> hi = quad(order), lo = quad(order - 1);
  CdCheckReport r;
  r.t = t_grid;
  for (std::size_t k = 0; k < at.size(); ++k) {
    r.margin.push_back(hi[k]);
    r.error.push_back(std::abs(hi[k] - lo[k]));
    r.normalized.push_back(hi[k] / scale);
  }
  return r;
}

double linear_problem_violation(const MidpointOperators& ops, const CubeSet& A, int samples) {
  if (A.frame_coords.size() == 0) throw InputError("cube is not curvature aligned");
  const Mat& Q = A.frame_coords;
  const Mat M1 = Q.transpose() * ops.M1 * Q, M2 = Q.transpose() * ops.M2 * Q, M3 = Q.transpose() * ops.M3 * Q;
  const auto solver = M3.partialPivLu();
  const int n = static_cast<int>(A.x0.size());
  const ParamSet P{n, A.eps, [](const Vec& u) { return u; }};
  const std::vector<Vec> pts = lattice_points(P, samples);
  double worst = 0.0;
  for (const Vec& u : pts)
    for (const Vec& v : pts) {
      const Vec z = solver.solve(0.5 * (M1 * u + M2 * v));
      for (int i = 0; i < n; ++i) worst = std::max({worst, -z(i), z(i) - A.eps});
    }
  return worst;
}

double midpoint_inclusion_distance(const PotentialSpec& spec, const MidpointOperators& ops, const CubeSet& A,
                                   int samples) {
  if (A.frame_coords.size() == 0) throw InputError("cube is not curvature aligned");
  const ChartManifold& m = *spec.manifold;
  const int n = static_cast<int>(A.x0.size());
  const RasterFrame frame = transported_frame(spec, A, 0.5);
  const Mat to_w = frame.P.transpose() * m.metric(frame.z0);
  const Mat M3 = A.frame_coords.transpose() * ops.M3 * A.frame_coords;
  const auto solver = M3.partialPivLu();
  const Family f = midpoint_family(spec, 0.5, A);
  const ParamSet PA{n, A.eps, f.first}, PB{n, A.eps, f.second};
  const std::vector<Vec> xs = lattice_points(PA, samples), ys = lattice_points(PB, samples);
  std::vector<double> worst(xs.size(), 0.0);
  parallel_for(xs.size(), [&](std::size_t i) {
    for (const Vec& y : ys) {
      const Vec w = to_w * log_map(m, frame.z0, f.combine(xs[i], y));
      const Vec u = solver.solve(w).cwiseMax(0.0).cwiseMin(A.eps);
      worst[i] = std::max(worst[i], (w - M3 * u).norm());
    }
  });
  return *std::max_element(worst.begin(), worst.end());
}

const std::vector<double>& default_lambda_schedule() {
  static const std::vector<double> s{0.1, 0.07, 0.05, 0.035, 0.025};
  return s;
}

CounterexampleReport counterexample_search(const ChartManifold& m, double K, double N, double delta, const Vec& x0,
                                           const Vec& v0, const std::vector<double>& schedule,
                                           const RasterOptions& opt) {
  m.require_in_domain(x0);
  if (v0.size() != m.dim()) throw InputError("direction has the wrong dimension");
  if (!(delta > 0.0)) throw InputError("delta must be positive");
  if (schedule.empty()) throw InputError("empty lambda schedule");
  const double len = std::sqrt(norm2(m, x0, v0));
  if (!(len > 0.0)) throw InputError("direction must be nonzero");
  CounterexampleReport r;
  r.K = K;
  r.N = N;
  r.delta = delta;
  r.x0 = x0;
  r.v0 = v0 / len;
  r.ricci = r.v0.dot(modified_ricci_at(m, x0, N) * r.v0);
  if (!(r.ricci < K - 3.0 * delta))
    throw PreconditionError("Ric^{N,m}(v0, v0) = " + std::to_string(r.ricci) + " is not below K - 3 delta = " +
                            std::to_string(K - 3.0 * delta));

  RasterOptions ro = opt;
  if (ro.lines_per_side == 0 && m.dim() == 2) ro.lines_per_side = 16384;
  PotentialOptions po;
  po.lambda_max = std::max(0.1, *std::max_element(schedule.begin(), schedule.end()));
  for (double lambda : schedule) {
    CounterexampleStage st;
    st.lambda = lambda;
    st.eps = std::pow(lambda, 4);
    const PotentialSpec spec = build_potential(m, x0, r.v0, N, lambda, po);
    midpoint_operators(spec);  // admissibility of lambda
    const CubeSet A = curvature_aligned_cube(spec, st.eps);
    st.interpolation = interpolation_defect(spec, K, N);
    const MidpointRaster mid = midpoint_raster(spec, A, 0.5, ro);
    st.bm = assemble(spec, A, 0.5, K, N, mid);
    st.pushforward_half = pushforward_raster(spec, 0.5, A, ro, &mid.grid).raster;
    const double a = mid.raster.value, b = st.pushforward_half.value;
    st.midpoint_ratio = std::pow(a / b, 1.0 / N) - 1.0;
    st.midpoint_ratio_error = (st.midpoint_ratio + 1.0) * (mid.raster.error / a + st.pushforward_half.error / b) / N;
    st.comparability = b / st.bm.mA.value;
    st.theta_offset = std::abs(st.bm.theta - lambda) / st.eps;
    st.certified = st.bm.margin < -3.0 * st.bm.error;
    r.stages.push_back(st);
    if (st.certified && !r.certified) r.certified = r.stages.size() - 1;
  }
  return r;
}

MidpointControl midpoint_control(const CounterexampleReport& r) {
  MidpointControl c;
  if (r.stages.empty()) return c;
  for (const auto& s : r.stages) c.C.push_back(s.midpoint_ratio / (std::pow(s.lambda, 4) + s.eps));
  c.C_star = std::max(c.C.front(), 0.0);
  c.bounded = true;
  for (const auto& s : r.stages) {
    const double scale = std::pow(s.lambda, 4) + s.eps;
    if (s.midpoint_ratio - s.midpoint_ratio_error > 2.0 * c.C_star * scale) c.bounded = false;
  }
  return c;
}

}  // namespace bmcd

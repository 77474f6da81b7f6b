#include "bmcd/raster.hpp"

#include <cmath>
#include <limits>

#include "bmcd/error.hpp"
#include "bmcd/kernels.hpp"

namespace bmcd {

std::int64_t RasterGrid::line_count() const {
  std::int64_t c = 1;
  for (auto k : counts) c *= k;
  return c;
}

RasterGrid make_raster_grid(const ChartManifold& m, const Vec& z0, const Mat& P, const Vec& lo, const Vec& hi,
                            std::int64_t lines_per_side) {
  const auto n = z0.size();
  if (lines_per_side < 4) throw InputError("raster needs at least 4 lines per side");
  RasterGrid g;
  g.z0 = z0;
  g.P = P;
  g.to_w = P.transpose() * m.metric(z0);
  double width = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) width = std::max(width, hi(i) - lo(i));
  if (!(width > 0.0)) width = std::max((hi - lo).maxCoeff(), 1e-300);
  g.h = width / static_cast<double>(lines_per_side);
  g.origin = Vec(n - 1);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    g.origin(i) = lo(i) - 2.0 * g.h;
    g.counts.push_back(static_cast<std::int64_t>(std::ceil((hi(i) - lo(i)) / g.h)) + 4);
  }
  if (g.line_count() > (std::int64_t{1} << 28)) throw InputError("raster grid exceeds the memory budget");
  return g;
}

LineRaster::LineRaster(const RasterGrid& grid)
    : grid_(grid),
      lo_(static_cast<std::size_t>(grid.line_count()), std::numeric_limits<double>::infinity()),
      hi_(static_cast<std::size_t>(grid.line_count()), -std::numeric_limits<double>::infinity()) {}

bool LineRaster::add(const Vec& x) {
  const Vec w = grid_.to_local(x);
  const auto n = w.size();
  std::int64_t index = 0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double c = std::floor((w(i) - grid_.origin(i)) / grid_.h);
    if (!(c >= 0.0 && c < static_cast<double>(grid_.counts[i]))) return false;
    index = index * grid_.counts[i] + static_cast<std::int64_t>(c);
  }
  auto k = static_cast<std::size_t>(index);
  const double v = w(n - 1);
  if (v < lo_[k]) lo_[k] = v;
  if (v > hi_[k]) hi_[k] = v;
  return true;
}

void LineRaster::merge(const LineRaster& other) {
  for (std::size_t k = 0; k < lo_.size(); ++k) {
    lo_[k] = std::min(lo_[k], other.lo_[k]);
    hi_[k] = std::max(hi_[k], other.hi_[k]);
  }
}

std::int64_t LineRaster::marked_lines() const {
  std::int64_t c = 0;
  for (std::size_t k = 0; k < lo_.size(); ++k) c += lo_[k] <= hi_[k];
  return c;
}

double LineRaster::measure(const ChartManifold& m) const { return measure_parts(m).total; }

LineRaster::Parts LineRaster::measure_parts(const ChartManifold& m) const {
  const auto n = grid_.z0.size();
  const Quadrature1D q = gauss_legendre01(3);
  const double scale = std::abs(grid_.P.determinant()) * std::pow(grid_.h, static_cast<double>(n - 1));
  std::vector<double> lengths, integrals, edge_lengths, edge_integrals;
  std::vector<double> rho(q.nodes.size());
  std::vector<std::int64_t> cell(static_cast<std::size_t>(n - 1));
  Vec w(n);
  auto marked = [&](std::int64_t k) { return lo_[static_cast<std::size_t>(k)] <= hi_[static_cast<std::size_t>(k)]; };
  for (std::size_t k = 0; k < lo_.size(); ++k) {
    if (!(lo_[k] <= hi_[k])) continue;
    auto rest = static_cast<std::int64_t>(k);
    for (Eigen::Index i = n - 2; i >= 0; --i) {
      cell[static_cast<std::size_t>(i)] = rest % grid_.counts[static_cast<std::size_t>(i)];
      rest /= grid_.counts[static_cast<std::size_t>(i)];
      w(i) = grid_.origin(i) + (static_cast<double>(cell[static_cast<std::size_t>(i)]) + 0.5) * grid_.h;
    }
    bool edge = false;
    std::int64_t stride = 1;
    for (Eigen::Index i = n - 2; i >= 0 && !edge; --i) {
      const auto c = cell[static_cast<std::size_t>(i)];
      const auto count = grid_.counts[static_cast<std::size_t>(i)];
      const auto kk = static_cast<std::int64_t>(k);
      edge = c == 0 || c + 1 == count || !marked(kk - stride) || !marked(kk + stride);
      stride *= count;
    }
    const double len = hi_[k] - lo_[k];
    for (std::size_t j = 0; j < q.nodes.size(); ++j) {
      w(n - 1) = lo_[k] + q.nodes[j] * len;
      rho[j] = m.density(grid_.to_chart(w));
    }
    double integral = 0.0;
    for (std::size_t j = 0; j < rho.size(); ++j) integral += q.weights[j] * rho[j];
    lengths.push_back(len);
    integrals.push_back(integral);
    if (edge) {
      edge_lengths.push_back(len);
      edge_integrals.push_back(integral);
    }
  }
  Parts p;
  p.total = kernels::weighted_sum(lengths.data(), integrals.data(), lengths.size()) * scale;
  p.boundary = kernels::weighted_sum(edge_lengths.data(), edge_integrals.data(), edge_lengths.size()) * scale;
  return p;
}

}  // namespace bmcd

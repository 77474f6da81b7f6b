#pragma once

// Measure of a point-sampled image set on a line grid.
//
// Points are expressed in affine coordinates w = P^T g(z0) (x - z0), P g(z0)-orthonormal.
// The first n-1 axes are cut into cells of side h; each cell is a line along the last axis
// and keeps the [min, max] range of the w_n values that fall into it. The measure of the
// set is the sum over lines of h^{n-1} times the integral of the density across that range.

#include <cstdint>
#include <vector>

#include "bmcd/manifold.hpp"

namespace bmcd {

struct RasterGrid {
  Vec z0;
  Mat P;          // chart columns, orthonormal at z0
  Mat to_w;       // P^T g(z0)
  Vec origin;     // lower corner over the first n-1 axes
  double h = 0.0;
  std::vector<std::int64_t> counts;  // lines per axis (n-1 entries)

  std::int64_t line_count() const;
  Vec to_local(const Vec& x) const { return to_w * (x - z0); }
  Vec to_chart(const Vec& w) const { return z0 + P * w; }
};

/// Grid covering the box [lo, hi] (first n-1 axes of w) with `lines_per_side` lines across the
/// widest axis and two spare cells on every side.
RasterGrid make_raster_grid(const ChartManifold& m, const Vec& z0, const Mat& P, const Vec& lo, const Vec& hi,
                            std::int64_t lines_per_side);

class LineRaster {
 public:
  explicit LineRaster(const RasterGrid& grid);

  /// Adds a chart point. Returns false if it falls outside the grid.
  bool add(const Vec& x);
  void merge(const LineRaster& other);

  std::int64_t marked_lines() const;
  /// Sum over marked lines of h^{n-1} * int rho dw_n, rho = e^{-V} sqrt(det g) |det P|.
  double measure(const ChartManifold& m) const;
  /// Same sum, plus the part carried by lines with an unmarked neighbour (the resolution limit).
  struct Parts {
    double total = 0.0;
    double boundary = 0.0;
  };
  Parts measure_parts(const ChartManifold& m) const;
  const RasterGrid& grid() const { return grid_; }
  double line_min(std::int64_t i) const { return lo_[static_cast<std::size_t>(i)]; }
  double line_max(std::int64_t i) const { return hi_[static_cast<std::size_t>(i)]; }

 private:
  RasterGrid grid_;
  std::vector<double> lo_;
  std::vector<double> hi_;
};

/// Estimate at the fine grid. The error bar is the larger of the coarse-to-fine change and the
/// measure carried by boundary lines.
struct MeasureEstimate {
  double value = 0.0;
  double error = 0.0;
  double coarse = 0.0;
  double boundary = 0.0;
  double h = 0.0;
  std::int64_t marked_lines = 0;
  std::int64_t samples = 0;
};

}  // namespace bmcd

#include "bmcd/kernels.hpp"

namespace bmcd::kernels::scalar {

MinLoc combo_defect_min(const double* a, const double* b, const double* f, std::size_t count, double c0, double c1) {
  MinLoc best{(b[0] * c0 + a[0] * c1) - f[0], 0};
  for (std::size_t k = 1; k < count; ++k) {
    const double d = (b[k] * c0 + a[k] * c1) - f[k];
    if (d < best.value) best = {d, k};
  }
  return best;
}

double weighted_sum(const double* w, const double* v, std::size_t count) {
  double s = 0.0;
  for (std::size_t k = 0; k < count; ++k) s += w[k] * v[k];
  return s;
}

}  // namespace bmcd::kernels::scalar

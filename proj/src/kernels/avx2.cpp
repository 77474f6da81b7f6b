#include <immintrin.h>

#include "bmcd/kernels.hpp"

namespace bmcd::kernels::avx2 {

MinLoc combo_defect_min(const double* a, const double* b, const double* f, std::size_t count, double c0, double c1) {
  const __m256d vc0 = _mm256_set1_pd(c0);
  const __m256d vc1 = _mm256_set1_pd(c1);
  std::size_t k = 0;
  MinLoc best{0.0, 0};
  bool have = false;
  if (count >= 4) {
    __m256d vmin = _mm256_set1_pd(__builtin_inf());
    __m256d vidx = _mm256_setzero_pd();
    __m256d lane = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
    const __m256d four = _mm256_set1_pd(4.0);
    for (; k + 4 <= count; k += 4) {
      const __m256d t0 = _mm256_mul_pd(_mm256_loadu_pd(b + k), vc0);
      const __m256d t1 = _mm256_mul_pd(_mm256_loadu_pd(a + k), vc1);
      const __m256d d = _mm256_sub_pd(_mm256_add_pd(t0, t1), _mm256_loadu_pd(f + k));
      const __m256d lt = _mm256_cmp_pd(d, vmin, _CMP_LT_OQ);
      vmin = _mm256_blendv_pd(vmin, d, lt);
      vidx = _mm256_blendv_pd(vidx, lane, lt);
      lane = _mm256_add_pd(lane, four);
    }
    alignas(32) double mins[4], idx[4];
    _mm256_store_pd(mins, vmin);
    _mm256_store_pd(idx, vidx);
    best = {mins[0], static_cast<std::size_t>(idx[0])};
    for (int l = 1; l < 4; ++l) {
      const auto i = static_cast<std::size_t>(idx[l]);
      if (mins[l] < best.value || (mins[l] == best.value && i < best.index)) best = {mins[l], i};
    }
    have = true;
  }
  for (; k < count; ++k) {
    const double d = (b[k] * c0 + a[k] * c1) - f[k];
    if (!have || d < best.value) {
      best = {d, k};
      have = true;
    }
  }
  return best;
}

double weighted_sum(const double* w, const double* v, std::size_t count) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= count; k += 4) acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + k), _mm256_loadu_pd(v + k)));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; k < count; ++k) s += w[k] * v[k];
  return s;
}

}  // namespace bmcd::kernels::avx2

#include <atomic>

#include "bmcd/kernels.hpp"

namespace bmcd::kernels {

namespace {

bool detect_avx2() {
#if defined(BMCD_HAVE_AVX2_TU) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect_avx2() ? Isa::Avx2 : Isa::Scalar};
  return isa;
}

}  // namespace

bool avx2_supported() { return detect_avx2(); }

Isa active_isa() { return current().load(std::memory_order_relaxed); }

Isa set_isa(Isa isa) {
  if (isa == Isa::Avx2 && !avx2_supported()) isa = Isa::Scalar;
  current().store(isa, std::memory_order_relaxed);
  return isa;
}

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

MinLoc combo_defect_min(const double* a, const double* b, const double* f, std::size_t count, double c0, double c1) {
#if defined(BMCD_HAVE_AVX2_TU)
  if (active_isa() == Isa::Avx2) return avx2::combo_defect_min(a, b, f, count, c0, c1);
#endif
  return scalar::combo_defect_min(a, b, f, count, c0, c1);
}

double weighted_sum(const double* w, const double* v, std::size_t count) {
#if defined(BMCD_HAVE_AVX2_TU)
  if (active_isa() == Isa::Avx2) return avx2::weighted_sum(w, v, count);
#endif
  return scalar::weighted_sum(w, v, count);
}

}  // namespace bmcd::kernels

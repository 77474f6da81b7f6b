#pragma once

// Hot inner loops with a scalar reference and an AVX2 variant chosen at run time.
// Both variants evaluate each element with the same operation order, so per-element
// results are bit-identical; reductions over sums may differ in the last bits.

#include <cstddef>

namespace bmcd::kernels {

enum class Isa { Scalar, Avx2 };

/// ISA used by the dispatching entry points (best supported unless overridden).
Isa active_isa();
/// Forces an ISA; requesting Avx2 on a CPU without it falls back to Scalar. Returns the ISA in effect.
Isa set_isa(Isa isa);
bool avx2_supported();
const char* isa_name(Isa isa);

struct MinLoc {
  double value;
  std::size_t index;  // first index attaining the minimum
};

/// min_k (b[k] * c0 + a[k] * c1) - f[k] over k < count (count >= 1).
MinLoc combo_defect_min(const double* a, const double* b, const double* f, std::size_t count, double c0, double c1);

/// sum_k w[k] * v[k].
double weighted_sum(const double* w, const double* v, std::size_t count);

namespace scalar {
MinLoc combo_defect_min(const double* a, const double* b, const double* f, std::size_t count, double c0, double c1);
double weighted_sum(const double* w, const double* v, std::size_t count);
}  // namespace scalar

namespace avx2 {
MinLoc combo_defect_min(const double* a, const double* b, const double* f, std::size_t count, double c0, double c1);
double weighted_sum(const double* w, const double* v, std::size_t count);
}  // namespace avx2

}  // namespace bmcd::kernels

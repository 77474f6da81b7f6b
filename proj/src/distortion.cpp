#include "bmcd/distortion.hpp"

#include <cmath>
#include <limits>

#include "bmcd/error.hpp"
#include "bmcd/kernels.hpp"

namespace bmcd {

double sigma(double K, double N, double t, double theta) {
  if (!(N > 0.0)) throw InputError("sigma requires N > 0");
  if (!(t >= 0.0 && t <= 1.0)) throw InputError("sigma requires t in [0, 1]");
  if (!(theta >= 0.0) || !std::isfinite(theta) || !std::isfinite(K)) throw InputError("sigma requires finite theta >= 0");
  const double k_theta2 = K * theta * theta;
  if (k_theta2 >= N * M_PI * M_PI) return std::numeric_limits<double>::infinity();
  if (k_theta2 == 0.0) return t;
  const double alpha = theta * std::sqrt(std::abs(K) / N);
  if (alpha < 1e-4) {
    const double a2 = alpha * alpha, u = 1.0 - t * t;
    const double sgn = K > 0 ? 1.0 : -1.0;
    return t * (1.0 + sgn * u * a2 / 6.0 + u * (7.0 - 3.0 * t * t) * a2 * a2 / 360.0);
  }
  if (K > 0) return std::sin(t * alpha) / std::sin(alpha);
  return std::sinh(t * alpha) / std::sinh(alpha);
}

double tau(double K, double N, double t, double theta) {
  if (!(N > 1.0)) throw InputError("tau requires N > 1");
  const double s = sigma(K, N - 1.0, t, theta);
  if (std::isinf(s)) return s;
  if (K * theta * theta == 0.0) return t;
  if (t == 0.0) return 0.0;
  return std::pow(t, 1.0 / N) * std::pow(s, 1.0 - 1.0 / N);
}

double tau_expansion_defect(double K, double N, double t, double lambda) {
  return tau(K, N, t, lambda) - t * (1.0 + (1.0 - t * t) * K * lambda * lambda / (6.0 * N));
}

GridDefect ode_defect(const SampledFunction& f, double Lambda) {
  if (f.size() < 65) throw InputError("sampled function needs at least 65 nodes");
  const double h = f.step();
  GridDefect out{std::numeric_limits<double>::infinity(), 0, 0, 0};
  for (std::size_t k = 1; k + 1 < f.size(); ++k) {
    const double d = (f.values[k + 1] - 2.0 * f.values[k] + f.values[k - 1]) / (h * h) + Lambda * f.values[k];
    if (d < out.value) {
      out.value = d;
      out.index = k;
    }
  }
  return out;
}

GridDefect midpoint_inequality_defect(const SampledFunction& f, double Lambda) {
  if (!(Lambda < M_PI * M_PI)) throw InputError("midpoint inequality requires Lambda < pi^2");
  const std::size_t n = f.size();
  if (n < 3) throw InputError("sampled function needs at least 3 nodes");
  const std::size_t last = n - 1;
  // sigma^{(t)}_{Lambda,1}(d h) = S[k] / S[d] with k = t d, S[k] = sin(k c), k, or sinh(k c).
  const double c = f.step() * std::sqrt(std::abs(Lambda));
  std::vector<double> S(n), R(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double kd = static_cast<double>(k);
    S[k] = Lambda > 0 ? std::sin(kd * c) : (Lambda < 0 ? std::sinh(kd * c) : kd);
  }
  for (std::size_t k = 0; k < n; ++k) R[k] = S[last - k];  // R[last - j] = S[j]

  GridDefect out{std::numeric_limits<double>::infinity(), 0, 0, 0};
  for (std::size_t i0 = 0; i0 + 2 <= last; ++i0) {
    for (std::size_t i1 = i0 + 2; i1 <= last; ++i1) {
      const std::size_t d = i1 - i0;
      const double c0 = f.values[i0] / S[d], c1 = f.values[i1] / S[d];
      // m runs over i0+1 .. i1-1: a = S[m - i0] from S[1], b = S[i1 - m] = R[last - i1 + m].
      const std::size_t first = i0 + 1, count = d - 1;
      const kernels::MinLoc r =
          kernels::combo_defect_min(&S[1], &R[last - i1 + first], &f.values[first], count, c0, c1);
      if (r.value < out.value) out = {r.value, first + r.index, i0, i1};
    }
  }
  return out;
}

}  // namespace bmcd

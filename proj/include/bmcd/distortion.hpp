#pragma once

#include <cstddef>
#include <vector>

namespace bmcd {

/// sigma^{(t)}_{K,N}(theta). Returns +infinity when N pi^2 <= K theta^2. Requires N > 0, t in [0, 1], theta >= 0.
double sigma(double K, double N, double t, double theta);

/// tau^{(t)}_{K,N}(theta) = t^{1/N} sigma^{(t)}_{K,N-1}(theta)^{1-1/N}. Requires N > 1.
double tau(double K, double N, double t, double theta);

/// tau^{(t)}_{K,N}(lambda) - t (1 + (1 - t^2) K lambda^2 / (6N)).
double tau_expansion_defect(double K, double N, double t, double lambda);

/// Nonnegative samples on a uniform grid of [0, 1].
struct SampledFunction {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double step() const { return 1.0 / static_cast<double>(values.size() - 1); }
  double node(std::size_t k) const { return static_cast<double>(k) * step(); }

  template <class F>
  static SampledFunction from(F&& f, std::size_t nodes = 129) {
    SampledFunction s;
    s.values.resize(nodes);
    for (std::size_t k = 0; k < nodes; ++k) s.values[k] = f(static_cast<double>(k) / static_cast<double>(nodes - 1));
    return s;
  }
};

struct GridDefect {
  double value = 0.0;
  std::size_t index = 0;  // argmin node (ode) or midpoint node (midpoint)
  std::size_t s0 = 0;     // midpoint only
  std::size_t s1 = 0;
};

/// min over interior nodes of f'' + Lambda f with central second differences. Needs >= 65 nodes.
GridDefect ode_defect(const SampledFunction& f, double Lambda);

/// min over grid triples s0 < m < s1 of
///   sigma^{(1-t)}_{Lambda,1}(|s1 - s0|) f(s0) + sigma^{(t)}_{Lambda,1}(|s1 - s0|) f(s1) - f(m),
/// where m = (1 - t) s0 + t s1. Requires Lambda < pi^2.
GridDefect midpoint_inequality_defect(const SampledFunction& f, double Lambda);

}  // namespace bmcd

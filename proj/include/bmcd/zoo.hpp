#pragma once

// Built-in manifolds with closed-form oracles.
//
//   euclidean(n)          flat R^n, chart [-10, 10]^n
//   sphere(n, r)          radius-r sphere, stereographic chart from the north pole, chart [-2r, 2r]^n
//   hyperbolic(n)         Poincare ball of curvature -1, chart [-0.9/sqrt(n), 0.9/sqrt(n)]^n
//   gaussian(n, a)        flat, V = a |x|^2 / 2, chart [-5, 5]^n
//   saddle_weight(n, c)   flat, V = -c x1^2, chart [-5, 5]^n

#include <string>
#include <vector>

#include "bmcd/manifold.hpp"

namespace bmcd {

/// Whether CD(K, N) holds on the chart domain, from the closed-form modified Ricci tensor.
struct CdStatus {
  enum class Verdict { Holds, Fails, Unknown };
  Verdict verdict = Verdict::Unknown;
  double ricci_lower_bound = 0.0;  // inf of Ric^{N,m}(v, v) / |v|^2 over the chart
  Vec witness_point;               // where the infimum is attained
  Vec witness_direction;           // unit vector (in g) attaining it
};

struct ZooEntry {
  std::string name;        // canonical, e.g. "sphere(2,1)"
  ChartManifold manifold;
  CdStatus cd_status(double K, double N) const;

  std::string family;
  std::vector<double> params;
};

/// Throws InputError on unknown names or invalid parameters.
ZooEntry builtin(const std::string& family, const std::vector<double>& params);
/// Parses "family(p1,p2,...)"; omitted trailing parameters take defaults (r = a = c = 1).
ZooEntry builtin(const std::string& text);
std::vector<std::string> builtin_families();

}  // namespace bmcd

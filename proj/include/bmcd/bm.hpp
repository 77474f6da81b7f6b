#pragma once

// Brunn-Minkowski and curvature-dimension checks on small cubes transported by a potential.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "bmcd/raster.hpp"
#include "bmcd/transport.hpp"

namespace bmcd {

/// {exp_x0(E u) : u in [0, eps]^n}.
struct CubeSet {
  const ChartManifold* manifold = nullptr;
  Vec x0;
  Mat basis;        // chart columns, orthonormal at x0
  Vec eigenvalues;  // of R_{y0}(x0) along the basis (empty for plain cubes)
  Mat frame_coords; // basis in the potential's normal frame (empty for plain cubes)
  double eps = 0.0;

  Vec point(const Vec& u) const;
};

/// Cube on the eigenbasis of R_{y0}(x0), y0 = T^lambda(x0): ascending eigenvalues, ties ordered by
/// descending lexicographic order of chart components, each vector signed so its first nonzero
/// chart component is positive. Requires eps <= lambda^4 and the cube inside the potential's core.
CubeSet curvature_aligned_cube(const PotentialSpec& spec, double eps);

/// Plain cube on a given orthonormal basis (no eps restriction).
CubeSet make_cube(const ChartManifold& m, const Vec& x0, const Mat& basis, double eps);

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// m(A) by tensor Gauss-Legendre quadrature of the pulled-back density; error = |order q - order q-1|.
Estimate cube_measure(const CubeSet& A, int order = 3);

/// m(T_t(A)) = int_A e^{-(V(T_t x) - V(x))} |det d_x T_t| dm, with d_x T_t from the Hessian identity.
Estimate transported_measure(const PotentialSpec& spec, double t, const CubeSet& A, int order = 3);

struct RasterOptions {
  std::int64_t lines_per_side = 0;  // 0: 4096 (n = 2), 256 (n = 3), 64 (n = 4)
  int lattice_per_axis = 5;
  double lipschitz_safety = 1.25;
  int max_dim = 4;
};

std::int64_t default_lines_per_side(int n);

/// Raster frame at z = T_t(x0): z and the cube basis parallel transported to it.
struct RasterFrame {
  Vec z0;
  Mat P;
};
RasterFrame transported_frame(const PotentialSpec& spec, const CubeSet& A, double t);

struct PushforwardReport {
  MeasureEstimate raster;
  Estimate jacobian;
  double tolerance = 0.0;  // two boundary cells' worth of measure
  RasterGrid grid;
};

/// Raster of T_t(A) compared against the Jacobian estimate; throws EstimatorError on disagreement.
/// With `grid`, the fine level uses it and the coarse level doubles its cell size.
PushforwardReport pushforward_raster(const PotentialSpec& spec, double t, const CubeSet& A,
                                     const RasterOptions& opt = {}, const RasterGrid* grid = nullptr);

struct MidpointRaster {
  MeasureEstimate raster;
  RasterGrid grid;
};

/// Raster of M_t(A, T^lambda(A)) = {exp_x(t log_x T^lambda(x')) : x, x' in A}.
MidpointRaster midpoint_raster(const PotentialSpec& spec, const CubeSet& A, double t, const RasterOptions& opt = {},
                               const RasterGrid* grid = nullptr);

/// A set given by a parametrization of [0, side]^dim.
struct ParamSet {
  int dim = 0;
  double side = 0.0;
  std::function<Vec(const Vec&)> map;
};

/// inf (K >= 0) or sup (K < 0) of d(x, y) over lattices with `samples` and 2 samples - 1 points per
/// axis, extrapolated once.
double theta(const ChartManifold& m, const ParamSet& A, const ParamSet& B, double K, int samples = 9);

struct BMReport {
  double t = 0.0, K = 0.0, N = 0.0;
  double theta = 0.0;
  Estimate mA, mB;
  MeasureEstimate mM;
  double lhs = 0.0, rhs = 0.0;
  double margin = 0.0;
  double error = 0.0;
  RasterGrid grid;
};

/// m(M_t)^{1/N} - tau^{(1-t)}(Theta) m(A)^{1/N} - tau^{(t)}(Theta) m(B)^{1/N} with B = T^lambda(A).
BMReport bm_check(const PotentialSpec& spec, const CubeSet& A, double t, double K, double N,
                  const RasterOptions& opt = {});

struct InterpolationReport {
  double lambda = 0.0;
  double D0 = 0.0, Dhalf = 0.0, D1 = 0.0;
  double tau_half = 0.0;
  double defect = 0.0;  // tau (D0 + D1) - Dhalf
  double defect_over_lambda2 = 0.0;
};

InterpolationReport interpolation_defect(const PotentialSpec& spec, double K, double N, int steps = 256);

/// -sum rho_k^{1-1/N} w_k; requires sum rho_k w_k = 1 to 1e-6.
double renyi_entropy(const std::vector<double>& rho, const std::vector<double>& weights, double N);

struct CdCheckReport {
  std::vector<double> t;
  std::vector<double> margin;      // RHS - LHS of the entropy inequality
  std::vector<double> error;
  std::vector<double> normalized;  // margin / m(A)^{1/N}
};

/// mu0 uniform on A, mu1 = T^lambda_# mu0; quadrature over A with Jacobi-field densities. Each t must
/// be a multiple of 1 / steps.
CdCheckReport cd_check_along_transport(const PotentialSpec& spec, const CubeSet& A, double K, double N,
                                       const std::vector<double>& t_grid, int order = 3, int steps = 64);

struct CounterexampleStage {
  double lambda = 0.0;
  double eps = 0.0;
  InterpolationReport interpolation;
  BMReport bm;
  MeasureEstimate pushforward_half;
  double midpoint_ratio = 0.0;  // (m(M_{1/2}) / m(T_{1/2}(A)))^{1/N} - 1
  double midpoint_ratio_error = 0.0;
  double comparability = 0.0;   // m(T_{1/2}(A)) / m(A)
  double theta_offset = 0.0;    // |Theta - lambda| / eps
  bool certified = false;
};

struct CounterexampleReport {
  double K = 0.0, N = 0.0, delta = 0.0;
  Vec x0, v0;
  double ricci = 0.0;  // Ric^{N,m}(v0, v0)
  std::vector<CounterexampleStage> stages;
  std::optional<std::size_t> certified;
};

const std::vector<double>& default_lambda_schedule();

/// Runs every lambda in the schedule with eps = lambda^4 (rasters default to 16384 lines per side at
/// n = 2). Throws PreconditionError unless
/// Ric^{N,m}_{x0}(v0, v0) < K - 3 delta (v0 is normalized first).
CounterexampleReport counterexample_search(const ChartManifold& m, double K, double N, double delta, const Vec& x0,
                                           const Vec& v0, const std::vector<double>& schedule,
                                           const RasterOptions& opt = {});

/// Largest violation of M3^{-1}((M1 u + M2 u') / 2) in [0, eps]^n over lattice pairs, operators taken
/// in the cube basis.
double linear_problem_violation(const MidpointOperators& ops, const CubeSet& A, int samples = 5);

/// Largest distance, in normal coordinates at z0 on the transported frame, from a lattice midpoint
/// F_{1/2}(x, T(x')) to the linear model M3 [0, eps]^n.
double midpoint_inclusion_distance(const PotentialSpec& spec, const MidpointOperators& ops, const CubeSet& A,
                                   int samples = 5);

struct MidpointControl {
  std::vector<double> C;  // (ratio - 1) / (lambda^4 + eps) per stage
  double C_star = 0.0;    // from the first stage, floored at 0
  bool bounded = false;   // ratio - 1 - uncertainty <= 2 C_star (lambda^4 + eps) on every stage
};
MidpointControl midpoint_control(const CounterexampleReport& r);

}  // namespace bmcd

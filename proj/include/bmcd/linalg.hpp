#pragma once

#include <Eigen/Dense>
#include <vector>

namespace bmcd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Eigen-decomposition of a small symmetric matrix.
struct SymmetricEigen {
  Vec values;    // ascending
  Mat vectors;   // columns, orthonormal in the Euclidean sense
  int sweeps = 0;
};

/// Cyclic Jacobi rotations until every off-diagonal entry is below `tol`
/// (relative to the Frobenius norm, absolute floor 1e-300). Values are sorted ascending.
/// Throws ConvergenceError after `max_sweeps`.
SymmetricEigen jacobi_eigen(const Mat& a, double tol = 1e-12, int max_sweeps = 100);

/// Minimum eigenvalue of the pencil (a, b) with b SPD: min_v a(v,v) / b(v,v).
double min_generalized_eigenvalue(const Mat& a, const Mat& b);

/// True if `a` is symmetric positive definite with smallest eigenvalue above `floor`.
bool is_spd(const Mat& a, double floor = 1e-12);

/// Symmetric part.
inline Mat sym(const Mat& a) { return 0.5 * (a + a.transpose()); }

/// Gauss-Legendre nodes and weights on [0, 1].
struct Quadrature1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Quadrature1D gauss_legendre01(int order);

}  // namespace bmcd

#include "bmcd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bmcd/error.hpp"

namespace bmcd {

SymmetricEigen jacobi_eigen(const Mat& input, double tol, int max_sweeps) {
  const Eigen::Index n = input.rows();
  Mat a = sym(input);
  Mat v = Mat::Identity(n, n);
  const double scale = std::max(a.norm(), 1e-300);

  auto off = [&] {
    double m = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) m = std::max(m, std::abs(a(i, j)));
    return m;
  };

  int sweep = 0;
  while (off() > tol * scale && off() > 1e-300) {
    if (sweep++ >= max_sweeps) throw ConvergenceError(off(), "Jacobi eigensolver did not converge");
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) < a(j, j); });

  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  out.sweeps = sweep;
  return out;
}

double min_generalized_eigenvalue(const Mat& a, const Mat& b) {
  Eigen::LLT<Mat> llt(b);
  if (llt.info() != Eigen::Success) throw ModelError("generalized eigenproblem: metric is not positive definite");
  Mat l_inv = llt.matrixL().solve(Mat::Identity(b.rows(), b.cols()));
  Mat c = sym(l_inv * a * l_inv.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(c, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

bool is_spd(const Mat& a, double floor) {
  if (a.rows() != a.cols()) return false;
  if (!a.allFinite()) return false;
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0) > floor;
}

Quadrature1D gauss_legendre01(int order) {
  // Golub-Welsch on the symmetric tridiagonal Jacobi matrix.
  if (order < 1) throw InputError("quadrature order must be >= 1");
  Mat t = Mat::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    t(k - 1, k) = b;
    t(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(t);
  Quadrature1D q;
  for (int k = 0; k < order; ++k) {
    const double x = es.eigenvalues()(k);
    const double w = 2.0 * es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
    q.nodes.push_back(0.5 * (x + 1.0));
    q.weights.push_back(0.5 * w);
  }
  return q;
}

}  // namespace bmcd

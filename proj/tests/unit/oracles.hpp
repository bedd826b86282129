#pragma once
// Independent reference computations used only by tests.

#include "domsplit/types.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

namespace oracle {

using domsplit::Matrix;
using domsplit::Vector;
using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

inline Vector random_unit(std::mt19937_64& rng, int d) {
  Vector v = random_matrix(rng, d, 1).col(0);
  return v / v.norm();
}

// Orthonormal basis of a random r-dimensional subspace of R^d.
inline Matrix random_basis(std::mt19937_64& rng, int d, int r) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd(random_matrix(rng, d, r)));
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, r);
  return q;
}

// Eigen's two-sided Jacobi SVD in extended precision; singular values ascending.
inline Eigen::Matrix<long double, Eigen::Dynamic, 1> sigmas_ld(const MatrixL& a) {
  Eigen::JacobiSVD<MatrixL> svd(a);
  Eigen::Matrix<long double, Eigen::Dynamic, 1> s = svd.singularValues().reverse();
  return s;
}

inline Eigen::VectorXd sigmas(const Matrix& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(a)};
  return svd.singularValues().reverse();
}

// Max and min of |A u| over a dense sample of unit u in the column span of basis (2-D spans only).
struct SphereExtremes {
  double max = 0.0;
  double min = 1e300;
};
inline SphereExtremes circle_sample(const Matrix& a, const Matrix& basis, int n = 10000) {
  SphereExtremes out;
  for (int k = 0; k < n; ++k) {
    const double t = std::numbers::pi * k / n;
    Vector u = basis.col(0) * std::cos(t);
    if (basis.cols() > 1) u += basis.col(1) * std::sin(t);
    const double v = (a * u).norm() / u.norm();
    out.max = std::max(out.max, v);
    out.min = std::min(out.min, v);
  }
  return out;
}

// Angle between two lines of R^2 as min over sampled unit u of angle(u, a) + angle(u, b).
inline double sampled_angle_2d(const Vector& a, const Vector& b, int n = 10000) {
  const Vector ua = a / a.norm(), ub = b / b.norm();
  double best = std::numbers::pi;
  for (int k = 0; k <= n; ++k) {
    const double t = std::numbers::pi * k / n;
    const Vector u{{std::cos(t), std::sin(t)}};
    const double da = std::acos(std::min(1.0, std::abs(u.dot(ua))));
    const double db = std::acos(std::min(1.0, std::abs(u.dot(ub))));
    best = std::min(best, da + db);
  }
  return best;
}

// Column space of a rank-1 2x2 matrix by Gaussian elimination: the pivot column, normalized.
inline Vector column_space_rank1(const Matrix& a) {
  int pr = 0, pc = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (std::abs(a(i, j)) > std::abs(a(pr, pc))) pr = i, pc = j;
  const Vector c = a.col(pc);
  return c / c.norm();
}

}  // namespace oracle

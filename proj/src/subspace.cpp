#include "domsplit/subspace.hpp"

#include "domsplit/errors.hpp"
#include "domsplit/linalg.hpp"

#include <cmath>

namespace domsplit {

Subspace Subspace::zero(int d) { return Subspace(Matrix(d, 0)); }

Subspace Subspace::full(int d) { return Subspace(Matrix::Identity(d, d)); }

Subspace Subspace::span(const Matrix& vectors, double tol) {
  const int d = static_cast<int>(vectors.rows());
  if (vectors.cols() == 0) return zero(d);
  // Left singular vectors of the column set; rank from the relative threshold.
  Matrix square = Matrix::Zero(d, d);
  double threshold = tol;
  if (vectors.cols() <= d) {
    square.leftCols(vectors.cols()) = vectors;
  } else {
    // More vectors than dimensions: V V^T has the same column space, squared spectrum.
    square = vectors * vectors.transpose();
    threshold = tol * tol;
  }
  const SvdResult s = svd_ascending(square);
  const double top = s.sigmas(d - 1);
  if (!(top > 0.0)) return zero(d);
  int rank = 0;
  for (int i = 0; i < d; ++i)
    if (s.sigmas(i) > threshold * top) ++rank;
  Matrix basis(d, rank);
  for (int j = 0; j < rank; ++j) basis.col(j) = s.codomain.col(d - rank + j);
  return Subspace(basis);
}

Subspace Subspace::line(const Vector& v) {
  Matrix m(v.size(), 1);
  m.col(0) = v;
  return span(m);
}

Subspace Subspace::from_orthonormal(const Matrix& basis) {
  const Matrix gram = basis.transpose() * basis;
  if ((gram - Matrix::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff() > 1e-10 && basis.cols() > 0)
    throw InvalidArgument("basis is not orthonormal");
  return Subspace(basis);
}

Matrix Subspace::projector() const { return basis_ * basis_.transpose(); }

double Subspace::sine_to(const Vector& v) const {
  const double n = v.norm();
  if (n == 0.0) throw InvalidArgument("zero vector");
  const Vector u = v / n;
  if (dim() == 0) return 1.0;
  const Vector r = u - basis_ * (basis_.transpose() * u);
  return std::min(1.0, r.norm());
}

}  // namespace domsplit

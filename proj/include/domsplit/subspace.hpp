#pragma once

#include "domsplit/types.hpp"

namespace domsplit {

// A linear subspace of R^d stored as an orthonormal column basis (d x r, 0 <= r <= d).
class Subspace {
 public:
  Subspace() = default;

  static Subspace zero(int d);
  static Subspace full(int d);
  // Span of the columns, orthonormalized; columns below tol relative to the largest are dropped.
  static Subspace span(const Matrix& vectors, double tol = 1e-12);
  static Subspace line(const Vector& v);
  // Takes a basis that is already orthonormal (checked to 1e-10).
  static Subspace from_orthonormal(const Matrix& basis);

  int ambient_dim() const { return static_cast<int>(basis_.rows()); }
  int dim() const { return static_cast<int>(basis_.cols()); }
  bool trivial() const { return dim() == 0; }
  const Matrix& basis() const { return basis_; }
  Matrix projector() const;
  // Distance from unit-normalized v to the subspace, in [0, 1].
  double sine_to(const Vector& v) const;

 private:
  explicit Subspace(Matrix basis) : basis_(std::move(basis)) {}
  Matrix basis_;
};

}  // namespace domsplit

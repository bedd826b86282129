#pragma once

#include "domsplit/subspace.hpp"
#include "domsplit/types.hpp"

#include <span>
#include <vector>

namespace domsplit {

// Singular value decomposition with sigmas in ascending order.
// A * domain.col(i) = sigmas(i) * codomain.col(i).
struct SvdResult {
  Vector sigmas;
  Vector log_sigmas;  // -inf for exact zeros; accurate even when sigmas under/overflow
  Matrix domain;
  Matrix codomain;

  int dim() const { return static_cast<int>(sigmas.size()); }
  // log(sigma_k / sigma_{k+1}) with 1-based k; -inf when sigma_k = 0.
  double log_gap(int k) const;
  // True when sigma_k < sigma_{k+1} * (1 - rel).
  bool has_gap(int k, double rel = 1e-10) const;
};

SvdResult svd_ascending(const Matrix& a);

// Singular values (ascending) of a rectangular m x n matrix with n <= m.
Vector singular_values(const Matrix& a);

Subspace kernel(const Matrix& a, double tol = kDefaultRankTol);
Subspace image(const Matrix& a, double tol = kDefaultRankTol);
Subspace kernel(const SvdResult& svd, double tol = kDefaultRankTol);
Subspace image(const SvdResult& svd, double tol = kDefaultRankTol);

double norm_restricted(const Matrix& a, const Subspace& v);
double conorm_restricted(const Matrix& a, const Subspace& v);
double operator_norm(const Matrix& a);

// A_n ... A_1 for mats = {A_1, ..., A_n}.
Matrix product_chain(std::span<const Matrix> mats);
// Same direction as product_chain, rescaled to unit max entry after every factor.
Matrix normalized_product(std::span<const Matrix> mats);
// Image of v under a, dropping directions whose image is below rel * ||a||.
Subspace image_of(const Matrix& a, const Subspace& v, double rel = 1e-10);

// Running product P = A_n ... A_1 held as Q * diag(exp(log_d)) * T.
class FactoredProduct {
 public:
  explicit FactoredProduct(int d);
  void push(const Matrix& a);
  int dim() const { return d_; }
  std::size_t length() const { return steps_; }
  SvdResult svd() const;

 private:
  int d_;
  std::size_t steps_ = 0;
  Matrix q_;
  Vector log_d_;
  Matrix t_;
};

SvdResult svd_of_chain(std::span<const Matrix> mats);

}  // namespace domsplit

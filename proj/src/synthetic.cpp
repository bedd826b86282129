#include "domsplit/synthetic.hpp"

#include "domsplit/errors.hpp"
#include "domsplit/torus_map.hpp"

#include <cmath>

namespace domsplit::synthetic {

Matrix example_ex_matrix(std::ptrdiff_t n) {
  Matrix a(2, 2);
  a << 0.0, 1.0, 0.0, 1.0 / static_cast<double>(n + 1);
  return a;
}

CocycleSegment example_ex(std::ptrdiff_t first, std::ptrdiff_t last) {
  if (first < 1 || last < first) throw InvalidArgument("example_ex needs 1 <= first <= last");
  std::vector<Matrix> mats;
  for (std::ptrdiff_t n = first; n <= last; ++n) mats.push_back(example_ex_matrix(n));
  return CocycleSegment::synthetic(first, std::move(mats));
}

CocycleSegment constant(const Matrix& a, std::ptrdiff_t first, std::ptrdiff_t length) {
  if (length < 1) throw InvalidArgument("length must be positive");
  return CocycleSegment::synthetic(first, std::vector<Matrix>(static_cast<std::size_t>(length), a));
}

CocycleSegment diagonal(const Vector& diag, std::ptrdiff_t first, std::ptrdiff_t length) {
  return constant(Matrix(diag.asDiagonal()), first, length);
}

Matrix rotation_matrix(double theta) {
  Matrix r(2, 2);
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

CocycleSegment rotation(double theta, std::ptrdiff_t first, std::ptrdiff_t length) {
  return constant(rotation_matrix(theta), first, length);
}

namespace {

CriticalCase critical_sandwich(const Matrix& end, int middle, int kappa) {
  if (middle < 1) throw InvalidArgument("middle block must be nonempty");
  const int d = static_cast<int>(end.rows());
  std::vector<Matrix> mats(static_cast<std::size_t>(middle + 5), Matrix::Identity(d, d));
  mats[2] = end;
  mats[static_cast<std::size_t>(middle + 3)] = end;
  return {CocycleSegment::synthetic(-3, std::move(mats)), {-1, middle}, kappa};
}

}  // namespace

CriticalCase nondominated_2d(int middle) {
  Matrix end = Matrix::Zero(2, 2);
  end(1, 1) = 1.0;
  return critical_sandwich(end, middle, 1);
}

CriticalCase nondominated_3d(int middle) {
  Point x(3);
  x << 0.5, 0.5, 0.25;
  return critical_sandwich(catalog::fold_fold().jacobian(x), middle, 2);
}

CocycleSegment nilpotent() {
  Matrix n = Matrix::Zero(2, 2);
  n(0, 1) = 1.0;
  return constant(n, 0, 2);
}

}  // namespace domsplit::synthetic

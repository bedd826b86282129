#pragma once

#include "domsplit/cocycle.hpp"

namespace domsplit::synthetic {

// A_n = [[0, 1], [0, 1/(n+1)]] placed at index n for n = first..last (first >= 1).
CocycleSegment example_ex(std::ptrdiff_t first, std::ptrdiff_t last);
Matrix example_ex_matrix(std::ptrdiff_t n);

// The same matrix at every index first .. first+length-1.
CocycleSegment constant(const Matrix& a, std::ptrdiff_t first, std::ptrdiff_t length);
CocycleSegment diagonal(const Vector& diag, std::ptrdiff_t first, std::ptrdiff_t length);
CocycleSegment rotation(double theta, std::ptrdiff_t first, std::ptrdiff_t length);

Matrix rotation_matrix(double theta);

struct CriticalCase {
  CocycleSegment cocycle;
  std::vector<std::ptrdiff_t> hits;
  int kappa = 1;
};

// Critical Jacobians at indices -1 and `middle`, identities elsewhere on [-3, middle + 1].
// 2-D ends are diag(0, 1); 3-D ends are the fold x fold Jacobian on its kernel-2 line.
CriticalCase nondominated_2d(int middle);
CriticalCase nondominated_3d(int middle);
// [[0, 1], [0, 0]] twice.
CocycleSegment nilpotent();

}  // namespace domsplit::synthetic

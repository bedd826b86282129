#pragma once

#include "domsplit/geometry.hpp"
#include "domsplit/linalg.hpp"
#include "domsplit/orbit.hpp"
#include "domsplit/subspace.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace domsplit {

// J_first .. J_last with J_i mapping the tangent space at x_i to that at x_{i+1}.
// Synthetic cocycles carry no base points.
struct CocycleSegment {
  std::ptrdiff_t first = 0;
  std::vector<Matrix> jacobians;
  std::vector<Point> points;  // empty, or one base point per jacobian

  static CocycleSegment from_orbit(const OrbitSegment& orbit);
  static CocycleSegment synthetic(std::ptrdiff_t first, std::vector<Matrix> mats);

  int dim() const { return jacobians.empty() ? 0 : static_cast<int>(jacobians.front().rows()); }
  std::ptrdiff_t last() const { return first + static_cast<std::ptrdiff_t>(jacobians.size()) - 1; }
  bool has_chain(std::ptrdiff_t i, std::ptrdiff_t n) const { return n >= 0 && i >= first && i + n - 1 <= last(); }
  const Matrix& at(std::ptrdiff_t i) const;
  const Point* point(std::ptrdiff_t i) const;
  // {J_i, ..., J_{i+n-1}}; throws OutOfRange when not inside the segment.
  std::vector<Matrix> chain(std::ptrdiff_t i, std::ptrdiff_t n) const;
  // Same cocycle with every Jacobian multiplied by c.
  CocycleSegment scaled(double c) const;
};

SvdResult singular_values_along(const CocycleSegment& c, std::ptrdiff_t i, int n);

// Span of the domain singular vectors strictly below sigma_{kappa+1}; NoGap when
// sigma_kappa and sigma_{kappa+1} agree to relative 1e-10.
Subspace en_from_svd(const SvdResult& s, int kappa);
Subspace en_subspace(const CocycleSegment& c, std::ptrdiff_t i, int n, int kappa);

struct GapEntry {
  int n = 0;
  double log_sigma_k = 0.0;
  double log_sigma_k1 = 0.0;
  double ratio = 1.0;
  bool no_gap = false;
};

struct GapReport {
  std::vector<GapEntry> entries;
  bool rate_defined = false;
  double rate = 1.0;         // fitted lambda in r_n <= c lambda^n
  double log_constant = 0.0;
  bool passes = false;
};

GapReport gap_report(const CocycleSegment& c, std::ptrdiff_t i, int n_max, int kappa);

struct ELimit {
  Subspace limit;
  CauchyReport report;
  int n0 = 0;
  std::vector<Subspace> sequence;  // E_{n0} .. E_{n_max}
};

// Never throws NotConverged; check report.converged.
ELimit e_limit_report(const CocycleSegment& c, std::ptrdiff_t i, int kappa, int n_max, double tol);
ELimit e_limit(const CocycleSegment& c, std::ptrdiff_t i, int kappa, int n_max, double tol);

using ConeField = std::function<Cone(std::ptrdiff_t index)>;

struct FBackward {
  Subspace limit;
  std::vector<double> distances;  // between depth k and k+1 approximations
  int depth = 0;
};

FBackward f_backward(const CocycleSegment& c, std::ptrdiff_t i, const ConeField& cones, int ell, int depth);
FBackward f_backward(const CocycleSegment& c, std::ptrdiff_t i, const Cone& cone, int ell, int depth);

struct VWSplitting {
  Subspace v;
  Subspace w;
};

VWSplitting singular_splitting_vw(const Matrix& j, int kappa);

struct KoneProbe {
  std::optional<int> n;
  std::vector<double> worst_slack;  // index N-1
};

KoneProbe kone_contraction_probe(const CocycleSegment& c, std::ptrdiff_t i, const Subspace& f_center, double delta,
                                 double eps, int ell, int n_max, int samples = 256);

struct SingularBoundEntry {
  int n = 0;
  double log_value = 0.0;  // log sigma_{kappa+1}(x, n+1)
  double slack_lower = 0.0;
  double slack_upper = 0.0;
};

struct SingularBounds {
  double k1 = 0.0;
  std::vector<SingularBoundEntry> entries;
  double min_slack = 0.0;
};

// Two-sided growth bound of sigma_{kappa+1} along the chain from i, for n = 1..n_max.
// K_1 is the smallest conorm of J_{i+n} on Df^n(E_n^perp).
SingularBounds singular_value_bounds(const CocycleSegment& c, std::ptrdiff_t i, int kappa, int n_max);

}  // namespace domsplit

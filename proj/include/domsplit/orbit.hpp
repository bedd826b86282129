#pragma once

#include "domsplit/torus_map.hpp"
#include "domsplit/types.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace domsplit {

// Points x_first .. x_last of an orbit with f(x_i) = x_{i+1}, and J_i = Df at x_i.
struct OrbitSegment {
  std::ptrdiff_t first = 0;
  std::vector<Point> points;
  std::vector<Matrix> jacobians;
  std::vector<int> branch_choices;  // preimage index picked at each backward step, nearest first

  std::ptrdiff_t last() const { return first + static_cast<std::ptrdiff_t>(points.size()) - 1; }
  bool contains(std::ptrdiff_t i) const { return i >= first && i <= last(); }
  const Point& point(std::ptrdiff_t i) const;
  const Matrix& jacobian(std::ptrdiff_t i) const;
  // max over i of torus distance between f(x_i) and x_{i+1}.
  double max_residual(const TorusMap& map) const;
};

OrbitSegment forward_orbit(const TorusMap& map, const Point& x0, int n);
// Repeats the given cycle points; index first is cycle[0]. Residual checked to 1e-9.
OrbitSegment periodic_segment(const TorusMap& map, const std::vector<Point>& cycle, std::ptrdiff_t first,
                              std::ptrdiff_t last);

struct PreimageResult {
  std::vector<Point> roots;     // sorted lexicographically
  std::vector<double> conorms;  // smallest singular value of Df at each root
  bool empty = true;
};

PreimageResult preimages(const TorusMap& map, const Point& y, int grid_res = 16, double tol = 1e-11,
                         int threads = 1);

// Explicit index list (cycled when shorter than the branch) or seeded uniform choice.
struct BranchSelector {
  std::vector<int> indices;
  std::optional<std::uint64_t> seed;

  static BranchSelector explicit_indices(std::vector<int> idx) { return {std::move(idx), std::nullopt}; }
  static BranchSelector seeded(std::uint64_t s) { return {{}, s}; }
};

OrbitSegment backward_branch(const TorusMap& map, const Point& y0, int m, const BranchSelector& selector,
                             int grid_res = 16, double tol = 1e-11);

struct CriticalScan {
  int kappa = 0;
  int m_f = 1;
  int grid_res = 0;
  int m_max = 0;
  std::vector<Point> samples;      // grid points with dim ker(Df^{m_f}) = kappa
  std::vector<int> sample_dims;
  bool has_interior = false;
  double kappa_fraction = 0.0;     // fraction of grid points at kernel dimension kappa
  bool no_critical_points() const { return kappa == 0; }
};

CriticalScan critical_scan(const TorusMap& map, int m_max, int grid_res, double tol = kDefaultRankTol,
                           int threads = 1);

// Kernel dimension of Df^m at x, from the forward chain.
int kernel_dim(const TorusMap& map, const Point& x, int m, double tol = kDefaultRankTol);

// Membership in the critical set at desk scale. Index-aware so that synthetic cocycles,
// which have no base points, can mark hits directly.
using CriticalPredicate = std::function<bool(std::ptrdiff_t index, const Point* x)>;

// x is a hit when dim ker(Df^{m_f}_x) = kappa at the given rank tolerance.
CriticalPredicate kernel_predicate(const TorusMap& map, int kappa, int m_f, double tol = kDefaultRankTol);
// x is a hit when it lies within radius of the sample cloud.
CriticalPredicate cloud_predicate(std::vector<Point> cloud, double radius);
CriticalPredicate index_predicate(std::vector<std::ptrdiff_t> hits);
CriticalPredicate constant_predicate(bool value);

double cloud_distance(const std::vector<Point>& cloud, const Point& x);

std::vector<bool> hit_mask(const OrbitSegment& orbit, const CriticalPredicate& pred);

struct LambdaOrbit {
  OrbitSegment orbit;
  std::vector<std::ptrdiff_t> hits;
  std::string strategy;  // "forward-recurrence" or "backward-search"
  int restarts_used = 0;
};

struct LambdaSearch {
  int len_fwd = 40;
  int len_bwd = 40;
  double crit_radius = 1e-3;
  std::uint64_t seed = 1;
  int restarts = 32;
  int grid_res = 16;
};

// Orbit segment meeting the critical set at some index <= -m_f and some index >= 0.
// Throws NotFound when the restart budget is exhausted.
LambdaOrbit lambda_orbit_sample(const TorusMap& map, const CriticalScan& scan, const LambdaSearch& search,
                                const CriticalPredicate& pred);

}  // namespace domsplit

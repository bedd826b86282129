#pragma once

#include "domsplit/subspace.hpp"
#include "domsplit/types.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace domsplit {

// Smallest principal angle, in [0, pi/2].
double angle_between(const Subspace& v, const Subspace& w);
// cos of the angle between V-perp and W, i.e. sine of the largest principal angle.
double grassmann_distance(const Subspace& v, const Subspace& w);
Subspace orthogonal_complement(const Subspace& v);
// Largest angle from a direction of s to the subspace t (0 when s is inside t).
double containment_angle(const Subspace& s, const Subspace& t);

// Directions within half_angle of the center subspace.
struct Cone {
  Subspace center;
  double half_angle = 0.0;

  static Cone make(Subspace center, double half_angle);
};

bool cone_contains(const Cone& c, const Vector& u);
Cone cone_dual(const Cone& c);
// True when every direction of s lies in the cone.
bool cone_contains_subspace(const Cone& c, const Subspace& s);

struct ContainmentReport {
  bool ok = false;
  double worst_slack = 0.0;
  int tested = 0;
  int skipped = 0;  // samples mapped to numerically zero vectors
};

// Deterministic unit directions on the boundary and an interior lattice of the cone.
std::vector<Vector> cone_samples(const Cone& c, int samples, std::uint64_t seed = 0);

ContainmentReport cone_image_contained(const Matrix& a, const Cone& src, const Cone& dst, double margin,
                                       int samples = 256, std::uint64_t seed = 0);

struct CauchyReport {
  std::vector<int> indices;        // n of each distance d_n = dist(S_n, S_{n+1})
  std::vector<double> distances;
  bool rate_defined = false;
  double rate = 0.0;               // fitted geometric rate
  double log_constant = 0.0;       // fitted log C in d_n ~ C rate^n
  bool converged = false;
  double final_distance = 0.0;
  bool sub_geometric = false;      // a power law fits the decay better than a geometric one
  double outlier_fraction = 0.0;   // fraction of fitted points with d_n > 1.1 C rate^n
};

std::pair<Subspace, CauchyReport> subspace_limit(const std::vector<Subspace>& sequence, double tol,
                                                 int first_index = 1);

// Halton radical inverse.
double halton(std::uint64_t index, int base);
// Deterministic unit vector in R^k from a Halton stream; k = 1 yields +-1.
Vector halton_direction(std::uint64_t index, int k, int first_prime_slot = 0);

}  // namespace domsplit

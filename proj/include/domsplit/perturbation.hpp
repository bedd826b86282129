#pragma once

#include "domsplit/cocycle.hpp"
#include "domsplit/splitting.hpp"
#include "domsplit/torus_map.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace domsplit {

// Rotation by theta in the plane of orthonormal (a, b), turning a toward b; identity elsewhere.
Matrix plane_rotation(const Vector& a, const Vector& b, double theta);
// Rotation fixing span{u, v}^perp with R u parallel to v; identity when u and v are parallel.
Matrix rotation_in_plane(const Vector& u, const Vector& v);
// Angle of a plane rotation, from ||R - I|| = 2 sin(theta / 2).
double rotation_angle(const Matrix& r);
double franks_budget(const Matrix& j, const Matrix& r);

struct AlphaReport {
  double alpha = 0.0;
  double eps0 = 0.0;
  double max_norm = 0.0;      // max ||Df_x|| over the grid
  double lower_bound = 0.0;   // eps0 / (2 max ||Df||)
  double worst_budget = 0.0;  // max budget at alpha over grid and planes
  int points = 0;
  int planes = 0;
};

AlphaReport alpha_for_epsilon(const TorusMap& map, double eps0, int grid_res, int threads = 1);
// Same search over an explicit set of matrices.
AlphaReport alpha_for_epsilon(const std::vector<Matrix>& jacobians, double eps0);

struct PerturbedChain {
  std::vector<Matrix> original;
  std::vector<Matrix> rotations;
  std::vector<double> thetas;
  double budget = 0.0;  // max ||L_i - J_i||

  std::vector<Matrix> modified() const;
};

struct MixResult {
  bool success = false;
  PerturbedChain chain;
  double residual_angle = 0.0;  // between the final lines, radians
  double n_bound = 0.0;         // max ||A_i||, ||A_i^-1||
  int aligned_at = 0;           // first step with |sin| <= 1e-9, 0 if never
};

// Greedy rotations of the running image of w toward the image of v. Throws HypothesisViolation
// naming the first i where ||A^i v|| < ||A^i w|| / 2 or a norm exceeds n_limit (when given).
MixResult mix_rotations_2d(const std::vector<Matrix>& chain, const Vector& v, const Vector& w, double delta,
                           std::optional<double> n_limit = std::nullopt);

struct MixInstance {
  std::vector<Matrix> chain;
  Vector v;
  Vector w;
};

// Chains satisfying the mixing hypothesis with bound n; every fourth instance is conformal with v perp w.
MixInstance mixing_instance(double n, int length, std::uint64_t seed, std::size_t k);
// Chains Q diag(s_i, t_i) Q^T with t_i / s_i >= 3 and v, w the contracting and expanding axes.
MixInstance dominated_instance(double n, int length, std::uint64_t seed, std::size_t k);

struct MixingLength {
  std::optional<int> l;
  int instances = 0;
  int worst_instance = -1;
};

MixingLength minimal_mixing_length(double delta, double n, int corpus = 1000, std::uint64_t seed = 1,
                                   int l_max = 256, int threads = 1);

// Embeds a 2-D mixing of w in F toward v in E along the window [i0, i0 + n) of the cocycle.
struct MixingPlan {
  std::ptrdiff_t i0 = 0;
  int n = 0;
  Vector v;  // in E(x_i0)
  Vector w;  // in F(x_i0)
  MixResult mix;               // in the moving planes V_i
  PerturbedChain ambient;      // rotations embedded in R^d
};

MixingPlan plan_mixing(const CocycleSegment& c, const SplittingSample& s, std::ptrdiff_t i0, int n, double delta);

struct KernelRaiseReport {
  std::ptrdiff_t start = 0;  // x_{tau-}
  int m = 0;
  int kernel_dim = 0;
  int kappa = 0;
  Vector log_sigmas;
  double budget = 0.0;
  double eps0 = 0.0;
  double e_annihilation = 0.0;  // ||P|E|| / ||P|| on E(x_start)
  double w_annihilation = 0.0;  // ||P w|| / ||P|| for the lifted w
  std::vector<Matrix> modified;
};

// kernel_dim counts sigmas <= rank_tol * prod ||L_i||.
// Throws BudgetExceeded, RankNotRaised, PreconditionFailed.
KernelRaiseReport build_kernel_raiser(const CocycleSegment& c, const SplittingSample& s, const ReturnTimes& times,
                                      const MixingPlan& plan, double eps0, double rank_tol = 1e-8);

struct FullKernelReport {
  int rank = 0;
  Vector log_sigmas;
  double scale = 0.0;  // product of ||J_i||
  double radius = 0.0;
  double image_diameter = 0.0;
};

// Precondition: Df^m at start has full-dimensional kernel.
FullKernelReport full_kernel_demo(const CocycleSegment& c, std::ptrdiff_t start, int m, double radius = 1e-3,
                                  int samples = 64);

}  // namespace domsplit

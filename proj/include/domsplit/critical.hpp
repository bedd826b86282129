#pragma once

#include "domsplit/cocycle.hpp"
#include "domsplit/orbit.hpp"
#include "domsplit/splitting.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace domsplit {

struct NearCriticalEntry {
  std::ptrdiff_t index = 0;
  double e_defect = 0.0;   // max angle between a direction of E and its V_f component
  double f_defect = 0.0;   // max angle between Df u and Df w over sampled u in F, u = v + w
  double e_norm = 0.0;     // ||Df | E||
  double dual_min = 0.0;   // min ||Df u|| over sampled unit u in the dual cone of V_f
  bool e_in_cone = false;  // E inside the eta-cone around V_f
  bool f_in_dual = false;  // F inside the dual cone
};

struct NearCriticalReport {
  std::vector<NearCriticalEntry> entries;
  double eta = 0.0;
  double theta = 0.0;
  double max_e_defect = 0.0;
  double max_f_defect = 0.0;
  bool pass = false;
};

// Max over sampled u in the dual cone {angle(u, V_f) >= eta} of angle(Df u, Df w), u = v + w.
double image_angle_defect(const Matrix& j, int kappa, double eta, int samples = 256);

// Indices of s whose point satisfies u_pred; PreconditionFailed when there are none.
NearCriticalReport vw_cone_sandwich(const CocycleSegment& c, const SplittingSample& s, const CriticalPredicate& u_pred,
                                    double eta, double theta, int samples = 64);

struct RhoReport {
  std::vector<NearCriticalEntry> entries;
  double rho = 0.0;  // requested
  bool pass = false;
  double rho_max = 0.0;  // largest rho with ||Df|E|| < rho and dual_min >= 2 rho at every U-index; 0 if none
};

RhoReport near_critical_bounds(const CocycleSegment& c, const SplittingSample& s, const CriticalPredicate& u_pred,
                               double rho, double eta, int samples = 256);

struct AvoidanceReport {
  bool precondition_ok = false;
  int failing_j = 0;  // first j with ||Df^j|E|| < m(Df^j|F) / 2
  bool avoids = false;
  std::optional<std::ptrdiff_t> witness;  // first index in U
};

AvoidanceReport nondomination_avoids_u(const CocycleSegment& c, const SplittingSample& s, std::ptrdiff_t i0,
                                       const CriticalPredicate& u_pred, int l);

}  // namespace domsplit

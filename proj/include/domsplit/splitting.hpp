#pragma once

#include "domsplit/cocycle.hpp"
#include "domsplit/geometry.hpp"
#include "domsplit/orbit.hpp"
#include "domsplit/subspace.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace domsplit {

// tau_plus(i) >= 0 is the first forward hit; tau_minus(i) <= -m_f the last backward hit.
struct ReturnTimes {
  std::ptrdiff_t first = 0;
  int m_f = 1;
  std::vector<std::ptrdiff_t> hits;
  std::vector<std::optional<std::ptrdiff_t>> tau_plus;
  std::vector<std::optional<std::ptrdiff_t>> tau_minus;

  std::ptrdiff_t last() const { return first + static_cast<std::ptrdiff_t>(tau_plus.size()) - 1; }
  std::optional<std::ptrdiff_t> plus(std::ptrdiff_t i) const;
  std::optional<std::ptrdiff_t> minus(std::ptrdiff_t i) const;
  bool defined(std::ptrdiff_t i) const { return plus(i) && minus(i); }
};

// Throws NoHits when no index has both return times.
ReturnTimes return_times(const CocycleSegment& c, const CriticalPredicate& pred, int m_f);

struct SplittingSample {
  int kappa = 0;
  std::string provenance;  // "return-time", "cone-limit", "pushed", "eigen"
  std::vector<std::ptrdiff_t> indices;  // increasing
  std::vector<Subspace> e;
  std::vector<Subspace> f;

  std::size_t size() const { return indices.size(); }
  std::optional<std::size_t> find(std::ptrdiff_t i) const;
  void push(std::ptrdiff_t i, Subspace e_i, Subspace f_i);
};

// E_i = ker Df^{m_f + tau+}, F_i = Im Df^{|tau-|} at every index whose chains fit in the segment.
SplittingSample candidate_splitting(const CocycleSegment& c, int kappa, const ReturnTimes& times,
                                    double rank_tol = kDefaultRankTol);

// E_0, F_0 at index i0 pushed forward along the cocycle up to the end of the segment.
SplittingSample pushed_splitting(const CocycleSegment& c, std::ptrdiff_t i0, const Subspace& e0, const Subspace& f0);

// Real eigenspaces of a constant matrix: E = the kappa eigen-directions of smallest modulus.
// Throws NoGap when the moduli at kappa, kappa+1 agree or the relevant eigenvalues are not real.
std::pair<Subspace, Subspace> eigen_splitting(const Matrix& a, int kappa);
SplittingSample constant_splitting(const CocycleSegment& c, const Subspace& e, const Subspace& f);

struct InvarianceReport {
  double e_defect = 0.0;
  double f_defect = 0.0;
  double min_angle = 0.0;
  std::ptrdiff_t e_argmax = 0;
  std::ptrdiff_t f_argmax = 0;
  int pairs = 0;
};

InvarianceReport check_invariance(const CocycleSegment& c, const SplittingSample& s);

struct DominationCheck {
  double worst_ratio = 0.0;
  std::ptrdiff_t argmax = 0;
  int tested = 0;
  bool pass = false;
};

// Throws HypothesisViolation when Df^ell restricted to some F_i is singular.
DominationCheck check_domination(const CocycleSegment& c, const SplittingSample& s, int ell, double factor = 0.5);

struct AngleCheck {
  double min_angle = 0.0;
  std::ptrdiff_t argmin = 0;
  bool pass = false;
};

AngleCheck check_angle(const SplittingSample& s, double alpha);

std::optional<int> find_domination_time(const CocycleSegment& c, const SplittingSample& s, double factor, int ell_max);

int telescoped_ell(int ell0, double c0, double factor = 0.5);

// max ||Df^i_x|| over the segment / min m(Df^j | F(x_i)) over the sample, 1 <= i, j <= ell0; at least 1.
double estimate_c0(const CocycleSegment& c, const SplittingSample& s, int ell0);

struct UniquenessReport {
  double e_distance = 0.0;
  double f_distance = 0.0;
  int common = 0;
};

UniquenessReport uniqueness_probe(const SplittingSample& a, const SplittingSample& b);

struct DominationCertificate {
  int kappa = 0;
  std::optional<int> ell;
  double alpha = 0.0;         // measured minimum angle
  double alpha_required = 0.0;
  double factor = 0.5;
  double worst_ratio = 0.0;
  double invariance_defect_e = 0.0;
  double invariance_defect_f = 0.0;
  bool pass = false;
  // Domination holds but the angle degenerates: the splitting does not extend to the closure.
  bool not_extendable = false;
};

DominationCertificate certify(const CocycleSegment& c, const SplittingSample& s, double alpha, double factor,
                              int ell_max, double defect_tol = 1e-6);

struct ConeFieldSample {
  std::vector<std::ptrdiff_t> indices;
  std::vector<Cone> cones;
  double alpha = 0.0;  // cones are {u : angle(u, E) >= alpha}
  std::optional<int> invariance_time;
  double min_margin = 0.0;  // worst slack at the invariance time
  std::vector<double> margins;

  ConeField field() const;
};

// Dual cones of E with half-angle pi/2 - alpha, alpha = min angle(E, F) / 2; invariance time
// is the smallest k <= k_max with every image strictly inside.
ConeFieldSample splitting_to_cone(const CocycleSegment& c, const SplittingSample& s, int k_max, int samples = 256);

struct ConeLimitOptions {
  int n_max = 25;
  int depth = 10;
  double tol = 1e-8;
};

struct ConeLimit {
  SplittingSample splitting;
  std::vector<CauchyReport> e_reports;
  std::vector<FBackward> f_reports;
  bool kernel_transversal = true;
};

// E from forward singular limits, F from cone centers pushed over depth * ell steps; indices
// without the full forward chain or backward cone coverage are skipped.
ConeLimit cone_criterion_to_splitting(const CocycleSegment& c, const ConeFieldSample& cones, int kappa,
                                      const ConeLimitOptions& opt);

}  // namespace domsplit

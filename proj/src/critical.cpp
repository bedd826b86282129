#include "domsplit/critical.hpp"

#include "domsplit/errors.hpp"
#include "domsplit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace domsplit {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

double line_angle(const Vector& a, const Vector& b) {
  const double na = a.norm(), nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) return kHalfPi;
  return std::acos(std::min(1.0, std::abs(a.dot(b)) / (na * nb)));
}

// Unit directions of a subspace: its basis vectors plus Halton combinations.
std::vector<Vector> subspace_directions(const Subspace& s, int samples) {
  std::vector<Vector> out;
  for (int k = 0; k < s.dim(); ++k) out.push_back(s.basis().col(k));
  if (s.dim() > 1)
    for (int k = 0; k < samples; ++k) out.push_back(s.basis() * halton_direction(k + 1, s.dim()));
  return out;
}

std::vector<std::size_t> u_indices(const CocycleSegment& c, const SplittingSample& s, const CriticalPredicate& u_pred) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < s.size(); ++k)
    if (c.has_chain(s.indices[k], 1) && u_pred(s.indices[k], c.point(s.indices[k]))) out.push_back(k);
  if (out.empty()) throw PreconditionFailed("no splitting index lies in the U-neighborhood");
  return out;
}

double dual_min_expansion(const Matrix& j, const VWSplitting& vw, double eta, int samples) {
  const Cone dual = Cone::make(vw.w, kHalfPi - eta);
  double m = std::numeric_limits<double>::infinity();
  for (const Vector& u : cone_samples(dual, samples)) m = std::min(m, (j * u).norm());
  return m;
}

NearCriticalEntry entry_at(const Matrix& j, const Subspace& e, const Subspace& f, int kappa, double eta, int samples,
                           std::ptrdiff_t index) {
  const VWSplitting vw = singular_splitting_vw(j, kappa);
  NearCriticalEntry en;
  en.index = index;
  en.e_defect = containment_angle(e, vw.v);
  const Matrix pw = vw.w.projector();
  for (const Vector& u : subspace_directions(f, samples)) en.f_defect = std::max(en.f_defect, line_angle(j * u, j * (pw * u)));
  en.e_norm = norm_restricted(j, e);
  en.dual_min = dual_min_expansion(j, vw, eta, samples);
  en.e_in_cone = cone_contains_subspace(Cone::make(vw.v, eta), e);
  en.f_in_dual = cone_contains_subspace(Cone::make(vw.w, kHalfPi - eta), f);
  return en;
}

}  // namespace

double image_angle_defect(const Matrix& j, int kappa, double eta, int samples) {
  const VWSplitting vw = singular_splitting_vw(j, kappa);
  const Matrix pw = vw.w.projector();
  double worst = 0.0;
  for (const Vector& u : cone_samples(Cone::make(vw.w, kHalfPi - eta), samples))
    worst = std::max(worst, line_angle(j * u, j * (pw * u)));
  return worst;
}

NearCriticalReport vw_cone_sandwich(const CocycleSegment& c, const SplittingSample& s, const CriticalPredicate& u_pred,
                                    double eta, double theta, int samples) {
  if (!(eta > 0.0 && eta < kHalfPi) || !(theta > 0.0 && theta < kHalfPi))
    throw InvalidArgument("eta and theta must lie in (0, pi/2)");
  NearCriticalReport rep;
  rep.eta = eta;
  rep.theta = theta;
  for (std::size_t k : u_indices(c, s, u_pred)) {
    const NearCriticalEntry en = entry_at(c.at(s.indices[k]), s.e[k], s.f[k], s.kappa, eta, samples, s.indices[k]);
    rep.max_e_defect = std::max(rep.max_e_defect, en.e_defect);
    rep.max_f_defect = std::max(rep.max_f_defect, en.f_defect);
    rep.entries.push_back(en);
  }
  rep.pass = rep.max_e_defect <= eta && rep.max_f_defect <= theta;
  return rep;
}

RhoReport near_critical_bounds(const CocycleSegment& c, const SplittingSample& s, const CriticalPredicate& u_pred,
                               double rho, double eta, int samples) {
  if (!(eta > 0.0 && eta < kHalfPi)) throw InvalidArgument("eta must lie in (0, pi/2)");
  RhoReport rep;
  rep.rho = rho;
  double e_max = 0.0, dual = std::numeric_limits<double>::infinity();
  for (std::size_t k : u_indices(c, s, u_pred)) {
    const NearCriticalEntry en = entry_at(c.at(s.indices[k]), s.e[k], s.f[k], s.kappa, eta, samples, s.indices[k]);
    e_max = std::max(e_max, en.e_norm);
    dual = std::min(dual, en.dual_min);
    rep.entries.push_back(en);
  }
  rep.pass = e_max < rho && dual >= 2 * rho;
  // Both conditions hold exactly for rho in (e_max, dual / 2].
  rep.rho_max = dual / 2 > e_max ? dual / 2 : 0.0;
  return rep;
}

AvoidanceReport nondomination_avoids_u(const CocycleSegment& c, const SplittingSample& s, std::ptrdiff_t i0,
                                       const CriticalPredicate& u_pred, int l) {
  if (l < 1) throw InvalidArgument("l must be >= 1");
  const auto k = s.find(i0);
  if (!k) throw PreconditionFailed("no splitting at index " + std::to_string(i0));
  if (!c.has_chain(i0, l)) throw OutOfRange("prefix outside the segment");
  AvoidanceReport rep;
  for (int j = 1; j <= l; ++j) {
    const Matrix q = normalized_product(c.chain(i0, j));
    if (norm_restricted(q, s.e[*k]) < 0.5 * conorm_restricted(q, s.f[*k])) {
      rep.failing_j = j;
      return rep;
    }
  }
  rep.precondition_ok = true;
  for (int j = 0; j < l; ++j) {
    if (u_pred(i0 + j, c.point(i0 + j))) {
      rep.witness = i0 + j;
      return rep;
    }
  }
  rep.avoids = true;
  return rep;
}

}  // namespace domsplit

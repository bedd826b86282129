#include "domsplit/splitting.hpp"

#include "domsplit/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace domsplit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string idx(std::ptrdiff_t i) { return std::to_string(i); }

}  // namespace

std::optional<std::ptrdiff_t> ReturnTimes::plus(std::ptrdiff_t i) const {
  if (i < first || i > last()) return std::nullopt;
  return tau_plus[static_cast<std::size_t>(i - first)];
}

std::optional<std::ptrdiff_t> ReturnTimes::minus(std::ptrdiff_t i) const {
  if (i < first || i > last()) return std::nullopt;
  return tau_minus[static_cast<std::size_t>(i - first)];
}

ReturnTimes return_times(const CocycleSegment& c, const CriticalPredicate& pred, int m_f) {
  if (m_f < 1) throw InvalidArgument("m_f must be >= 1");
  ReturnTimes t;
  t.first = c.first;
  t.m_f = m_f;
  for (std::ptrdiff_t i = c.first; i <= c.last(); ++i)
    if (pred(i, c.point(i))) t.hits.push_back(i);
  bool any = false;
  for (std::ptrdiff_t i = c.first; i <= c.last(); ++i) {
    std::optional<std::ptrdiff_t> p, m;
    auto up = std::lower_bound(t.hits.begin(), t.hits.end(), i);
    if (up != t.hits.end()) p = *up - i;
    auto down = std::upper_bound(t.hits.begin(), t.hits.end(), i - m_f);
    if (down != t.hits.begin()) m = *std::prev(down) - i;
    any = any || (p && m);
    t.tau_plus.push_back(p);
    t.tau_minus.push_back(m);
  }
  if (!any) {
    if (t.hits.empty()) throw NoHits("the segment never meets the critical set");
    throw NoHits("no index has a critical hit both ahead and at least m_f steps behind");
  }
  return t;
}

std::optional<std::size_t> SplittingSample::find(std::ptrdiff_t i) const {
  auto it = std::lower_bound(indices.begin(), indices.end(), i);
  if (it == indices.end() || *it != i) return std::nullopt;
  return static_cast<std::size_t>(it - indices.begin());
}

void SplittingSample::push(std::ptrdiff_t i, Subspace e_i, Subspace f_i) {
  if (!indices.empty() && i <= indices.back()) throw InvalidArgument("splitting indices must increase");
  indices.push_back(i);
  e.push_back(std::move(e_i));
  f.push_back(std::move(f_i));
}

SplittingSample candidate_splitting(const CocycleSegment& c, int kappa, const ReturnTimes& times, double rank_tol) {
  const int d = c.dim();
  if (kappa < 1 || kappa >= d) throw InvalidArgument("kappa must lie in 1..d-1");
  SplittingSample s;
  s.kappa = kappa;
  s.provenance = "return-time";
  for (std::ptrdiff_t i = c.first; i <= c.last(); ++i) {
    if (!times.defined(i)) continue;
    const std::ptrdiff_t fwd = times.m_f + *times.plus(i);
    const std::ptrdiff_t bwd = -*times.minus(i);
    if (!c.has_chain(i, fwd) || !c.has_chain(i - bwd, bwd)) continue;
    Subspace e = kernel(svd_of_chain(c.chain(i, fwd)), rank_tol);
    Subspace f = image(svd_of_chain(c.chain(i - bwd, bwd)), rank_tol);
    if (e.dim() != kappa)
      throw DimensionMismatch("E at index " + idx(i) + " has dimension " + std::to_string(e.dim()) + ", want " +
                              std::to_string(kappa));
    if (f.dim() != d - kappa)
      throw DimensionMismatch("F at index " + idx(i) + " has dimension " + std::to_string(f.dim()) + ", want " +
                              std::to_string(d - kappa));
    s.push(i, std::move(e), std::move(f));
  }
  if (s.size() == 0) throw NoHits("no index has both return-time chains inside the segment");
  return s;
}

SplittingSample pushed_splitting(const CocycleSegment& c, std::ptrdiff_t i0, const Subspace& e0, const Subspace& f0) {
  if (e0.dim() + f0.dim() != c.dim()) throw DimensionMismatch("dim E + dim F must equal d");
  SplittingSample s;
  s.kappa = e0.dim();
  s.provenance = "pushed";
  Subspace e = e0, f = f0;
  for (std::ptrdiff_t i = i0;; ++i) {
    s.push(i, e, f);
    if (i >= c.last()) break;
    const Matrix& j = c.at(i);
    e = image_of(j, e);
    f = image_of(j, f);
    if (e.dim() != s.kappa || f.dim() != c.dim() - s.kappa)
      throw RankCollapse("pushed splitting loses dimension at index " + idx(i));
  }
  return s;
}

std::pair<Subspace, Subspace> eigen_splitting(const Matrix& a, int kappa) {
  const int d = static_cast<int>(a.rows());
  if (kappa < 1 || kappa >= d) throw InvalidArgument("kappa must lie in 1..d-1");
  Eigen::EigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(a), true);
  if (es.info() != Eigen::Success) throw NotConverged("eigen decomposition failed");
  const auto& vals = es.eigenvalues();
  const double scale = vals.cwiseAbs().maxCoeff();
  std::vector<int> order(d);
  for (int k = 0; k < d; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return std::abs(vals(x)) < std::abs(vals(y)); });
  for (int k = 0; k < d; ++k)
    if (std::abs(vals(k).imag()) > 1e-12 * std::max(scale, 1.0)) throw NoGap("non-real eigenvalues");
  if (!(std::abs(vals(order[kappa - 1])) < std::abs(vals(order[kappa])) * (1 - 1e-10)))
    throw NoGap("eigenvalue moduli at kappa and kappa+1 coincide");
  Matrix e(d, kappa), f(d, d - kappa);
  for (int k = 0; k < d; ++k) {
    const Vector v = es.eigenvectors().col(order[k]).real();
    if (k < kappa)
      e.col(k) = v;
    else
      f.col(k - kappa) = v;
  }
  return {Subspace::span(e), Subspace::span(f)};
}

SplittingSample constant_splitting(const CocycleSegment& c, const Subspace& e, const Subspace& f) {
  SplittingSample s;
  s.kappa = e.dim();
  s.provenance = "eigen";
  for (std::ptrdiff_t i = c.first; i <= c.last(); ++i) s.push(i, e, f);
  return s;
}

InvarianceReport check_invariance(const CocycleSegment& c, const SplittingSample& s) {
  InvarianceReport r;
  r.min_angle = kInf;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const std::ptrdiff_t i = s.indices[k];
    const double a = angle_between(s.e[k], s.f[k]);
    if (a < r.min_angle) r.min_angle = a;
    if (k + 1 >= s.size() || s.indices[k + 1] != i + 1 || !c.has_chain(i, 1)) continue;
    const Matrix& j = c.at(i);
    ++r.pairs;
    const Subspace je = image_of(j, s.e[k]);
    if (!je.trivial()) {
      const double de = std::sin(containment_angle(je, s.e[k + 1]));
      if (de > r.e_defect) r.e_defect = de, r.e_argmax = i;
    }
    const Subspace jf = image_of(j, s.f[k]);
    const double df = jf.dim() == s.f[k + 1].dim() ? grassmann_distance(jf, s.f[k + 1]) : 1.0;
    if (df > r.f_defect) r.f_defect = df, r.f_argmax = i;
  }
  if (s.size() == 0) r.min_angle = 0.0;
  return r;
}

DominationCheck check_domination(const CocycleSegment& c, const SplittingSample& s, int ell, double factor) {
  if (ell < 1) throw InvalidArgument("ell must be >= 1");
  DominationCheck r;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const std::ptrdiff_t i = s.indices[k];
    if (!c.has_chain(i, ell)) continue;
    const Matrix p = normalized_product(c.chain(i, ell));
    const double m = conorm_restricted(p, s.f[k]);
    if (!(m > 1e-13 * operator_norm(p)))
      throw HypothesisViolation("Df^" + std::to_string(ell) + " is singular on F at index " + idx(i));
    const double ratio = norm_restricted(p, s.e[k]) / m;
    if (r.tested == 0 || ratio > r.worst_ratio) r.worst_ratio = ratio, r.argmax = i;
    ++r.tested;
  }
  r.pass = r.tested > 0 && r.worst_ratio <= factor;
  return r;
}

AngleCheck check_angle(const SplittingSample& s, double alpha) {
  AngleCheck r;
  r.min_angle = kInf;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double a = angle_between(s.e[k], s.f[k]);
    if (a < r.min_angle) r.min_angle = a, r.argmin = s.indices[k];
  }
  if (s.size() == 0) r.min_angle = 0.0;
  r.pass = s.size() > 0 && r.min_angle >= alpha;
  return r;
}

std::optional<int> find_domination_time(const CocycleSegment& c, const SplittingSample& s, double factor,
                                        int ell_max) {
  if (ell_max < 1) throw InvalidArgument("ell_max must be >= 1");
  for (int ell = 1; ell <= ell_max; ++ell) {
    const DominationCheck r = check_domination(c, s, ell, factor);
    if (r.tested == 0) break;
    if (r.pass) return ell;
  }
  return std::nullopt;
}

int telescoped_ell(int ell0, double c0, double factor) {
  if (ell0 < 1 || !(c0 >= 1.0) || !(factor > 0.0 && factor < 1.0))
    throw InvalidArgument("telescoped_ell needs ell0 >= 1, C0 >= 1, 0 < factor < 1");
  int n = 1;
  while (c0 * std::pow(factor, n) > factor) ++n;
  return ell0 * (n + 1);
}

double estimate_c0(const CocycleSegment& c, const SplittingSample& s, int ell0) {
  if (ell0 < 1) throw InvalidArgument("ell0 must be >= 1");
  double top = 0.0;
  for (std::ptrdiff_t i = c.first; i <= c.last(); ++i)
    for (int k = 1; k <= ell0 && c.has_chain(i, k); ++k) top = std::max(top, operator_norm(product_chain(c.chain(i, k))));
  double bottom = kInf;
  for (std::size_t k = 0; k < s.size(); ++k)
    for (int j = 1; j <= ell0 && c.has_chain(s.indices[k], j); ++j)
      bottom = std::min(bottom, conorm_restricted(product_chain(c.chain(s.indices[k], j)), s.f[k]));
  if (bottom == kInf) throw InvalidArgument("no chain of length <= ell0 available");
  if (!(bottom > 0.0)) throw HypothesisViolation("Df^j vanishes on some F");
  return std::max(1.0, top / bottom);
}

UniquenessReport uniqueness_probe(const SplittingSample& a, const SplittingSample& b) {
  UniquenessReport r;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto kb = b.find(a.indices[k]);
    if (!kb) continue;
    ++r.common;
    r.e_distance = std::max(r.e_distance, a.e[k].dim() == b.e[*kb].dim() ? grassmann_distance(a.e[k], b.e[*kb]) : 1.0);
    r.f_distance = std::max(r.f_distance, a.f[k].dim() == b.f[*kb].dim() ? grassmann_distance(a.f[k], b.f[*kb]) : 1.0);
  }
  return r;
}

DominationCertificate certify(const CocycleSegment& c, const SplittingSample& s, double alpha, double factor,
                              int ell_max, double defect_tol) {
  DominationCertificate cert;
  cert.kappa = s.kappa;
  cert.factor = factor;
  cert.alpha_required = alpha;
  const InvarianceReport inv = check_invariance(c, s);
  cert.invariance_defect_e = inv.e_defect;
  cert.invariance_defect_f = inv.f_defect;
  const AngleCheck ang = check_angle(s, alpha);
  cert.alpha = ang.min_angle;
  cert.worst_ratio = kInf;
  for (int ell = 1; ell <= ell_max; ++ell) {
    const DominationCheck r = check_domination(c, s, ell, factor);
    if (r.tested == 0) break;
    cert.worst_ratio = std::min(cert.worst_ratio, r.worst_ratio);
    if (r.pass) {
      cert.ell = ell;
      cert.worst_ratio = r.worst_ratio;
      break;
    }
  }
  cert.pass = cert.ell && ang.pass && inv.e_defect <= defect_tol && inv.f_defect <= defect_tol;
  cert.not_extendable = cert.ell && !ang.pass;
  return cert;
}

ConeField ConeFieldSample::field() const {
  return [idx = indices, cones = cones](std::ptrdiff_t i) {
    auto it = std::lower_bound(idx.begin(), idx.end(), i);
    if (it == idx.end() || *it != i) throw OutOfRange("no cone at index " + std::to_string(i));
    return cones[static_cast<std::size_t>(it - idx.begin())];
  };
}

ConeFieldSample splitting_to_cone(const CocycleSegment& c, const SplittingSample& s, int k_max, int samples) {
  if (s.size() == 0) throw InvalidArgument("empty splitting");
  ConeFieldSample out;
  out.alpha = check_angle(s, 0.0).min_angle / 2;
  if (!(out.alpha > 0.0)) throw HypothesisViolation("E and F intersect; no transversal cone");
  out.indices = s.indices;
  for (const Subspace& e : s.e) out.cones.push_back(Cone::make(orthogonal_complement(e), std::numbers::pi / 2 - out.alpha));
  for (int k = 1; k <= k_max; ++k) {
    double worst = kInf;
    int tested = 0;
    for (std::size_t a = 0; a < s.size(); ++a) {
      const std::ptrdiff_t i = s.indices[a];
      const auto b = s.find(i + k);
      if (!b || !c.has_chain(i, k)) continue;
      const Matrix p = normalized_product(c.chain(i, k));
      const ContainmentReport r = cone_image_contained(p, out.cones[a], out.cones[*b], 0.0, samples);
      worst = std::min(worst, r.worst_slack);
      ++tested;
    }
    if (tested == 0) break;
    out.margins.push_back(worst);
    if (worst > 0.0) {
      out.invariance_time = k;
      out.min_margin = worst;
      break;
    }
  }
  return out;
}

ConeLimit cone_criterion_to_splitting(const CocycleSegment& c, const ConeFieldSample& cones, int kappa,
                                      const ConeLimitOptions& opt) {
  if (!cones.invariance_time) throw PreconditionFailed("cone field has no invariance time");
  const int ell = *cones.invariance_time;
  const ConeField field = cones.field();
  ConeLimit out;
  out.splitting.kappa = kappa;
  out.splitting.provenance = "cone-limit";
  const std::ptrdiff_t lo = cones.indices.front();
  for (std::size_t a = 0; a < cones.indices.size(); ++a) {
    const std::ptrdiff_t i = cones.indices[a];
    if (!c.has_chain(i, opt.n_max)) continue;
    const int depth = opt.depth;
    if ((i - lo) / ell < depth) continue;
    bool covered = true;
    for (int k = 1; k <= depth; ++k) covered = covered && std::binary_search(cones.indices.begin(), cones.indices.end(), i - k * ell);
    if (!covered) continue;

    FactoredProduct p(c.dim());
    for (int n = 1; n <= opt.n_max; ++n) {
      p.push(c.at(i + n - 1));
      const Subspace ker = kernel(p.svd());
      if (!ker.trivial() && angle_between(ker, cones.cones[a].center) <= cones.cones[a].half_angle)
        out.kernel_transversal = false;
    }
    ELimit e = e_limit_report(c, i, kappa, opt.n_max, opt.tol);
    FBackward f = f_backward(c, i, field, ell, depth);
    out.splitting.push(i, e.limit, f.limit);
    out.e_reports.push_back(std::move(e.report));
    out.f_reports.push_back(std::move(f));
  }
  return out;
}

}  // namespace domsplit

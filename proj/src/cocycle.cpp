#include "domsplit/cocycle.hpp"

#include "domsplit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace domsplit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// (a - b) / max(a, b) from logarithms; nonnegative iff a >= b.
double rel_slack(double la, double lb) {
  if (la == kNegInf && lb == kNegInf) return 0.0;
  if (la >= lb) return -std::expm1(lb - la);
  return std::expm1(la - lb);
}

}  // namespace

CocycleSegment CocycleSegment::from_orbit(const OrbitSegment& orbit) {
  CocycleSegment c;
  c.first = orbit.first;
  c.jacobians = orbit.jacobians;
  c.points = orbit.points;
  return c;
}

CocycleSegment CocycleSegment::synthetic(std::ptrdiff_t first, std::vector<Matrix> mats) {
  if (mats.empty()) throw InvalidArgument("empty cocycle");
  for (const Matrix& m : mats)
    if (m.rows() != mats.front().rows() || m.cols() != m.rows()) throw InvalidArgument("non-conforming cocycle");
  CocycleSegment c;
  c.first = first;
  c.jacobians = std::move(mats);
  return c;
}

const Matrix& CocycleSegment::at(std::ptrdiff_t i) const {
  if (i < first || i > last()) throw OutOfRange("cocycle index " + std::to_string(i) + " outside the segment");
  return jacobians[static_cast<std::size_t>(i - first)];
}

const Point* CocycleSegment::point(std::ptrdiff_t i) const {
  if (points.empty() || i < first || i >= first + static_cast<std::ptrdiff_t>(points.size())) return nullptr;
  return &points[static_cast<std::size_t>(i - first)];
}

std::vector<Matrix> CocycleSegment::chain(std::ptrdiff_t i, std::ptrdiff_t n) const {
  if (n < 1 || !has_chain(i, n))
    throw OutOfRange("chain [" + std::to_string(i) + ", " + std::to_string(i + n) + ") outside the segment");
  const auto b = jacobians.begin() + (i - first);
  return std::vector<Matrix>(b, b + n);
}

CocycleSegment CocycleSegment::scaled(double c) const {
  CocycleSegment s = *this;
  for (Matrix& m : s.jacobians) m *= c;
  return s;
}

SvdResult singular_values_along(const CocycleSegment& c, std::ptrdiff_t i, int n) {
  return svd_of_chain(c.chain(i, n));
}

Subspace en_from_svd(const SvdResult& s, int kappa) {
  const int d = s.dim();
  if (kappa < 1 || kappa >= d) throw InvalidArgument("kappa must lie in 1..d-1");
  if (!s.has_gap(kappa)) throw NoGap("sigma_kappa and sigma_kappa+1 coincide");
  if (kernel(s).dim() > kappa) throw DimensionMismatch("kernel dimension exceeds kappa");
  return Subspace::from_orthonormal(s.domain.leftCols(kappa));
}

Subspace en_subspace(const CocycleSegment& c, std::ptrdiff_t i, int n, int kappa) {
  return en_from_svd(singular_values_along(c, i, n), kappa);
}

GapReport gap_report(const CocycleSegment& c, std::ptrdiff_t i, int n_max, int kappa) {
  if (n_max < 4) throw InvalidArgument("gap_report needs n_max >= 4");
  if (kappa < 1 || kappa >= c.dim()) throw InvalidArgument("kappa must lie in 1..d-1");
  c.chain(i, n_max);
  GapReport g;
  FactoredProduct p(c.dim());
  std::vector<double> xs, ys;
  for (int n = 1; n <= n_max; ++n) {
    p.push(c.at(i + n - 1));
    const SvdResult s = p.svd();
    GapEntry e;
    e.n = n;
    e.log_sigma_k = s.log_sigmas(kappa - 1);
    e.log_sigma_k1 = s.log_sigmas(kappa);
    e.no_gap = !s.has_gap(kappa);
    e.ratio = e.no_gap ? 1.0 : std::exp(e.log_sigma_k - e.log_sigma_k1);
    if (e.log_sigma_k1 == kNegInf) e.ratio = 1.0, e.no_gap = true;
    g.entries.push_back(e);
    if (e.ratio > 0.0) {
      xs.push_back(n);
      ys.push_back(e.no_gap ? 0.0 : e.log_sigma_k - e.log_sigma_k1);
    }
  }
  if (xs.empty()) {
    // Every ratio is an exact zero: domination holds trivially.
    g.rate = 0.0;
    g.log_constant = kNegInf;
  } else if (xs.size() == 1) {
    g.rate = std::exp(ys[0] / xs[0]);
  } else {
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) mx += xs[k], my += ys[k];
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) sxx += (xs[k] - mx) * (xs[k] - mx), sxy += (xs[k] - mx) * (ys[k] - my);
    const double slope = sxy / sxx;
    g.rate_defined = true;
    g.rate = std::exp(slope);
    g.log_constant = my - slope * mx;
  }
  g.passes = g.rate <= 1.0 - 1e-3;
  return g;
}

ELimit e_limit_report(const CocycleSegment& c, std::ptrdiff_t i, int kappa, int n_max, double tol) {
  c.chain(i, n_max);
  FactoredProduct p(c.dim());
  ELimit out;
  for (int n = 1; n <= n_max; ++n) {
    p.push(c.at(i + n - 1));
    const SvdResult s = p.svd();
    if (out.sequence.empty()) {
      if (!s.has_gap(kappa)) continue;
      out.n0 = n;
    }
    out.sequence.push_back(en_from_svd(s, kappa));
  }
  if (out.sequence.empty()) throw NoGap("no n up to n_max separates sigma_kappa from sigma_kappa+1");
  if (out.sequence.size() < 3) throw InvalidArgument("fewer than 3 subspaces with a gap; raise n_max");
  auto [lim, rep] = subspace_limit(out.sequence, tol, out.n0);
  out.limit = lim;
  out.report = rep;
  return out;
}

ELimit e_limit(const CocycleSegment& c, std::ptrdiff_t i, int kappa, int n_max, double tol) {
  ELimit e = e_limit_report(c, i, kappa, n_max, tol);
  if (!e.report.converged)
    throw NotConverged("E_n did not settle: final distance " + std::to_string(e.report.final_distance));
  return e;
}

FBackward f_backward(const CocycleSegment& c, std::ptrdiff_t i, const ConeField& cones, int ell, int depth) {
  if (ell < 1 || depth < 1) throw InvalidArgument("f_backward needs ell >= 1 and depth >= 1");
  c.chain(i - static_cast<std::ptrdiff_t>(depth) * ell, static_cast<std::ptrdiff_t>(depth) * ell);
  FBackward out;
  out.depth = depth;
  Subspace prev;
  for (int k = 1; k <= depth; ++k) {
    const std::ptrdiff_t start = i - static_cast<std::ptrdiff_t>(k) * ell;
    Subspace s = cones(start).center;
    for (std::ptrdiff_t j = start; j < i; ++j) {
      const Matrix& jac = c.at(j);
      const Matrix img = jac * s.basis();
      const double scale = std::max(operator_norm(jac), std::numeric_limits<double>::min());
      if (singular_values(img)(0) < 1e-12 * scale)
        throw RankCollapse("pushed subspace meets the kernel at index " + std::to_string(j));
      s = Subspace::span(img);
    }
    if (k > 1) out.distances.push_back(grassmann_distance(prev, s));
    prev = s;
  }
  const Cone target = cones(i);
  if (containment_angle(prev, target.center) > target.half_angle + 1e-9)
    throw HypothesisViolation("pushed subspace leaves the cone at index " + std::to_string(i));
  out.limit = prev;
  return out;
}

FBackward f_backward(const CocycleSegment& c, std::ptrdiff_t i, const Cone& cone, int ell, int depth) {
  return f_backward(c, i, [&cone](std::ptrdiff_t) { return cone; }, ell, depth);
}

VWSplitting singular_splitting_vw(const Matrix& j, int kappa) {
  const SvdResult s = svd_ascending(j);
  const int d = s.dim();
  if (kappa < 1 || kappa >= d) throw InvalidArgument("kappa must lie in 1..d-1");
  if (!s.has_gap(kappa)) throw NoGap("sigma_kappa and sigma_kappa+1 coincide");
  return {Subspace::from_orthonormal(s.domain.leftCols(kappa)), Subspace::from_orthonormal(s.domain.rightCols(d - kappa))};
}

KoneProbe kone_contraction_probe(const CocycleSegment& c, std::ptrdiff_t i, const Subspace& f_center, double delta,
                                 double eps, int ell, int n_max, int samples) {
  if (!(0.0 < eps && eps < delta && delta < std::numbers::pi / 2)) throw InvalidArgument("need 0 < eps < delta < pi/2");
  KoneProbe out;
  const Cone src = Cone::make(f_center, delta);
  for (int n = 1; n <= n_max; ++n) {
    if (!c.has_chain(i, static_cast<std::ptrdiff_t>(n) * ell)) break;
    const Matrix p = normalized_product(c.chain(i, static_cast<std::ptrdiff_t>(n) * ell));
    const Cone dst = Cone::make(Subspace::span(Matrix(p * f_center.basis())), eps);
    const ContainmentReport r = cone_image_contained(p, src, dst, 0.0, samples);
    out.worst_slack.push_back(r.worst_slack);
    if (r.ok && !out.n) out.n = n;
    if (out.n) break;
  }
  return out;
}

SingularBounds singular_value_bounds(const CocycleSegment& c, std::ptrdiff_t i, int kappa, int n_max) {
  c.chain(i, n_max + 1);
  const int d = c.dim();
  FactoredProduct px(d), pf(d);
  std::vector<SvdResult> sx{}, sf{};
  for (int n = 1; n <= n_max + 1; ++n) {
    px.push(c.at(i + n - 1));
    sx.push_back(px.svd());
    if (n <= n_max) {
      pf.push(c.at(i + n));
      sf.push_back(pf.svd());
    }
  }
  SingularBounds out;
  out.k1 = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= n_max; ++n) {
    const SvdResult& s = sx[n - 1];
    const Subspace img = Subspace::from_orthonormal(s.codomain.rightCols(d - kappa));
    out.k1 = std::min(out.k1, conorm_restricted(c.at(i + n), img));
  }
  const double log_k1 = out.k1 > 0 ? std::log(out.k1) : kNegInf;
  const double log_norm_x = std::log(operator_norm(c.at(i)));
  out.min_slack = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= n_max; ++n) {
    SingularBoundEntry e;
    e.n = n;
    e.log_value = sx[n].log_sigmas(kappa);
    const double log_base = sx[n - 1].log_sigmas(kappa);
    const double lower = log_k1 + log_base;
    const double upper_a = std::log(operator_norm(c.at(i + n))) + log_base;
    const double upper_b = log_norm_x + sf[n - 1].log_sigmas(kappa);
    e.slack_lower = rel_slack(e.log_value, lower);
    e.slack_upper = rel_slack(std::min(upper_a, upper_b), e.log_value);
    out.min_slack = std::min({out.min_slack, e.slack_lower, e.slack_upper});
    out.entries.push_back(e);
  }
  return out;
}

}  // namespace domsplit

#include "domsplit/geometry.hpp"

#include "domsplit/errors.hpp"
#include "domsplit/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace domsplit {

namespace {

constexpr std::array<int, 12> kPrimes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

// Top singular triple of B_W^T B_V: cosine and maximizing unit vector of V (in V coordinates).
std::pair<double, Vector> top_pair(const Subspace& v, const Subspace& w) {
  const int d = v.ambient_dim();
  const Matrix m = w.basis().transpose() * v.basis();
  Matrix pad = Matrix::Zero(d, d);
  pad.topLeftCorner(m.rows(), m.cols()) = m;
  const SvdResult s = svd_ascending(pad);
  // Zero padding can tie with the top value; pick the tied vector living in V coordinates.
  Vector x = s.domain.col(d - 1).head(v.dim());
  for (int k = d - 2; k >= 0 && x.norm() < 0.5 && s.sigmas(k) >= s.sigmas(d - 1) * (1 - 1e-15); --k)
    if (s.domain.col(k).head(v.dim()).norm() > x.norm()) x = s.domain.col(k).head(v.dim());
  if (x.norm() < 1e-8) x = Vector::Unit(v.dim(), 0);
  return {s.sigmas(d - 1), x / x.norm()};
}

struct LineFit {
  double slope = 0.0, intercept = 0.0, rss = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    f.rss += r * r;
  }
  return f;
}

}  // namespace

double angle_between(const Subspace& v, const Subspace& w) {
  if (v.trivial() || w.trivial()) throw InvalidArgument("angle with the zero subspace");
  if (v.ambient_dim() != w.ambient_dim()) throw DimensionMismatch("ambient dimensions differ");
  const auto [c, x] = top_pair(v, w);
  const Vector u = v.basis() * x;
  const Vector off = u - w.basis() * (w.basis().transpose() * u);
  return std::atan2(off.norm(), std::min(1.0, c));
}

double grassmann_distance(const Subspace& v, const Subspace& w) {
  if (v.dim() != w.dim()) throw DimensionMismatch("grassmann_distance needs equal dimensions");
  if (v.ambient_dim() != w.ambient_dim()) throw DimensionMismatch("ambient dimensions differ");
  const int d = v.ambient_dim();
  if (v.dim() == 0 || v.dim() == d) return 0.0;
  if (v.basis() == w.basis()) return 0.0;
  const Subspace vp = orthogonal_complement(v);
  return std::min(1.0, top_pair(w, vp).first);
}

Subspace orthogonal_complement(const Subspace& v) {
  const int d = v.ambient_dim();
  if (v.dim() == 0) return Subspace::full(d);
  if (v.dim() == d) return Subspace::zero(d);
  // Left singular vectors of the basis beyond its rank span the complement.
  Matrix pad = Matrix::Zero(d, d);
  pad.leftCols(v.dim()) = v.basis();
  const SvdResult s = svd_ascending(pad);
  Matrix comp = s.codomain.leftCols(d - v.dim());
  // Re-project for orthogonality against v to working precision.
  comp -= v.basis() * (v.basis().transpose() * comp);
  return Subspace::span(comp);
}

double containment_angle(const Subspace& s, const Subspace& t) {
  if (s.trivial()) return 0.0;
  if (t.trivial()) return std::numbers::pi / 2;
  if (t.dim() == t.ambient_dim()) return 0.0;
  // Largest ||P_{t-perp} u|| over unit u in s.
  const Subspace tp = orthogonal_complement(t);
  const double sine = norm_restricted(tp.basis().transpose(), s);
  return std::asin(std::min(1.0, sine));
}

Cone Cone::make(Subspace center, double half_angle) {
  if (center.trivial()) throw InvalidArgument("cone center must be nontrivial");
  if (!(half_angle > 0.0 && half_angle < std::numbers::pi / 2)) throw InvalidArgument("cone half-angle outside (0, pi/2)");
  return Cone{std::move(center), half_angle};
}

bool cone_contains(const Cone& c, const Vector& u) {
  const double n = u.norm();
  if (n == 0.0) throw InvalidArgument("zero vector");
  const Vector x = u / n;
  const Vector p = c.center.basis() * (c.center.basis().transpose() * x);
  return std::atan2((x - p).norm(), p.norm()) <= c.half_angle + 1e-12;
}

Cone cone_dual(const Cone& c) {
  return Cone::make(orthogonal_complement(c.center), std::numbers::pi / 2 - c.half_angle);
}

bool cone_contains_subspace(const Cone& c, const Subspace& s) {
  return containment_angle(s, c.center) <= c.half_angle + 1e-12;
}

double halton(std::uint64_t index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

Vector halton_direction(std::uint64_t index, int k, int slot) {
  Vector v(k);
  for (int i = 0; i < k; ++i) {
    // Box-Muller on two Halton coordinates.
    const double u1 = std::max(1e-300, halton(index, kPrimes[(slot + 2 * i) % kPrimes.size()]));
    const double u2 = halton(index, kPrimes[(slot + 2 * i + 1) % kPrimes.size()]);
    v(i) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  const double n = v.norm();
  if (n == 0.0) return Vector::Unit(k, 0);
  return v / n;
}

std::vector<Vector> cone_samples(const Cone& c, int samples, std::uint64_t seed) {
  const int d = c.center.ambient_dim();
  const int k = c.center.dim();
  const Subspace comp = orthogonal_complement(c.center);
  std::vector<Vector> out;
  out.reserve(samples);
  const std::uint64_t base = seed * static_cast<std::uint64_t>(samples) + 1;
  for (int s = 0; s < samples; ++s) {
    const std::uint64_t idx = base + static_cast<std::uint64_t>(s);
    const Vector cu = c.center.basis() * halton_direction(idx, k, 0);
    if (comp.trivial()) {
      out.push_back(cu);
      continue;
    }
    const Vector pu = comp.basis() * halton_direction(idx, d - k, 2 * k);
    // Even samples on the boundary, odd ones on an interior lattice of opening angles.
    const double phi = (s % 2 == 0) ? c.half_angle : c.half_angle * halton(idx, 37);
    out.push_back(std::cos(phi) * cu + std::sin(phi) * pu);
  }
  return out;
}

ContainmentReport cone_image_contained(const Matrix& a, const Cone& src, const Cone& dst, double margin,
                                       int samples, std::uint64_t seed) {
  if (samples < 100) throw InvalidArgument("cone_image_contained needs at least 100 samples");
  ContainmentReport r;
  r.worst_slack = std::numeric_limits<double>::infinity();
  const double scale = std::max(operator_norm(a), std::numeric_limits<double>::min());
  const Matrix& b = dst.center.basis();
  for (const Vector& u : cone_samples(src, samples, seed)) {
    const Vector img = a * u;
    const double n = img.norm();
    if (n <= 1e-14 * scale) {
      ++r.skipped;
      continue;
    }
    const Vector x = img / n;
    const Vector p = b * (b.transpose() * x);
    const double ang = std::atan2((x - p).norm(), p.norm());
    r.worst_slack = std::min(r.worst_slack, dst.half_angle - ang);
    ++r.tested;
  }
  r.ok = r.tested > 0 && r.worst_slack >= margin;
  return r;
}

std::pair<Subspace, CauchyReport> subspace_limit(const std::vector<Subspace>& seq, double tol, int first_index) {
  if (seq.size() < 3) throw InvalidArgument("subspace_limit needs at least 3 subspaces");
  for (const Subspace& s : seq)
    if (s.dim() != seq.front().dim()) throw DimensionMismatch("subspace dimensions differ along the sequence");
  CauchyReport r;
  for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
    r.indices.push_back(first_index + static_cast<int>(k));
    r.distances.push_back(grassmann_distance(seq[k], seq[k + 1]));
  }
  r.final_distance = r.distances.back();
  r.converged = r.final_distance <= tol;

  std::vector<double> n, logn, logd;
  for (std::size_t k = 0; k < r.distances.size(); ++k) {
    if (r.distances[k] > 1e-14) {
      n.push_back(r.indices[k]);
      logn.push_back(std::log(static_cast<double>(r.indices[k])));
      logd.push_back(std::log(r.distances[k]));
    }
  }
  if (n.size() >= 2) {
    const LineFit geo = least_squares(n, logd);
    r.rate_defined = true;
    r.rate = std::exp(geo.slope);
    r.log_constant = geo.intercept;
    int bad = 0;
    for (std::size_t k = 0; k < n.size(); ++k)
      if (logd[k] > std::log(1.1) + geo.intercept + geo.slope * n[k]) ++bad;
    r.outlier_fraction = static_cast<double>(bad) / static_cast<double>(n.size());
    if (n.size() >= 4) {
      const LineFit pow = least_squares(logn, logd);
      r.sub_geometric = pow.rss < geo.rss;
    }
  }
  return {seq.back(), r};
}

}  // namespace domsplit

#include "domsplit/perturbation.hpp"

#include "domsplit/errors.hpp"
#include "domsplit/geometry.hpp"
#include "domsplit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace domsplit {

namespace {

constexpr double kPi = std::numbers::pi;

double unit_random(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform(std::mt19937_64& rng, double a, double b) { return a + (b - a) * unit_random(rng); }

std::mt19937_64 instance_rng(std::uint64_t seed, std::size_t k, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32),
                    static_cast<std::uint32_t>(salt)};
  return std::mt19937_64(seq);
}

Matrix rot2(double t) {
  Matrix r(2, 2);
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return r;
}

Vector unit2(double t) {
  Vector v(2);
  v << std::cos(t), std::sin(t);
  return v;
}

// Signed angle from the line of a to the line of b, in [-pi/2, pi/2].
double line_angle(const Vector& a, const Vector& b) {
  double phi = std::atan2(a(0) * b(1) - a(1) * b(0), a.dot(b));
  if (phi > kPi / 2) phi -= kPi;
  if (phi < -kPi / 2) phi += kPi;
  return phi;
}

}  // namespace

Matrix plane_rotation(const Vector& a, const Vector& b, double theta) {
  const int d = static_cast<int>(a.size());
  Matrix r = Matrix::Identity(d, d);
  const double c = std::cos(theta) - 1.0, s = std::sin(theta);
  r += c * (a * a.transpose() + b * b.transpose()) + s * (b * a.transpose() - a * b.transpose());
  return r;
}

Matrix rotation_in_plane(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) throw DimensionMismatch("rotation_in_plane: vectors of different length");
  const int d = static_cast<int>(u.size());
  if (!(u.norm() > 0.0) || !(v.norm() > 0.0)) throw InvalidArgument("rotation_in_plane needs nonzero vectors");
  const Vector a = u.normalized();
  Vector b = v.normalized() - a.dot(v.normalized()) * a;
  const double sn = b.norm();
  if (sn <= 1e-15) return Matrix::Identity(d, d);
  b /= sn;
  return plane_rotation(a, b, std::atan2(sn, a.dot(v.normalized())));
}

double rotation_angle(const Matrix& r) {
  const double n = operator_norm(r - Matrix::Identity(r.rows(), r.cols()));
  return 2.0 * std::asin(std::min(1.0, n / 2.0));
}

double franks_budget(const Matrix& j, const Matrix& r) { return operator_norm(r * j - j); }

AlphaReport alpha_for_epsilon(const std::vector<Matrix>& jacobians, double eps0) {
  if (!(eps0 > 0.0)) throw InvalidArgument("eps0 must be positive");
  if (jacobians.empty()) throw InvalidArgument("no Jacobians");
  AlphaReport rep;
  rep.eps0 = eps0;
  rep.points = static_cast<int>(jacobians.size());
  // Planes per Jacobian: coordinate planes plus the top two left singular directions.
  std::vector<std::vector<std::pair<Vector, Vector>>> planes;
  for (const Matrix& j : jacobians) {
    const int d = static_cast<int>(j.rows());
    std::vector<std::pair<Vector, Vector>> p;
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b) p.emplace_back(Vector::Unit(d, a), Vector::Unit(d, b));
    const SvdResult s = svd_ascending(j);
    p.emplace_back(s.codomain.col(d - 1), s.codomain.col(d - 2));
    rep.max_norm = std::max(rep.max_norm, s.sigmas(d - 1));
    rep.planes = std::max(rep.planes, static_cast<int>(p.size()));
    planes.push_back(std::move(p));
  }
  auto worst = [&](double alpha) {
    double w = 0.0;
    for (std::size_t k = 0; k < jacobians.size(); ++k)
      for (const auto& [a, b] : planes[k]) w = std::max(w, franks_budget(jacobians[k], plane_rotation(a, b, alpha)));
    return w;
  };
  double lo = 0.0, hi = kPi;
  if (worst(hi) < eps0) {
    lo = hi;
  } else {
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (worst(mid) < eps0 ? lo : hi) = mid;
    }
  }
  rep.alpha = lo;
  rep.worst_budget = worst(lo);
  rep.lower_bound = rep.max_norm > 0.0 ? eps0 / (2.0 * rep.max_norm) : kPi;
  if (rep.alpha < std::min(rep.lower_bound, kPi))
    throw NotConverged("alpha search fell below the closed-form lower bound");
  return rep;
}

AlphaReport alpha_for_epsilon(const TorusMap& map, double eps0, int grid_res, int threads) {
  if (grid_res < 1) throw InvalidArgument("grid_res must be positive");
  const int d = map.dim();
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(grid_res);
  std::vector<Matrix> jac(total);
  parallel_for(total, resolve_threads(threads), [&](std::size_t idx) {
    Point x(d);
    std::size_t r = idx;
    for (int k = 0; k < d; ++k) {
      x(k) = static_cast<double>(r % grid_res) / grid_res;
      r /= grid_res;
    }
    jac[idx] = map.jacobian(x);
  });
  return alpha_for_epsilon(jac, eps0);
}

std::vector<Matrix> PerturbedChain::modified() const {
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < original.size(); ++i) out.push_back(rotations[i] * original[i]);
  return out;
}

MixResult mix_rotations_2d(const std::vector<Matrix>& chain, const Vector& v, const Vector& w, double delta,
                           std::optional<double> n_limit) {
  if (chain.empty()) throw InvalidArgument("empty chain");
  if (!(delta > 0.0 && delta < kPi / 2)) throw InvalidArgument("delta must lie in (0, pi/2)");
  if (v.size() != 2 || w.size() != 2) throw DimensionMismatch("mix_rotations_2d works in the plane");
  MixResult res;
  Vector av = v.normalized(), aw = w.normalized();
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const Matrix& a = chain[i];
    if (a.rows() != 2 || a.cols() != 2) throw DimensionMismatch("mix_rotations_2d works in the plane");
    const Vector sv = singular_values(a);
    if (!(sv(0) > 0.0)) throw HypothesisViolation("A_" + std::to_string(i + 1) + " is singular");
    const double bound = std::max(sv(1), 1.0 / sv(0));
    res.n_bound = std::max(res.n_bound, bound);
    if (n_limit && bound > *n_limit * (1 + 1e-12))
      throw HypothesisViolation("norm bound exceeded at i = " + std::to_string(i + 1));
    av = a * av;
    aw = a * aw;
    if (av.norm() < 0.5 * aw.norm())
      throw HypothesisViolation("||A^i v|| < ||A^i w|| / 2 at i = " + std::to_string(i + 1));
    const double s = std::max(av.norm(), aw.norm());
    av /= s;
    aw /= s;
  }
  Vector a = v.normalized(), b = w.normalized();
  PerturbedChain& pc = res.chain;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    a = (chain[i] * a).normalized();
    b = (chain[i] * b).normalized();
    const double phi = line_angle(a, b);
    const double theta = std::min(delta * (1 - 1e-9), std::abs(phi));
    const Matrix r = rot2(phi > 0 ? -theta : theta);
    b = r * b;
    pc.original.push_back(chain[i]);
    pc.rotations.push_back(r);
    pc.thetas.push_back(theta);
    pc.budget = std::max(pc.budget, franks_budget(chain[i], r));
    res.residual_angle = std::abs(line_angle(a, b));
    if (res.aligned_at == 0 && std::sin(res.residual_angle) <= 1e-9) res.aligned_at = static_cast<int>(i + 1);
    if (res.aligned_at != 0 && std::sin(res.residual_angle) > 1e-9) res.aligned_at = 0;
  }
  res.success = std::sin(res.residual_angle) <= 1e-9;
  return res;
}

MixInstance mixing_instance(double n, int length, std::uint64_t seed, std::size_t k) {
  if (!(n >= 1.0) || length < 1) throw InvalidArgument("mixing_instance needs n >= 1 and length >= 1");
  std::mt19937_64 rng = instance_rng(seed, k, 0x6d6978);
  const double ln = std::log(n);
  MixInstance inst;
  const bool conformal = k % 4 == 0;
  const double t0 = uniform(rng, -kPi, kPi);
  inst.v = unit2(t0);
  inst.w = conformal ? unit2(t0 + kPi / 2) : unit2(uniform(rng, -kPi, kPi));
  Vector av = inst.v, aw = inst.w;
  for (int i = 0; i < length; ++i) {
    Matrix a;
    bool found = false;
    if (!conformal) {
      for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
        Matrix d = Matrix::Zero(2, 2);
        d(0, 0) = std::exp(uniform(rng, -ln, ln));
        d(1, 1) = std::exp(uniform(rng, -ln, ln));
        a = rot2(uniform(rng, -kPi, kPi)) * d * rot2(uniform(rng, -kPi, kPi));
        found = (a * av).norm() >= 0.5 * (a * aw).norm();
      }
    }
    // Conformal steps preserve the norm ratio, so the hypothesis always survives them.
    if (!found) a = std::exp(uniform(rng, -ln, ln)) * rot2(uniform(rng, -kPi, kPi));
    av = a * av;
    aw = a * aw;
    const double s = std::max(av.norm(), aw.norm());
    av /= s;
    aw /= s;
    inst.chain.push_back(a);
  }
  return inst;
}

MixInstance dominated_instance(double n, int length, std::uint64_t seed, std::size_t k) {
  if (!(n >= 2.0) || length < 1) throw InvalidArgument("dominated_instance needs n >= 2 and length >= 1");
  std::mt19937_64 rng = instance_rng(seed, k, 0x646f6d);
  const double q = uniform(rng, -kPi, kPi);
  const Matrix qm = rot2(q);
  MixInstance inst;
  inst.v = unit2(q);
  inst.w = unit2(q + kPi / 2);
  const double h = 0.5 * std::log(3.0), ln = std::log(n);
  for (int i = 0; i < length; ++i) {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = std::exp(uniform(rng, -ln, -h));
    d(1, 1) = std::exp(uniform(rng, h, ln));
    inst.chain.push_back(qm * d * qm.transpose());
  }
  return inst;
}

MixingLength minimal_mixing_length(double delta, double n, int corpus, std::uint64_t seed, int l_max, int threads) {
  if (!(delta > 0.0 && delta < kPi / 2)) throw InvalidArgument("delta must lie in (0, pi/2)");
  if (!(n >= 1.0) || corpus < 1 || l_max < 1) throw InvalidArgument("minimal_mixing_length: bad corpus parameters");
  std::vector<int> aligned(static_cast<std::size_t>(corpus));
  parallel_for(aligned.size(), resolve_threads(threads), [&](std::size_t k) {
    const MixInstance inst = mixing_instance(n, l_max, seed, k);
    aligned[k] = mix_rotations_2d(inst.chain, inst.v, inst.w, delta).aligned_at;
  });
  MixingLength out;
  out.instances = corpus;
  int worst = 0;
  for (int k = 0; k < corpus; ++k) {
    if (aligned[k] == 0) {
      out.worst_instance = k;
      return out;
    }
    if (aligned[k] > worst) worst = aligned[k], out.worst_instance = k;
  }
  out.l = std::max(worst, 1);
  return out;
}

MixingPlan plan_mixing(const CocycleSegment& c, const SplittingSample& s, std::ptrdiff_t i0, int n, double delta) {
  const auto k = s.find(i0);
  if (!k) throw PreconditionFailed("no splitting at index " + std::to_string(i0));
  if (n < 1 || !c.has_chain(i0, n)) throw OutOfRange("mixing window outside the segment");
  const int d = c.dim();
  const Subspace& e = s.e[*k];
  const Subspace& f = s.f[*k];
  MixingPlan plan;
  plan.i0 = i0;
  plan.n = n;
  // The least dominated pair: most expanded direction of E, least expanded direction of F.
  const Matrix p = normalized_product(c.chain(i0, n));
  const Matrix pe = p * e.basis(), pf = p * f.basis();
  plan.v = (e.basis() * svd_ascending(Matrix(pe.transpose() * pe)).domain.rightCols(1)).col(0).normalized();
  plan.w = (f.basis() * svd_ascending(Matrix(pf.transpose() * pf)).domain.leftCols(1)).col(0).normalized();
  Matrix q(d, 2);
  q.col(0) = plan.v;
  Vector q2 = plan.w - plan.w.dot(plan.v) * plan.v;
  if (q2.norm() < 1e-12) throw PreconditionFailed("v and w are parallel");
  q.col(1) = q2.normalized();
  Vector w2(2);
  w2 << plan.w.dot(q.col(0)), plan.w.dot(q.col(1));
  Vector v2(2);
  v2 << 1.0, 0.0;
  std::vector<Matrix> planar, frames;
  for (int i = 0; i < n; ++i) {
    const Matrix m = c.at(i0 + i) * q;
    Matrix next(d, 2), t = Matrix::Zero(2, 2);
    const double r0 = m.col(0).norm();
    if (!(r0 > 0.0)) throw PreconditionFailed("mixing plane meets the kernel at index " + std::to_string(i0 + i));
    next.col(0) = m.col(0) / r0;
    const double r01 = next.col(0).dot(m.col(1));
    const Vector rest = m.col(1) - r01 * next.col(0);
    const double r1 = rest.norm();
    if (!(r1 > 1e-14 * r0)) throw PreconditionFailed("mixing plane collapses at index " + std::to_string(i0 + i));
    next.col(1) = rest / r1;
    t << r0, r01, 0.0, r1;
    planar.push_back(t);
    frames.push_back(next);
    q = next;
  }
  plan.mix = mix_rotations_2d(planar, v2, w2, delta);
  PerturbedChain& amb = plan.ambient;
  for (int i = 0; i < n; ++i) {
    const Matrix& fr = frames[i];
    const Matrix r = fr * plan.mix.chain.rotations[i] * fr.transpose() + (Matrix::Identity(d, d) - fr * fr.transpose());
    amb.original.push_back(c.at(i0 + i));
    amb.rotations.push_back(r);
    amb.thetas.push_back(plan.mix.chain.thetas[i]);
    amb.budget = std::max(amb.budget, franks_budget(c.at(i0 + i), r));
  }
  return plan;
}

KernelRaiseReport build_kernel_raiser(const CocycleSegment& c, const SplittingSample& s, const ReturnTimes& times,
                                      const MixingPlan& plan, double eps0, double rank_tol) {
  const std::ptrdiff_t i0 = plan.i0;
  const auto tp = times.plus(i0), tm = times.minus(i0);
  if (!tp || !tm) throw PreconditionFailed("return times undefined at the mixing start");
  if (*tp < plan.n) throw PreconditionFailed("mixing window runs past the next critical hit");
  if (!plan.mix.success) throw PreconditionFailed("mixing did not align the directions");
  for (std::size_t i = 0; i < plan.ambient.rotations.size(); ++i)
    if (franks_budget(plan.ambient.original[i], plan.ambient.rotations[i]) >= eps0)
      throw BudgetExceeded("||L_i - J_i|| >= eps0 at index " + std::to_string(i0 + static_cast<std::ptrdiff_t>(i)));
  for (int a = 0; a < plan.n; ++a)
    for (int b = a + 1; b < plan.n; ++b) {
      const Point* pa = c.point(i0 + a);
      const Point* pb = c.point(i0 + b);
      if (pa && pb && torus_distance(*pa, *pb) <= 1e-6)
        throw PreconditionFailed("perturbed orbit points are not distinct");
    }
  KernelRaiseReport rep;
  rep.kappa = s.kappa;
  rep.eps0 = eps0;
  rep.budget = plan.ambient.budget;
  rep.start = i0 + *tm;
  rep.m = times.m_f + static_cast<int>(*tp - *tm);
  if (!c.has_chain(rep.start, rep.m)) throw OutOfRange("composed chain leaves the segment");
  rep.modified = c.chain(rep.start, rep.m);
  for (int i = 0; i < plan.n; ++i)
    rep.modified[static_cast<std::size_t>(i0 + i - rep.start)] = plan.ambient.rotations[i] * c.at(i0 + i);
  const SvdResult svd = svd_of_chain(rep.modified);
  rep.log_sigmas = svd.log_sigmas;
  // Numerical kernel against the product of the factor norms, so a product that is
  // zero up to rounding counts as full kernel.
  double log_scale = 0.0;
  for (const Matrix& l : rep.modified) log_scale += std::log(std::max(operator_norm(l), std::numeric_limits<double>::min()));
  for (int j = 0; j < svd.dim(); ++j)
    if (svd.log_sigmas(j) <= std::log(rank_tol) + log_scale) ++rep.kernel_dim;

  const Matrix p = normalized_product(rep.modified);
  const double pn = operator_norm(p);
  const Subspace e_start = kernel(svd_of_chain(c.chain(rep.start, times.m_f)), rank_tol);
  rep.e_annihilation = (e_start.trivial() || pn == 0.0) ? 0.0 : norm_restricted(p, e_start) / pn;
  // w with Df^{|tau-|} w = v, by the pseudo-inverse of the backward block.
  const SvdResult back = svd_ascending(product_chain(c.chain(rep.start, -*tm)));
  Vector w = Vector::Zero(c.dim());
  const double top = back.sigmas(c.dim() - 1);
  for (int j = 0; j < c.dim(); ++j)
    if (back.sigmas(j) > rank_tol * top) w += (back.codomain.col(j).dot(plan.v) / back.sigmas(j)) * back.domain.col(j);
  rep.w_annihilation = (pn == 0.0 || w.norm() == 0.0) ? 0.0 : (p * w).norm() / (pn * w.norm());
  if (rep.kernel_dim < s.kappa + 1)
    throw RankNotRaised("kernel dimension " + std::to_string(rep.kernel_dim) + " after mixing, want " +
                        std::to_string(s.kappa + 1));
  return rep;
}

FullKernelReport full_kernel_demo(const CocycleSegment& c, std::ptrdiff_t start, int m, double radius, int samples) {
  if (m < 1 || !c.has_chain(start, m)) throw OutOfRange("demo chain outside the segment");
  const std::vector<Matrix> chain = c.chain(start, m);
  FullKernelReport rep;
  rep.radius = radius;
  double log_scale = 0.0;
  for (const Matrix& j : chain) log_scale += std::log(std::max(operator_norm(j), std::numeric_limits<double>::min()));
  rep.scale = std::exp(log_scale);
  const SvdResult s = svd_of_chain(chain);
  rep.log_sigmas = s.log_sigmas;
  const double cut = std::log(1e-12) + log_scale;
  for (int i = 0; i < s.dim(); ++i)
    if (s.log_sigmas(i) > cut) ++rep.rank;
  if (rep.rank > 0)
    throw PreconditionFailed("Df^" + std::to_string(m) + " has rank " + std::to_string(rep.rank) + "; kernel is not full");
  const Matrix p = product_chain(chain);
  std::vector<Vector> img;
  for (int k = 0; k < samples; ++k) img.push_back(p * (radius * halton(k + 1, 2) * halton_direction(k + 1, c.dim())));
  img.push_back(Vector::Zero(c.dim()));
  for (std::size_t a = 0; a < img.size(); ++a)
    for (std::size_t b = a + 1; b < img.size(); ++b) rep.image_diameter = std::max(rep.image_diameter, (img[a] - img[b]).norm());
  return rep;
}

}  // namespace domsplit

#include "domsplit/linalg.hpp"

#include "domsplit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace domsplit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct JacobiOut {
  Vector sigmas;  // unsorted, one per column
  Matrix left;    // m x n, normalized images (zero columns where sigma = 0)
  Matrix right;   // n x n accumulated rotations
};

// One-sided (Hestenes) Jacobi: orthogonalize the columns of a by plane rotations.
JacobiOut one_sided_jacobi(const Matrix& a) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  Matrix u = a;
  Matrix v = Matrix::Identity(n, n);
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double alpha = u.col(p).squaredNorm();
        const double beta = u.col(q).squaredNorm();
        const double gamma = u.col(p).dot(u.col(q));
        if (gamma == 0.0 || std::abs(gamma) <= 1e-16 * std::sqrt(alpha) * std::sqrt(beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        for (int r = 0; r < m; ++r) {
          const double up = u(r, p), uq = u(r, q);
          u(r, p) = c * up - s * uq;
          u(r, q) = s * up + c * uq;
        }
        for (int r = 0; r < n; ++r) {
          const double vp = v(r, p), vq = v(r, q);
          v(r, p) = c * vp - s * vq;
          v(r, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }
  JacobiOut out{Vector(n), Matrix::Zero(m, n), v};
  for (int j = 0; j < n; ++j) {
    out.sigmas(j) = u.col(j).norm();
    if (out.sigmas(j) > 0.0) out.left.col(j) = u.col(j) / out.sigmas(j);
  }
  return out;
}

// Orthonormalizes columns in the given priority order; zero columns are filled
// from the orthogonal complement of the earlier ones.
void orthonormal_completion(Matrix& cols, const std::vector<int>& order, const std::vector<bool>& fill) {
  const int d = static_cast<int>(cols.rows());
  std::vector<int> done;
  for (int idx : order) {
    if (fill[idx]) continue;
    Vector x = cols.col(idx);
    for (int k : done) x -= cols.col(k).dot(x) * cols.col(k);
    const double nx = x.norm();
    if (nx > 0.0) cols.col(idx) = x / nx;
    done.push_back(idx);
  }
  for (int idx : order) {
    if (!fill[idx]) continue;
    double best = -1.0;
    Vector pick;
    for (int e = 0; e < d; ++e) {
      Vector x = Vector::Unit(d, e);
      for (int pass = 0; pass < 2; ++pass)
        for (int k : done) x -= cols.col(k).dot(x) * cols.col(k);
      if (x.norm() > best) {
        best = x.norm();
        pick = x;
      }
    }
    cols.col(idx) = pick / best;
    done.push_back(idx);
  }
}

// Builds an ascending SvdResult of a square d x d matrix from a Jacobi run on it
// (transposed = false) or on its transpose (transposed = true).
SvdResult assemble(const JacobiOut& j, bool transposed, double log_shift) {
  const int d = static_cast<int>(j.sigmas.size());
  std::vector<int> asc(d);
  std::iota(asc.begin(), asc.end(), 0);
  std::stable_sort(asc.begin(), asc.end(), [&](int a, int b) { return j.sigmas(a) < j.sigmas(b); });

  Matrix left = j.left;
  const double top = j.sigmas.maxCoeff();
  std::vector<bool> fill(d);
  for (int i = 0; i < d; ++i) fill[i] = !(j.sigmas(i) > 0.0) || !(top > 0.0);
  std::vector<int> desc(asc.rbegin(), asc.rend());
  orthonormal_completion(left, desc, fill);

  SvdResult r;
  r.sigmas.resize(d);
  r.log_sigmas.resize(d);
  r.domain.resize(d, d);
  r.codomain.resize(d, d);
  for (int k = 0; k < d; ++k) {
    const int i = asc[k];
    const double s = j.sigmas(i);
    r.log_sigmas(k) = s > 0.0 ? std::log(s) + log_shift : kNegInf;
    r.sigmas(k) = log_shift == 0.0 ? s : std::exp(r.log_sigmas(k));
    if (transposed) {
      r.domain.col(k) = left.col(i);
      r.codomain.col(k) = j.right.col(i);
    } else {
      r.domain.col(k) = j.right.col(i);
      r.codomain.col(k) = left.col(i);
    }
  }
  return r;
}

}  // namespace

double SvdResult::log_gap(int k) const { return log_sigmas(k - 1) - log_sigmas(k); }

bool SvdResult::has_gap(int k, double rel) const {
  if (log_sigmas(k - 1) == kNegInf) return log_sigmas(k) > kNegInf;
  return log_gap(k) < std::log1p(-rel);
}

SvdResult svd_ascending(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("svd_ascending expects a square matrix");
  if (!a.allFinite()) throw InvalidArgument("non-finite matrix entry");
  return assemble(one_sided_jacobi(a), false, 0.0);
}

Vector singular_values(const Matrix& a) {
  if (a.cols() > a.rows()) return singular_values(a.transpose());
  Vector s = one_sided_jacobi(a).sigmas;
  std::sort(s.data(), s.data() + s.size());
  return s;
}

Subspace kernel(const SvdResult& svd, double tol) {
  const int d = svd.dim();
  const double top = svd.log_sigmas(d - 1);
  if (top == kNegInf) return Subspace::full(d);
  const double cut = std::log(tol) + top;
  int k = 0;
  while (k < d && svd.log_sigmas(k) <= cut) ++k;
  return Subspace::from_orthonormal(svd.domain.leftCols(k));
}

Subspace image(const SvdResult& svd, double tol) {
  const int d = svd.dim();
  const int k = kernel(svd, tol).dim();
  return Subspace::from_orthonormal(svd.codomain.rightCols(d - k));
}

Subspace kernel(const Matrix& a, double tol) {
  const SvdResult s = svd_ascending(a);
  if (s.sigmas(s.dim() - 1) <= tol) return Subspace::full(s.dim());
  return kernel(s, tol);
}

Subspace image(const Matrix& a, double tol) {
  const SvdResult s = svd_ascending(a);
  if (s.sigmas(s.dim() - 1) <= tol) return Subspace::zero(s.dim());
  return image(s, tol);
}

double norm_restricted(const Matrix& a, const Subspace& v) {
  if (v.trivial()) throw InvalidArgument("restricted norm on the zero subspace");
  const Vector s = singular_values(a * v.basis());
  return s(s.size() - 1);
}

double conorm_restricted(const Matrix& a, const Subspace& v) {
  if (v.trivial()) throw InvalidArgument("restricted conorm on the zero subspace");
  return singular_values(a * v.basis())(0);
}

double operator_norm(const Matrix& a) {
  const Vector s = singular_values(a);
  return s(s.size() - 1);
}

Matrix product_chain(std::span<const Matrix> mats) {
  if (mats.empty()) throw InvalidArgument("empty chain");
  Matrix p = mats[0];
  for (std::size_t i = 1; i < mats.size(); ++i) {
    if (mats[i].cols() != p.rows()) throw InvalidArgument("non-conforming chain");
    p = mats[i] * p;
    if (!p.allFinite()) throw ChainOverflow(i);
  }
  if (!p.allFinite()) throw ChainOverflow(0);
  return p;
}

FactoredProduct::FactoredProduct(int d)
    : d_(d), q_(Matrix::Identity(d, d)), log_d_(Vector::Zero(d)), t_(Matrix::Identity(d, d)) {}

void FactoredProduct::push(const Matrix& a) {
  if (a.rows() != d_ || a.cols() != d_) throw InvalidArgument("non-conforming chain");
  if (!a.allFinite()) throw ChainOverflow(steps_);
  ++steps_;
  // A Q D T with columns of A Q taken in decreasing order of D: an unpivoted QR of
  // the unscaled columns then never divides a large scale by a smaller one.
  std::vector<int> perm(d_);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](int x, int y) { return log_d_(x) > log_d_(y); });
  Matrix aq = a * q_;
  Matrix m(d_, d_);
  for (int k = 0; k < d_; ++k) m.col(k) = aq.col(perm[k]);
  Eigen::HouseholderQR<Matrix> qr(m);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  Matrix t(d_, d_);
  Vector logs(d_);
  for (int i = 0; i < d_; ++i) {
    // Row i of D' T' is sum_j R_ij exp(l_j) T_j; scaled by its largest term, then normalized.
    double top = kNegInf;
    for (int j = i; j < d_; ++j) {
      const double lj = log_d_(perm[j]);
      if (lj > kNegInf && r(i, j) != 0.0) top = std::max(top, std::log(std::abs(r(i, j))) + lj);
    }
    Vector row = Vector::Zero(d_);
    if (top > kNegInf) {
      for (int j = i; j < d_; ++j) {
        const double lj = log_d_(perm[j]);
        if (lj == kNegInf || r(i, j) == 0.0) continue;
        const double w = std::exp(std::log(std::abs(r(i, j))) + lj - top);
        row += (r(i, j) < 0 ? -w : w) * t_.row(perm[j]).transpose();
      }
    }
    const double nrm = row.norm();
    if (nrm == 0.0) {
      logs(i) = kNegInf;
      t.row(i).setZero();
      continue;
    }
    logs(i) = top + std::log(nrm);
    t.row(i) = (row / nrm).transpose();
  }
  q_ = qr.householderQ();
  log_d_ = logs;
  t_ = t;
}

SvdResult FactoredProduct::svd() const {
  // P = Q X with X = D T. Rows of X are processed in groups whose log-scales lie
  // within kGroupRange of the group maximum; each group only sees the part of the
  // domain orthogonal to the rows of earlier (larger) groups. Couplings between
  // groups are below exp(-kGroupRange) relative and are dropped.
  constexpr double kGroupRange = 600.0;
  std::vector<int> rows;
  for (int i = 0; i < d_; ++i)
    if (log_d_(i) > kNegInf) rows.push_back(i);
  std::stable_sort(rows.begin(), rows.end(), [&](int a, int b) { return log_d_(a) > log_d_(b); });

  std::vector<double> logs;
  std::vector<Vector> dom, cod;
  Matrix comp = Matrix::Identity(d_, d_);
  std::size_t pos = 0;
  while (pos < rows.size() && comp.cols() > 0) {
    const double top = log_d_(rows[pos]);
    std::vector<int> group;
    while (pos < rows.size() && log_d_(rows[pos]) > top - kGroupRange &&
           static_cast<int>(group.size()) < comp.cols())
      group.push_back(rows[pos++]);
    const int g = static_cast<int>(group.size());
    const int c = static_cast<int>(comp.cols());
    Matrix xg(g, d_);
    Matrix qg(d_, g);
    for (int k = 0; k < g; ++k) {
      xg.row(k) = std::exp(log_d_(group[k]) - top) * t_.row(group[k]);
      qg.col(k) = q_.col(group[k]);
    }
    const Matrix y = (xg * comp).transpose();  // c x g, g <= c
    const JacobiOut j = one_sided_jacobi(y);
    Matrix taken(c, 0);
    for (int k = 0; k < g; ++k) {
      if (!(j.sigmas(k) > 0.0)) continue;
      logs.push_back(std::log(j.sigmas(k)) + top);
      dom.push_back(comp * j.left.col(k));
      cod.push_back(qg * j.right.col(k));
      taken.conservativeResize(c, taken.cols() + 1);
      taken.col(taken.cols() - 1) = j.left.col(k);
    }
    // Shrink the complement to the part of comp orthogonal to the taken directions.
    Matrix full = Matrix::Zero(c, c);
    full.leftCols(taken.cols()) = taken;
    std::vector<int> order(c);
    std::iota(order.begin(), order.end(), 0);
    std::vector<bool> fill(c, false);
    for (int k = static_cast<int>(taken.cols()); k < c; ++k) fill[k] = true;
    orthonormal_completion(full, order, fill);
    comp = comp * full.rightCols(c - taken.cols());
  }

  const int nz = static_cast<int>(logs.size());
  Matrix domain(d_, d_), codomain(d_, d_);
  for (int k = 0; k < nz; ++k) {
    domain.col(k) = dom[k];
    codomain.col(k) = cod[k];
  }
  // Zero singular values: remaining domain complement, codomain completed.
  for (int k = 0; k < d_ - nz; ++k) domain.col(nz + k) = comp.col(k);
  {
    std::vector<int> order(d_);
    std::iota(order.begin(), order.end(), 0);
    std::vector<bool> fill(d_, false);
    for (int k = nz; k < d_; ++k) fill[k] = true;
    orthonormal_completion(codomain, order, fill);
  }
  std::vector<int> asc(d_);
  std::iota(asc.begin(), asc.end(), 0);
  auto key = [&](int k) { return k < nz ? logs[k] : kNegInf; };
  std::stable_sort(asc.begin(), asc.end(), [&](int a, int b) { return key(a) < key(b); });
  SvdResult r;
  r.sigmas.resize(d_);
  r.log_sigmas.resize(d_);
  r.domain.resize(d_, d_);
  r.codomain.resize(d_, d_);
  for (int k = 0; k < d_; ++k) {
    r.log_sigmas(k) = key(asc[k]);
    r.sigmas(k) = std::exp(r.log_sigmas(k));
    r.domain.col(k) = domain.col(asc[k]);
    r.codomain.col(k) = codomain.col(asc[k]);
  }
  return r;
}

Matrix normalized_product(std::span<const Matrix> mats) {
  if (mats.empty()) throw InvalidArgument("empty chain");
  Matrix p = Matrix::Identity(mats.front().rows(), mats.front().cols());
  for (const Matrix& a : mats) {
    p = a * p;
    const double m = p.cwiseAbs().maxCoeff();
    if (m > 0.0) p /= m;
  }
  return p;
}

Subspace image_of(const Matrix& a, const Subspace& v, double rel) {
  const int d = static_cast<int>(a.rows());
  if (v.trivial()) return Subspace::zero(d);
  const Matrix m = a * v.basis();
  const double top = singular_values(m)(m.cols() - 1);
  const double scale = operator_norm(a);
  if (!(top > rel * scale)) return Subspace::zero(d);
  return Subspace::span(m, rel * scale / top);
}

SvdResult svd_of_chain(std::span<const Matrix> mats) {
  if (mats.empty()) throw InvalidArgument("empty chain");
  FactoredProduct p(static_cast<int>(mats[0].rows()));
  for (const Matrix& m : mats) p.push(m);
  return p.svd();
}

}  // namespace domsplit

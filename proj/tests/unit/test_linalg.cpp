#include "domsplit/errors.hpp"
#include "domsplit/linalg.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace domsplit;

namespace {

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Matrix diag(std::initializer_list<double> v) {
  Vector x(static_cast<int>(v.size()));
  int i = 0;
  for (double e : v) x(i++) = e;
  return x.asDiagonal();
}

void check_svd_contract(const Matrix& a, const SvdResult& s, double tol = 1e-10) {
  const int d = static_cast<int>(a.rows());
  for (int i = 0; i + 1 < d; ++i) CHECK(s.sigmas(i) <= s.sigmas(i + 1));
  CHECK((s.domain.transpose() * s.domain - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() < tol);
  CHECK((s.codomain.transpose() * s.codomain - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() < tol);
  const double scale = std::max(1.0, s.sigmas(d - 1));
  for (int i = 0; i < d; ++i)
    CHECK((a * s.domain.col(i) - s.sigmas(i) * s.codomain.col(i)).norm() < tol * scale);
  Matrix rec = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) rec += s.sigmas(i) * s.codomain.col(i) * s.domain.col(i).transpose();
  CHECK((a - rec).norm() <= 1e-9 * scale);
}

}  // namespace

TEST_CASE("svd_ascending on diagonal, identity and the degenerate 2x2") {
  SvdResult s = svd_ascending(diag({3, 2}));
  CHECK(s.sigmas(0) == doctest::Approx(2));
  CHECK(s.sigmas(1) == doctest::Approx(3));
  CHECK(std::abs(s.domain(1, 0)) == doctest::Approx(1));
  CHECK(std::abs(s.domain(0, 1)) == doctest::Approx(1));

  s = svd_ascending(Matrix::Identity(2, 2));
  CHECK(s.sigmas(0) == 1.0);
  CHECK(s.sigmas(1) == 1.0);

  const Matrix a = m2(0, 1, 0, 0.5);
  s = svd_ascending(a);
  check_svd_contract(a, s);
  CHECK(s.sigmas(0) == 0.0);
  CHECK(s.sigmas(1) == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));
  CHECK(std::abs(s.domain(0, 0)) == doctest::Approx(1));
  CHECK(s.log_sigmas(0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("svd_ascending matches an extended-precision oracle on random matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 2 + trial % 3;
    const Matrix a = oracle::random_matrix(rng, d, d);
    const SvdResult s = svd_ascending(a);
    check_svd_contract(a, s);
    const auto ref = oracle::sigmas_ld(a.cast<long double>());
    for (int i = 0; i < d; ++i) CHECK(std::abs(s.sigmas(i) - static_cast<double>(ref(i))) < 1e-12 * s.sigmas(d - 1));
    // Adjoint symmetry.
    const SvdResult t = svd_ascending(a.transpose());
    for (int i = 0; i < d; ++i) CHECK(std::abs(s.sigmas(i) - t.sigmas(i)) < 1e-10 * std::max(1.0, s.sigmas(d - 1)));
  }
}

TEST_CASE("rank-deficient matrices keep orthonormal bases") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + trial % 3;
    const int r = trial % d;
    const Matrix a = oracle::random_matrix(rng, d, r) * oracle::random_matrix(rng, r, d);
    const SvdResult s = svd_ascending(r == 0 ? Matrix(Matrix::Zero(d, d)) : a);
    check_svd_contract(r == 0 ? Matrix(Matrix::Zero(d, d)) : a, s);
    const Subspace k = kernel(r == 0 ? Matrix(Matrix::Zero(d, d)) : a);
    const Subspace im = image(r == 0 ? Matrix(Matrix::Zero(d, d)) : a);
    CHECK(k.dim() == d - r);
    CHECK(k.dim() + im.dim() == d);
  }
}

TEST_CASE("kernel and image") {
  Subspace k = kernel(diag({0, 2}), 1e-8);
  REQUIRE(k.dim() == 1);
  CHECK(std::abs(k.basis()(0, 0)) == doctest::Approx(1));
  CHECK(kernel(Matrix::Identity(2, 2), 1e-8).dim() == 0);
  CHECK(kernel(Matrix::Zero(3, 3)).dim() == 3);

  const Matrix a = m2(0, 1, 0, 0.5);
  k = kernel(a);
  REQUIRE(k.dim() == 1);
  CHECK(std::abs(k.basis()(0, 0)) == doctest::Approx(1));
  CHECK(k.basis()(1, 0) == doctest::Approx(0).epsilon(1e-15));

  Subspace im = image(diag({0, 2}));
  REQUIRE(im.dim() == 1);
  CHECK(std::abs(im.basis()(1, 0)) == doctest::Approx(1));
  im = image(a);
  REQUIRE(im.dim() == 1);
  const Vector ref = oracle::column_space_rank1(a);
  CHECK(std::abs(im.basis().col(0).dot(ref)) == doctest::Approx(1).epsilon(1e-14));
  CHECK(image(Matrix::Zero(2, 2)).dim() == 0);

  // A v is at most d * tol * sigma_d for kernel vectors.
  const Matrix near = m2(1, 1, 1, 1 + 1e-10);
  const Subspace kn = kernel(near, 1e-8);
  REQUIRE(kn.dim() == 1);
  CHECK((near * kn.basis()).norm() <= 2 * 1e-8 * 2.0);
}

TEST_CASE("restricted norm and conorm") {
  CHECK(norm_restricted(diag({1, 3}), Subspace::line(Vector::Unit(2, 1))) == doctest::Approx(3));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) {
    const Subspace v = Subspace::line(oracle::random_unit(rng, 3));
    CHECK(norm_restricted(Matrix::Identity(3, 3), v) == doctest::Approx(1));
  }
  const Matrix a = m2(2, 1, 0, 1);
  const Vector u{{1.0, 1.0}};
  const double expect = Vector{{3.0, 1.0}}.norm() / std::sqrt(2.0);
  CHECK(norm_restricted(a, Subspace::line(u)) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(oracle::circle_sample(a, Subspace::line(u).basis()).max == doctest::Approx(expect).epsilon(1e-12));

  CHECK(conorm_restricted(diag({1, 3}), Subspace::full(2)) == doctest::Approx(1));
  CHECK(conorm_restricted(diag({0, 2}), Subspace::line(Vector::Unit(2, 0))) == 0.0);
  const auto ext = oracle::circle_sample(a, Matrix::Identity(2, 2));
  CHECK(conorm_restricted(a, Subspace::full(2)) == doctest::Approx(ext.min).epsilon(1e-6));
  CHECK(norm_restricted(a, Subspace::full(2)) == doctest::Approx(ext.max).epsilon(1e-6));

  CHECK_THROWS_AS(norm_restricted(a, Subspace::zero(2)), InvalidArgument);
  CHECK_THROWS_AS(conorm_restricted(a, Subspace::zero(2)), InvalidArgument);
}

TEST_CASE("product_chain") {
  const std::vector<Matrix> ids{Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
  CHECK(product_chain(ids) == Matrix::Identity(2, 2));
  const std::vector<Matrix> ds{diag({2, 1}), diag({1, 3})};
  CHECK(product_chain(ds) == diag({2, 3}));
  std::vector<Matrix> ex;
  for (int n = 1; n <= 3; ++n) ex.push_back(m2(0, 1, 0, 1.0 / (n + 1)));
  const Matrix p = product_chain(ex);
  CHECK(p(0, 0) == 0.0);
  CHECK(p(1, 0) == 0.0);
  const std::vector<Matrix> big(3, diag({1e200, 1}));
  CHECK_THROWS_AS(product_chain(big), ChainOverflow);
  try {
    product_chain(big);
  } catch (const ChainOverflow& e) {
    CHECK(e.index() == 1);
  }
}

TEST_CASE("svd_of_chain") {
  const std::vector<Matrix> powers(50, diag({0.5, 2}));
  const SvdResult s = svd_of_chain(powers);
  CHECK(s.log_gap(1) == doctest::Approx(-50 * std::log(4.0)).epsilon(1e-12));
  CHECK(std::abs(s.domain(0, 0)) == doctest::Approx(1));

  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = oracle::random_matrix(rng, 3, 3);
    const SvdResult one = svd_of_chain(std::vector<Matrix>{a});
    const SvdResult ref = svd_ascending(a);
    for (int i = 0; i < 3; ++i) CHECK(one.sigmas(i) == doctest::Approx(ref.sigmas(i)).epsilon(1e-12));
  }

  // Random well-conditioned 3x3 chains against an extended-precision product.
  for (int t = 0; t < 20; ++t) {
    std::vector<Matrix> chain;
    oracle::MatrixL prod = oracle::MatrixL::Identity(3, 3);
    for (int k = 0; k < 10; ++k) {
      Matrix a = oracle::random_matrix(rng, 3, 3);
      const Eigen::VectorXd sv = oracle::sigmas(a);
      if (sv(sv.size() - 1) / sv(0) > 1e2) a += 3 * Matrix::Identity(3, 3);
      chain.push_back(a);
      prod = a.cast<long double>() * prod;
    }
    const SvdResult s = svd_of_chain(chain);
    const auto ref = oracle::sigmas_ld(prod);
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs(s.sigmas(i) - static_cast<double>(ref(i))) <= 1e-8 * static_cast<double>(ref(2)));
  }
}

TEST_CASE("svd_of_chain keeps ratios accurate past overflow") {
  // Graded chain: sigma ratio 1e-400 is not representable, the log-ratio is.
  std::vector<Matrix> chain;
  Matrix rot(2, 2);
  rot << std::cos(0.3), -std::sin(0.3), std::sin(0.3), std::cos(0.3);
  for (int k = 0; k < 100; ++k) chain.push_back(rot * diag({1e-2, 1e2}) * rot.transpose());
  const SvdResult s = svd_of_chain(chain);
  CHECK(s.log_sigmas(1) == doctest::Approx(200 * std::log(10.0)).epsilon(1e-9));
  CHECK(s.log_sigmas(0) == doctest::Approx(-200 * std::log(10.0)).epsilon(1e-6));
  // Contracting direction is the rotated e_1.
  CHECK(std::abs(s.domain.col(0).dot(rot.col(0))) == doctest::Approx(1).epsilon(1e-12));
}

TEST_CASE("svd_of_chain log singular values are additive for commuting diagonal chains") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<Matrix> chain;
    Vector acc = Vector::Zero(3);
    for (int k = 0; k < 40; ++k) {
      const Vector e{{u(rng), u(rng), u(rng)}};
      chain.push_back(e.asDiagonal());
      acc += e.array().log().matrix();
    }
    std::sort(acc.data(), acc.data() + 3);
    const SvdResult s = svd_of_chain(chain);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(s.log_sigmas(i) - acc(i)) < 1e-9);
  }
}

TEST_CASE("svd_of_chain exact zeros on the degenerate chain") {
  std::vector<Matrix> ex;
  for (int n = 1; n <= 20; ++n) ex.push_back(m2(0, 1, 0, 1.0 / (n + 1)));
  const SvdResult s = svd_of_chain(ex);
  CHECK(s.sigmas(0) == 0.0);
  CHECK(s.sigmas(1) > 0.0);
  CHECK(std::abs(s.domain(0, 0)) == doctest::Approx(1));
  CHECK(kernel(s).dim() == 1);
}

TEST_CASE("minimax characterization on random matrices") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 60; ++t) {
    const int d = 2 + t % 3;
    const Matrix a = oracle::random_matrix(rng, d, d);
    const SvdResult s = svd_ascending(a);
    for (int j = 1; j < d; ++j) {
      const Subspace lo = Subspace::from_orthonormal(s.domain.leftCols(j));
      const Subspace hi = Subspace::from_orthonormal(s.domain.rightCols(d - j));
      CHECK(std::abs(norm_restricted(a, lo) - s.sigmas(j - 1)) < 1e-9);
      CHECK(std::abs(conorm_restricted(a, hi) - s.sigmas(j)) < 1e-9);
    }
    for (int p = 0; p < 50; ++p) {
      const int r = 1 + p % d;
      const Subspace sub = Subspace::from_orthonormal(oracle::random_basis(rng, d, r));
      CHECK(norm_restricted(a, sub) >= s.sigmas(r - 1) - 1e-9);
      CHECK(conorm_restricted(a, sub) <= s.sigmas(d - r) + 1e-9);
    }
  }
}

TEST_CASE("svd_of_chain with zero columns matches the direct product") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 200; ++t) {
    const int d = 2 + t % 3;
    std::vector<Matrix> chain;
    oracle::MatrixL prod = oracle::MatrixL::Identity(d, d);
    for (int k = 0; k < 1 + t % 6; ++k) {
      Matrix a = oracle::random_matrix(rng, d, d);
      a.col(static_cast<int>(rng() % d)).setZero();
      chain.push_back(a);
      prod = a.cast<long double>() * prod;
    }
    const SvdResult s = svd_of_chain(chain);
    const auto ref = oracle::sigmas_ld(prod);
    for (int i = 0; i < d; ++i)
      CHECK(std::abs(s.sigmas(i) - static_cast<double>(ref(i))) <= 1e-10 * static_cast<double>(ref(d - 1)));
  }
}

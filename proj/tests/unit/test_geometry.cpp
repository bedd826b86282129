#include "domsplit/errors.hpp"
#include "domsplit/geometry.hpp"
#include "domsplit/linalg.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace domsplit;
using std::numbers::pi;

namespace {
Subspace line2(double x, double y) { return Subspace::line(Vector{{x, y}}); }
Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}
Subspace random_subspace(std::mt19937_64& rng, int d, int r) {
  return Subspace::from_orthonormal(oracle::random_basis(rng, d, r));
}
}  // namespace

TEST_CASE("angle_between") {
  CHECK(angle_between(line2(1, 0), line2(0, 1)) == doctest::Approx(pi / 2));
  CHECK(angle_between(line2(1, 2), line2(1, 2)) < 1e-15);
  CHECK(angle_between(line2(1, 0), line2(1, 1)) == doctest::Approx(pi / 4).epsilon(1e-15));
  CHECK(angle_between(line2(1, 0), line2(1, 1)) ==
        doctest::Approx(oracle::sampled_angle_2d(Vector{{1, 0}}, Vector{{1, 1}})).epsilon(1e-3));
  CHECK_THROWS_AS(angle_between(Subspace::zero(2), line2(1, 0)), InvalidArgument);

  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const int d = 2 + t % 3;
    const Subspace a = random_subspace(rng, d, 1 + t % (d - 1));
    const Subspace b = random_subspace(rng, d, 1 + (t / 3) % (d - 1));
    CHECK(std::abs(angle_between(a, b) - angle_between(b, a)) < 1e-12);
    // Constructed intersecting pair: share one random direction.
    const Vector shared = oracle::random_unit(rng, d);
    Matrix m1(d, 2), m2(d, 1);
    m1.col(0) = shared;
    m1.col(1) = oracle::random_unit(rng, d);
    m2.col(0) = shared;
    CHECK(angle_between(Subspace::span(m1), Subspace::span(m2)) < 1e-12);
  }
  // Small angles keep full relative accuracy.
  CHECK(angle_between(line2(1, 0), line2(1, 1e-9)) == doctest::Approx(1e-9).epsilon(1e-12));
}

TEST_CASE("grassmann_distance") {
  CHECK(grassmann_distance(line2(1, 3), line2(1, 3)) == 0.0);
  CHECK(grassmann_distance(line2(1, 0), line2(0, 1)) == doctest::Approx(1.0));
  const double via_angle = std::cos(angle_between(orthogonal_complement(line2(1, 0)), line2(1, 1)));
  CHECK(grassmann_distance(line2(1, 0), line2(1, 1)) == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-15));
  CHECK(via_angle == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-14));
  CHECK(std::cos(oracle::sampled_angle_2d(Vector{{0, 1}}, Vector{{1, 1}})) ==
        doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-3));
  CHECK_THROWS_AS(grassmann_distance(line2(1, 0), Subspace::full(2)), DimensionMismatch);

  std::mt19937_64 rng(4);
  for (int t = 0; t < 200; ++t) {
    const int d = 2 + t % 3;
    const int r = 1 + t % (d - 1);
    const Subspace a = random_subspace(rng, d, r), b = random_subspace(rng, d, r), c = random_subspace(rng, d, r);
    const double ab = grassmann_distance(a, b), ba = grassmann_distance(b, a);
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK(std::abs(ab - ba) < 1e-10);
    CHECK(grassmann_distance(a, a) < 1e-8);
    CHECK(grassmann_distance(a, c) <= ab + grassmann_distance(b, c) + 1e-8);
  }
}

TEST_CASE("orthogonal_complement") {
  Subspace c = orthogonal_complement(line2(1, 0));
  REQUIRE(c.dim() == 1);
  CHECK(std::abs(c.basis()(1, 0)) == doctest::Approx(1));
  CHECK(orthogonal_complement(Subspace::full(3)).dim() == 0);
  c = orthogonal_complement(line2(1, 1));
  CHECK(std::abs(c.basis().col(0).dot(Vector{{1, -1}}) / std::sqrt(2.0)) == doctest::Approx(1));
  std::mt19937_64 rng(6);
  for (int t = 0; t < 50; ++t) {
    const int d = 2 + t % 3;
    const Subspace v = random_subspace(rng, d, 1 + t % (d - 1));
    const Subspace w = orthogonal_complement(v);
    CHECK(v.dim() + w.dim() == d);
    CHECK(angle_between(v, w) == doctest::Approx(pi / 2));
    CHECK((v.basis().transpose() * w.basis()).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("cones") {
  const Cone c = Cone::make(line2(1, 0), 0.3);
  CHECK(cone_contains(c, Vector{{1, 0}}));
  CHECK_FALSE(cone_contains(c, Vector{{0, 1}}));
  CHECK(cone_contains(Cone::make(line2(1, 0), pi / 4), Vector{{1, 1}}));
  CHECK_THROWS_AS(cone_contains(c, Vector{{0, 0}}), InvalidArgument);
  CHECK_THROWS_AS(Cone::make(line2(1, 0), 0.0), InvalidArgument);
  CHECK_THROWS_AS(Cone::make(Subspace::zero(2), 0.2), InvalidArgument);

  Cone d = cone_dual(Cone::make(line2(1, 0), pi / 4));
  CHECK(std::abs(d.center.basis()(1, 0)) == doctest::Approx(1));
  CHECK(d.half_angle == doctest::Approx(pi / 4));
  d = cone_dual(Cone::make(line2(1, 0), 0.1));
  CHECK(d.half_angle == doctest::Approx(pi / 2 - 0.1));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ang(0.01, pi / 2 - 0.01);
  for (int t = 0; t < 100; ++t) {
    const int d3 = 2 + t % 3;
    const Cone x = Cone::make(random_subspace(rng, d3, 1 + t % (d3 - 1)), ang(rng));
    const Cone xx = cone_dual(cone_dual(x));
    CHECK(grassmann_distance(xx.center, x.center) < 1e-12);
    CHECK(xx.half_angle == doctest::Approx(x.half_angle).epsilon(1e-14));
    for (int k = 0; k < 20; ++k) {
      const Vector u = oracle::random_unit(rng, d3);
      CHECK((cone_contains(x, u) || cone_contains(cone_dual(x), u)));
    }
  }
}

TEST_CASE("cone samples are in the cone and reach its boundary") {
  const Cone c = Cone::make(Subspace::span(Matrix(Matrix::Identity(3, 3).leftCols(2))), 0.4);
  double widest = 0.0;
  for (const Vector& u : cone_samples(c, 200, 3)) {
    CHECK(u.norm() == doctest::Approx(1));
    CHECK(cone_contains(c, u));
    widest = std::max(widest, std::asin(std::min(1.0, c.center.sine_to(u))));
  }
  CHECK(widest == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("cone_image_contained") {
  const Cone c = Cone::make(line2(0, 1), pi / 4);
  ContainmentReport r = cone_image_contained(diag2(1, 3), c, c, 0.01, 200);
  CHECK(r.ok);
  // tan(theta') = tan(theta) / 3 on the boundary gives the worst slack.
  CHECK(r.worst_slack == doctest::Approx(pi / 4 - std::atan(1.0 / 3.0)).epsilon(1e-12));

  r = cone_image_contained(Matrix::Identity(2, 2), c, c, 1e-6, 200);
  CHECK_FALSE(r.ok);
  CHECK(r.worst_slack == doctest::Approx(0).epsilon(1e-12));

  Matrix ex(2, 2);
  ex << 0, 1, 0, 0.5;
  const Cone src = Cone::make(line2(1, 0), 0.2);
  r = cone_image_contained(ex, src, src, 0.0, 200);
  CHECK_FALSE(r.ok);
  const Cone toward = Cone::make(line2(1, 0.5), 0.01);
  CHECK(cone_image_contained(ex, src, toward, 0.0, 200).ok);
  CHECK_THROWS_AS(cone_image_contained(ex, src, src, 0.0, 50), InvalidArgument);

  // Scalar multiples of the identity never give strict containment.
  std::mt19937_64 rng(12);
  for (int t = 0; t < 30; ++t) {
    const int d = 2 + t % 3;
    const Cone x = Cone::make(random_subspace(rng, d, 1 + t % (d - 1)), 0.1 + 0.04 * t);
    const double alpha = 0.1 + t;
    CHECK_FALSE(cone_image_contained(alpha * Matrix::Identity(d, d), x, x, 1e-9, 128).ok);
  }
}

TEST_CASE("subspace_limit") {
  std::vector<Subspace> same(6, line2(1, 1));
  auto [lim, rep] = subspace_limit(same, 1e-12);
  CHECK_FALSE(rep.rate_defined);
  CHECK(rep.converged);
  CHECK(rep.final_distance == 0.0);

  std::vector<Subspace> geo;
  for (int n = 1; n <= 30; ++n) geo.push_back(line2(1, std::ldexp(1.0, -n)));
  rep = subspace_limit(geo, 1e-8).second;
  REQUIRE(rep.rate_defined);
  CHECK(rep.rate == doctest::Approx(0.5).epsilon(0.05));
  // Closed-form distance: sin of the angle between (1, 2^-n) and (1, 2^-n-1).
  for (std::size_t k = 0; k < rep.distances.size(); ++k) {
    const double a = std::ldexp(1.0, -static_cast<int>(k) - 1), b = a / 2;
    CHECK(rep.distances[k] == doctest::Approx((a - b) / std::sqrt((1 + a * a) * (1 + b * b))).epsilon(1e-10));
  }
  CHECK_FALSE(rep.sub_geometric);

  std::vector<Subspace> slow;
  for (int n = 1; n <= 40; ++n) slow.push_back(line2(1, 1.0 / n));
  rep = subspace_limit(slow, 1e-8).second;
  CHECK(rep.sub_geometric);
  CHECK_FALSE(rep.converged);

  std::vector<Subspace> mixed{line2(1, 0), Subspace::full(2), line2(0, 1)};
  CHECK_THROWS_AS(subspace_limit(mixed, 1e-8), DimensionMismatch);
  CHECK_THROWS_AS(subspace_limit(std::vector<Subspace>(2, line2(1, 0)), 1e-8), InvalidArgument);
}

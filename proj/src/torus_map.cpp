#include "domsplit/torus_map.hpp"

#include "domsplit/errors.hpp"

#include <cmath>
#include <numbers>

namespace domsplit {

TorusMap::TorusMap(std::string name, Matrix linear, Vector translation, std::vector<TrigTerm> terms,
                   std::vector<std::pair<std::string, double>> parameters)
    : name_(std::move(name)),
      linear_(std::move(linear)),
      translation_(std::move(translation)),
      terms_(std::move(terms)),
      parameters_(std::move(parameters)) {
  const int d = dim();
  if (d < 1 || d > kMaxDim || linear_.cols() != d || translation_.size() != d)
    throw InvalidArgument("torus map dimensions must agree and lie in 1..4");
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (linear_(i, j) != std::round(linear_(i, j)))
        throw InvalidArgument("linear part must be an integer matrix to descend to the torus");
  for (const TrigTerm& t : terms_)
    if (t.component < 0 || t.component >= d || t.frequency.size() != d)
      throw InvalidArgument("trigonometric term does not match the map dimension");
}

Point TorusMap::lift(const Point& x) const {
  Point y = linear_ * x + translation_;
  for (const TrigTerm& t : terms_)
    y(t.component) += t.amplitude * std::sin(2.0 * std::numbers::pi * t.frequency.cast<double>().dot(x) + t.phase);
  return y;
}

Point TorusMap::evaluate(const Point& x) const { return wrap(lift(x)); }

Matrix TorusMap::jacobian(const Point& x) const {
  Matrix j = linear_;
  for (const TrigTerm& t : terms_) {
    const Vector k = t.frequency.cast<double>();
    const double c = t.amplitude * 2.0 * std::numbers::pi * std::cos(2.0 * std::numbers::pi * k.dot(x) + t.phase);
    j.row(t.component) += c * k.transpose();
  }
  return j;
}

Point wrap(const Point& x) {
  Point y(x.size());
  for (int i = 0; i < x.size(); ++i) {
    double v = x(i) - std::floor(x(i));
    if (v >= 1.0) v = 0.0;
    y(i) = v;
  }
  return y;
}

Point wrap_signed(const Point& x) {
  Point y(x.size());
  for (int i = 0; i < x.size(); ++i) y(i) = x(i) - std::floor(x(i) + 0.5);
  return y;
}

double torus_distance(const Point& a, const Point& b) { return wrap_signed(a - b).norm(); }

namespace catalog {

TorusMap linear(const Matrix& a) {
  std::vector<std::pair<std::string, double>> p;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) p.emplace_back("a" + std::to_string(i + 1) + std::to_string(j + 1), a(i, j));
  return TorusMap("linear", a, Vector::Zero(a.rows()), {}, std::move(p));
}

TorusMap doubling(int d) { return linear(2.0 * Matrix::Identity(d, d)); }

TorusMap fold(int y_multiplier, double phase, int shear) {
  Matrix l(2, 2);
  l << 2, 0, shear, y_multiplier;
  Vector c(2);
  c << phase, 0.0;
  TrigTerm t{0, 1.0 / std::numbers::pi, IntVector::Unit(2, 0), 0.0};
  return TorusMap("fold", l, c, {t},
                  {{"y_multiplier", y_multiplier}, {"phase", phase}, {"shear", static_cast<double>(shear)}});
}

TorusMap fold_fold(int z_multiplier) {
  Matrix l = Matrix::Zero(3, 3);
  l.diagonal() << 2, 2, z_multiplier;
  std::vector<TrigTerm> terms{{0, 1.0 / std::numbers::pi, IntVector::Unit(3, 0), 0.0},
                              {1, 1.0 / std::numbers::pi, IntVector::Unit(3, 1), 0.0}};
  return TorusMap("fold-fold", l, Vector::Zero(3), std::move(terms), {{"z_multiplier", z_multiplier}});
}

double fold_cycle_phase() {
  // g(1/2) = 1 + c = c mod 1, and g(c) = 3c + sin(2 pi c)/pi must equal 1/2.
  long double c = 0.1L;
  const long double pi = std::numbers::pi_v<long double>;
  for (int i = 0; i < 60; ++i) {
    const long double h = 3 * c + std::sin(2 * pi * c) / pi - 0.5L;
    const long double dh = 3 + 2 * std::cos(2 * pi * c);
    c -= h / dh;
  }
  return static_cast<double>(c);
}

std::vector<Point> fold_critical_cycle(int shear) {
  if (shear != 0 && shear != 1) throw InvalidArgument("fold_critical_cycle supports shear 0 or 1");
  const double c2 = fold_cycle_phase();
  // Two steps of y -> 2y + b x from (1/2, y0) give 4y0 + b(1 + c2) = y0 mod 1.
  Point p0(2);
  p0 << 0.5, shear ? (1.0 - c2) / 3.0 : 1.0 / 3.0;
  return {p0, wrap(fold(2, c2, shear).evaluate(p0))};
}

double fold_fixed_point_phase(double x) {
  const double c = -x - std::sin(2 * std::numbers::pi * x) / std::numbers::pi;
  return c - std::floor(c);
}

}  // namespace catalog

}  // namespace domsplit

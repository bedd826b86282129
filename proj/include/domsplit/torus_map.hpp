#pragma once

#include "domsplit/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace domsplit {

using IntVector = Eigen::Matrix<int, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

// amplitude * sin(2 pi <frequency, x> + phase) added to one output coordinate.
struct TrigTerm {
  int component = 0;
  double amplitude = 0.0;
  IntVector frequency;
  double phase = 0.0;
};

// f(x) = L x + c + sum of trig terms, reduced mod 1. L must be an integer matrix so
// that f descends to the torus R^d / Z^d.
class TorusMap {
 public:
  TorusMap(std::string name, Matrix linear, Vector translation, std::vector<TrigTerm> terms,
           std::vector<std::pair<std::string, double>> parameters = {});

  int dim() const { return static_cast<int>(linear_.rows()); }
  const std::string& name() const { return name_; }
  const std::vector<std::pair<std::string, double>>& parameters() const { return parameters_; }
  bool is_linear() const { return terms_.empty(); }
  const Matrix& linear_part() const { return linear_; }

  Point lift(const Point& x) const;
  Point evaluate(const Point& x) const;
  Matrix jacobian(const Point& x) const;

 private:
  std::string name_;
  Matrix linear_;
  Vector translation_;
  std::vector<TrigTerm> terms_;
  std::vector<std::pair<std::string, double>> parameters_;
};

// Reduces every coordinate into [0, 1).
Point wrap(const Point& x);
// Reduces every coordinate into [-1/2, 1/2).
Point wrap_signed(const Point& x);
double torus_distance(const Point& a, const Point& b);

namespace catalog {

TorusMap linear(const Matrix& a);
TorusMap doubling(int d);
// (2x + sin(2 pi x)/pi + phase, k y + shear x) mod 1. The x-derivative 2 + 2 cos(2 pi x)
// vanishes on the line x = 1/2.
TorusMap fold(int y_multiplier = 2, double phase = 0.0, int shear = 0);
// Folds in the first two coordinates and an expanding third: kernel dimension 2 on
// the line x = y = 1/2.
TorusMap fold_fold(int z_multiplier = 2);
// Phase for which x = 1/2 lies on a superattracting 2-cycle of the fold's first coordinate.
double fold_cycle_phase();
// The 2-cycle of fold(2, fold_cycle_phase(), shear) through x = 1/2, starting on the critical line.
std::vector<Point> fold_critical_cycle(int shear);
// Phase making x a fixed point of the fold's first coordinate.
double fold_fixed_point_phase(double x);

}  // namespace catalog

}  // namespace domsplit

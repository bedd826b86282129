#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace domsplit {

inline constexpr int kMaxDim = 4;

// Column vectors and matrices never exceed kMaxDim, so storage stays on the stack.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Point = Vector;

inline constexpr double kDefaultRankTol = 1e-8;

}  // namespace domsplit

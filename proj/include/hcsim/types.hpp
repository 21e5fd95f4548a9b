#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

namespace hcsim {

using Real = double;
using Complex = std::complex<double>;
using Index = Eigen::Index;

// Dimension is at most 3, so small per-axis quantities live on the stack.
template <typename T>
using SmallVec = Eigen::Matrix<T, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;

using Point = SmallVec<Real>;
using AxisSizes = SmallVec<Index>;

using RealArray = Eigen::ArrayXd;
using ComplexArray = Eigen::ArrayXcd;
using BoolArray = Eigen::Array<bool, Eigen::Dynamic, 1>;
using IntArray = Eigen::ArrayXi;

inline constexpr Real kPi = 3.14159265358979323846;

}  // namespace hcsim

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

namespace df {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Fine-structure constant used when a caller does not supply one.
inline constexpr double kDefaultAlpha = 1.0 / 137.0;

} // namespace df

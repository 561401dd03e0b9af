#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace qstomo {

using cplx = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using CVec = std::vector<cplx>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

}  // namespace qstomo

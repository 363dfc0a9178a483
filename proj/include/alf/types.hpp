#pragma once

#include <Eigen/Dense>

namespace alf {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Chart coordinates are ordered (x1, x2, x3, t); index 3 is the fiber.
inline constexpr int kFiber = 3;

}  // namespace alf

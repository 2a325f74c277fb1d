#pragma once

#include "aquacal/types.hpp"

namespace aquacal {

// Axis-angle 3-vector (axis * angle) <-> rotation matrix.
Mat3 so3_exp(const Vec3& w);
Vec3 so3_log(const Mat3& R);

}  // namespace aquacal

#include "aquacal/so3.hpp"

namespace aquacal {

Mat3 so3_exp(const Vec3& w) {
    const double angle = w.norm();
    if (angle < 1e-14) {
        return Mat3::Identity();
    }
    return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

Vec3 so3_log(const Mat3& R) {
    const Eigen::AngleAxisd aa(R);
    return aa.angle() * aa.axis();
}

}  // namespace aquacal

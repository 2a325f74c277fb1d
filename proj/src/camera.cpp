#include "aquacal/camera.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace aquacal {

const char* to_string(GeoError err) {
    switch (err) {
        case GeoError::kTotalInternalReflection: return "total internal reflection";
        case GeoError::kParallelRay: return "ray parallel to interface";
        case GeoError::kNoForwardIntersection: return "no forward intersection";
        case GeoError::kNoIntersection: return "no intersection";
        case GeoError::kBehindCamera: return "point behind camera";
        case GeoError::kBehindInterface: return "point behind interface";
        case GeoError::kNonConvergence: return "iteration did not converge";
    }
    return "unknown";
}

std::string to_string(CameraModel model) {
    switch (model) {
        case CameraModel::kPinhole: return "pinhole";
        case CameraModel::kSimpleRadial: return "simple_radial";
        case CameraModel::kRadial: return "radial";
        case CameraModel::kFullOpen: return "full_open";
    }
    return "unknown";
}

CameraModel camera_model_from_string(const std::string& name) {
    if (name == "pinhole") return CameraModel::kPinhole;
    if (name == "simple_radial") return CameraModel::kSimpleRadial;
    if (name == "radial") return CameraModel::kRadial;
    if (name == "full_open") return CameraModel::kFullOpen;
    throw CalibrationError(CalibrationError::Code::kSchemaError,
                           "unknown camera model '" + name + "'");
}

int distortion_size(CameraModel model) {
    switch (model) {
        case CameraModel::kPinhole: return 0;
        case CameraModel::kSimpleRadial: return 1;
        case CameraModel::kRadial: return 2;
        case CameraModel::kFullOpen: return 4;
    }
    return 0;
}

void CameraIntrinsics::validate() const {
    auto fail = [](const std::string& msg) {
        throw CalibrationError(CalibrationError::Code::kValidationError, "intrinsics: " + msg);
    };
    if (!(fx > 0.0) || !(fy > 0.0)) fail("focal lengths must be positive");
    if (!std::isfinite(cx) || !std::isfinite(cy)) fail("principal point must be finite");
    if (static_cast<int>(distortion.size()) != distortion_size(model)) {
        fail("distortion size " + std::to_string(distortion.size()) + " does not match model " +
             to_string(model));
    }
    if (model == CameraModel::kSimpleRadial && fx != fy) fail("simple_radial requires fx == fy");
    for (double k : distortion) {
        if (!std::isfinite(k)) fail("distortion coefficients must be finite");
    }
}

bool CameraIntrinsics::has_distortion() const {
    for (double k : distortion) {
        if (k != 0.0) return true;
    }
    return false;
}

Vec2 distort(const CameraIntrinsics& intrinsics, const Vec2& p) {
    const auto& d = intrinsics.distortion;
    if (d.empty()) {
        return p;
    }
    const double x = p.x();
    const double y = p.y();
    const double r2 = x * x + y * y;
    const double k1 = d[0];
    const double k2 = d.size() > 1 ? d[1] : 0.0;
    const double radial = 1.0 + r2 * (k1 + r2 * k2);
    Vec2 out(x * radial, y * radial);
    if (intrinsics.model == CameraModel::kFullOpen) {
        const double p1 = d[2];
        const double p2 = d[3];
        out.x() += 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x);
        out.y() += p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y;
    }
    return out;
}

namespace {

// 2x2 Jacobian of the distortion map at p.
Eigen::Matrix2d distort_jacobian(const CameraIntrinsics& intrinsics, const Vec2& p) {
    const auto& d = intrinsics.distortion;
    const double x = p.x();
    const double y = p.y();
    const double r2 = x * x + y * y;
    const double k1 = d[0];
    const double k2 = d.size() > 1 ? d[1] : 0.0;
    const double radial = 1.0 + r2 * (k1 + r2 * k2);
    const double dradial_dr2 = k1 + 2.0 * k2 * r2;

    Eigen::Matrix2d J;
    J(0, 0) = radial + x * dradial_dr2 * 2.0 * x;
    J(0, 1) = x * dradial_dr2 * 2.0 * y;
    J(1, 0) = y * dradial_dr2 * 2.0 * x;
    J(1, 1) = radial + y * dradial_dr2 * 2.0 * y;

    if (intrinsics.model == CameraModel::kFullOpen) {
        const double p1 = d[2];
        const double p2 = d[3];
        J(0, 0) += 2.0 * p1 * y + 6.0 * p2 * x;
        J(0, 1) += 2.0 * p1 * x + 2.0 * p2 * y;
        J(1, 0) += 2.0 * p1 * x + 2.0 * p2 * y;
        J(1, 1) += 6.0 * p1 * y + 2.0 * p2 * x;
    }
    return J;
}

constexpr int kUndistortMaxIter = 100;
// Newton target; well below the 1e-10 contract so pixel-scale users keep
// roughly 1e-8 px of headroom.
constexpr double kUndistortTarget = 1e-13;
constexpr double kUndistortFailure = 1e-10;

}  // namespace

GeoResult<Vec2> undistort(const CameraIntrinsics& intrinsics, const Vec2& p_distorted) {
    if (intrinsics.distortion.empty()) {
        return p_distorted;
    }
    Vec2 p = p_distorted;
    for (int iter = 0; iter < kUndistortMaxIter; ++iter) {
        const Vec2 residual = distort(intrinsics, p) - p_distorted;
        if (residual.cwiseAbs().maxCoeff() < kUndistortTarget) {
            return p;
        }
        const Eigen::Matrix2d J = distort_jacobian(intrinsics, p);
        const double det = J.determinant();
        if (std::abs(det) < 1e-15) {
            break;
        }
        p -= J.inverse() * residual;
    }
    if ((distort(intrinsics, p) - p_distorted).cwiseAbs().maxCoeff() < kUndistortFailure) {
        return p;
    }
    return GeoError::kNonConvergence;
}

GeoResult<Pixel> project_pinhole(const CameraIntrinsics& intrinsics, const Pose& pose,
                                 const Vec3& point_world) {
    const Vec3 p_cam = pose.apply(point_world);
    if (p_cam.z() <= 0.0) {
        return GeoError::kBehindCamera;
    }
    const Vec2 ideal(p_cam.x() / p_cam.z(), p_cam.y() / p_cam.z());
    const Vec2 distorted = distort(intrinsics, ideal);
    return Pixel(intrinsics.fx * distorted.x() + intrinsics.cx,
                 intrinsics.fy * distorted.y() + intrinsics.cy);
}

GeoResult<Ray> backproject_pinhole(const CameraIntrinsics& intrinsics, const Pixel& pixel) {
    const Vec2 distorted((pixel.x() - intrinsics.cx) / intrinsics.fx,
                         (pixel.y() - intrinsics.cy) / intrinsics.fy);
    const GeoResult<Vec2> ideal = undistort(intrinsics, distorted);
    if (!ideal) {
        return ideal.error();
    }
    const Vec3 dir(ideal->x(), ideal->y(), 1.0);
    return Ray{Vec3::Zero(), dir.normalized()};
}

}  // namespace aquacal

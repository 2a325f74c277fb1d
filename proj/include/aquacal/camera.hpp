#pragma once

#include <string>
#include <vector>

#include "aquacal/types.hpp"

namespace aquacal {

// Camera models, in increasing order of distortion complexity. Distortion
// coefficient layout per model:
//   Pinhole       []
//   SimpleRadial  [k1]            (fx == fy)
//   Radial        [k1, k2]
//   FullOpen      [k1, k2, p1, p2]
enum class CameraModel {
    kPinhole,
    kSimpleRadial,
    kRadial,
    kFullOpen,
};

std::string to_string(CameraModel model);
CameraModel camera_model_from_string(const std::string& name);
int distortion_size(CameraModel model);

struct CameraIntrinsics {
    CameraModel model = CameraModel::kPinhole;
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    std::vector<double> distortion;

    // Throws CalibrationError(kValidationError) on breach.
    void validate() const;

    bool has_distortion() const;

    static CameraIntrinsics pinhole(double f, double cx, double cy) {
        return CameraIntrinsics{CameraModel::kPinhole, f, f, cx, cy, {}};
    }
};

// Ideal -> distorted normalized image coordinates.
Vec2 distort(const CameraIntrinsics& intrinsics, const Vec2& p);

// Distorted -> ideal normalized coordinates (Newton inverse of distort).
GeoResult<Vec2> undistort(const CameraIntrinsics& intrinsics, const Vec2& p_distorted);

GeoResult<Pixel> project_pinhole(const CameraIntrinsics& intrinsics, const Pose& pose,
                                 const Vec3& point_world);

// Ray through the projection center (camera frame, origin zero, unit
// direction with positive z). Undistortion is applied.
GeoResult<Ray> backproject_pinhole(const CameraIntrinsics& intrinsics, const Pixel& pixel);

}  // namespace aquacal

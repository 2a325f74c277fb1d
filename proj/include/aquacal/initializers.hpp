#pragma once

#include <span>
#include <vector>

#include "aquacal/camera.hpp"
#include "aquacal/types.hpp"

namespace aquacal {

// Normalized DLT homography from >= 4 planar point pairs (target plane ->
// image). Result has unit Frobenius norm and non-negative h33.
Mat3 homography_dlt(std::span<const Vec2> target_xy, std::span<const Vec2> image_uv);

enum class IntrinsicsConstraint {
    kFullK,        // fx, fy, cx, cy
    kSharedFocal,  // fx == fy
};

// Closed-form intrinsics from >= 2 homographies of a planar target, zero
// skew. Throws kDegenerateMotion when the constraint system is rank
// deficient (e.g. homographies related by pure translation) or the
// recovered conic is not positive definite.
CameraIntrinsics zhang_intrinsics(std::span<const Mat3> homographies,
                                  IntrinsicsConstraint constraint);

// Pose of a planar target from its homography and the intrinsics, with
// orthonormalization and cheirality (t.z > 0) enforced.
Pose pose_from_homography(const CameraIntrinsics& intrinsics, const Mat3& H);

// Component-wise median of poses: rotations as axis-angle 3-vectors,
// translations per coordinate. Even counts take the lower median.
Pose median_pose(std::span<const Pose> poses);

}  // namespace aquacal

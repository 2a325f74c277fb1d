#pragma once

#include <optional>

#include "aquacal/camera.hpp"
#include "aquacal/dataset.hpp"
#include "aquacal/report.hpp"
#include "aquacal/types.hpp"

namespace aquacal {

// Relative pose of camera 2 with respect to camera 1 given both absolute
// poses: R12 = R2 R1^T, t12 = t2 - R2 R1^T t1.
Pose relative_pose_per_pair(const Pose& pose1, const Pose& pose2);

struct StereoCalibrationOptions {
    bool refine_intrinsics = false;
    // Overrides the median-of-pairs initialization (e.g. from a previous
    // run's report).
    std::optional<Pose> initial_relative_pose;
};

// Rig extrinsics from synchronized planar-target pairs: per-pair absolute
// poses, median relative pose initialization, joint refinement of camera-1
// poses and the relative pose (optionally the intrinsics). Pairs whose pose
// estimation fails are dropped with a warning in the report metrics.
CalibrationReport calibrate_stereo(const StereoDataset& dataset, const CameraIntrinsics& K1,
                                   const CameraIntrinsics& K2,
                                   const StereoCalibrationOptions& options = {});

}  // namespace aquacal

#pragma once

#include <span>
#include <vector>

#include "aquacal/camera.hpp"
#include "aquacal/dataset.hpp"
#include "aquacal/report.hpp"
#include "aquacal/types.hpp"

namespace aquacal {

// Parameter vector layout used by the refinement stages:
//   Pinhole       [fx, fy, cx, cy]
//   SimpleRadial  [f, cx, cy, k1]
//   Radial        [fx, fy, cx, cy, k1, k2]
//   FullOpen      [fx, fy, cx, cy, k1, k2, p1, p2]
std::vector<double> intrinsics_to_params(const CameraIntrinsics& intrinsics);
CameraIntrinsics intrinsics_from_params(CameraModel model, const double* params);
std::vector<std::string> intrinsics_param_names(CameraModel model);

struct ReprojectionStats {
    double rms = 0.0;
    std::vector<double> per_view_rms;
    std::vector<std::vector<Vec2>> residuals;  // per view, per observation
    int behind_camera_count = 0;
};

ReprojectionStats evaluate_reprojection(const ObservationDataset& dataset,
                                        const CameraIntrinsics& intrinsics,
                                        std::span<const Pose> poses);

// Zhang-style closed-form initialization followed by joint refinement of
// intrinsics, distortion and per-view poses.
CalibrationReport calibrate_camera(const ObservationDataset& dataset, CameraModel model);

}  // namespace aquacal

#pragma once

#include "aquacal/camera.hpp"
#include "aquacal/dataset.hpp"
#include "aquacal/housing.hpp"
#include "aquacal/report.hpp"
#include "aquacal/solver.hpp"
#include "aquacal/types.hpp"

namespace aquacal {

struct HousingEstimationConfig {
    bool optimize_poses = true;
    SolverConfig solver;
};

// Reprojection-style residual measured in a virtual pinhole camera built on
// the back-projected in-water ray: same rotation as the physical camera,
// center at the ray point closest to the projection center, intrinsics
// without distortion. Zero iff the world point lies on the ray's line.
GeoResult<Vec2> virtual_camera_residual(const CameraIntrinsics& intrinsics, const Pose& pose,
                                        const FlatPort& port, const Vec3& point_world,
                                        const Pixel& observed);
GeoResult<Vec2> virtual_camera_residual(const CameraIntrinsics& intrinsics, const Pose& pose,
                                        const DomePort& port, const Vec3& point_world,
                                        const Pixel& observed);

// Coarse decentering initialization: evaluates the housing cost with
// pinhole-PnP poses over a fixed candidate set ({0}, axis-aligned offsets of
// 2/5/10 mm, the configured guess) and returns the best candidate.
Vec3 init_dome_decentering(const ObservationDataset& dataset, const CameraIntrinsics& intrinsics,
                           const DomePort& initial);

// Estimate {normal, distance} of a flat port (or {decentering} of a dome
// port) with fixed, pre-calibrated intrinsics. Glass thickness, refractive
// indices and the dome radius are taken from `initial` and kept constant.
CalibrationReport calibrate_flat_port(const ObservationDataset& dataset,
                                      const CameraIntrinsics& intrinsics, const FlatPort& initial,
                                      const HousingEstimationConfig& config = {});
CalibrationReport calibrate_dome_port(const ObservationDataset& dataset,
                                      const CameraIntrinsics& intrinsics, const DomePort& initial,
                                      const HousingEstimationConfig& config = {});

}  // namespace aquacal

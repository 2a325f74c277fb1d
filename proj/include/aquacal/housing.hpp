#pragma once

#include <variant>

#include "aquacal/camera.hpp"
#include "aquacal/types.hpp"

namespace aquacal {

// Planar window. The normal is stored in the camera frame pointing from the
// camera toward the water (normal.z > 0); `distance` is the distance from
// the projection center to the inner glass plane along the normal.
struct FlatPort {
    Vec3 normal = Vec3::UnitZ();
    double distance = 0.0;     // m, >= 0
    double thickness = 0.01;   // m, > 0
    double mu_air = 1.0;
    double mu_glass = 1.473;
    double mu_water = 1.334;

    void validate() const;
};

// Spherical window. `decentering` is the offset from the projection center
// to the dome sphere center, camera frame. The projection center must lie
// strictly inside the inner sphere surface.
struct DomePort {
    Vec3 decentering = Vec3::Zero();
    double radius = 0.05;      // m, outer sphere
    double thickness = 0.006;  // m, 0 < thickness < radius
    double mu_air = 1.0;
    double mu_glass = 1.473;
    double mu_water = 1.334;

    void validate() const;

    double inner_radius() const { return radius - thickness; }
};

using Housing = std::variant<FlatPort, DomePort>;

// Trace an in-air unit direction (from the projection center) through the
// port. Returns the in-water ray with origin on the outer interface.
GeoResult<Ray> trace_flat(const FlatPort& port, const Vec3& dir_air);
GeoResult<Ray> trace_dome(const DomePort& port, const Vec3& dir_air);

GeoResult<Ray> backproject_flat(const CameraIntrinsics& intrinsics, const FlatPort& port,
                                const Pixel& pixel);
GeoResult<Ray> backproject_dome(const CameraIntrinsics& intrinsics, const DomePort& port,
                                const Pixel& pixel);
GeoResult<Ray> backproject_housing(const CameraIntrinsics& intrinsics, const Housing& housing,
                                   const Pixel& pixel);

// Forward projection of a world point through the port. Solved numerically:
// 1D root find over the incidence angle for the flat port, damped
// Gauss-Newton on pixel coordinates for the dome port.
GeoResult<Pixel> project_flat(const CameraIntrinsics& intrinsics, const FlatPort& port,
                              const Pose& pose, const Vec3& point_world);
GeoResult<Pixel> project_dome(const CameraIntrinsics& intrinsics, const DomePort& port,
                              const Pose& pose, const Vec3& point_world);

}  // namespace aquacal

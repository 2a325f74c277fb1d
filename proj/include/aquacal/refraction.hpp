#pragma once

#include "aquacal/types.hpp"

namespace aquacal {

// Refract a unit direction at an interface between media with refractive
// indices mu1 (incoming side) and mu2. The normal may point to either side
// of the interface; it is flipped internally so that it opposes the
// incident direction. Returns kTotalInternalReflection when no transmitted
// ray exists.
GeoResult<Vec3> refract(const Vec3& incident, const Vec3& normal, double mu1, double mu2);

// Forward intersection of a ray with the plane {X : X . n = offset}.
GeoResult<Vec3> intersect_ray_plane(const Ray& ray, const Vec3& plane_normal,
                                    double plane_offset);

// Nearest forward intersection with a sphere. From inside the sphere this
// is the single exit point.
GeoResult<Vec3> intersect_ray_sphere(const Ray& ray, const Vec3& center, double radius);

}  // namespace aquacal

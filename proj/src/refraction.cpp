#include "aquacal/refraction.hpp"

#include <cmath>

namespace aquacal {

GeoResult<Vec3> refract(const Vec3& incident, const Vec3& normal, double mu1, double mu2) {
    // Orient the normal against the incident direction.
    Vec3 n = normal;
    if (incident.dot(n) > 0.0) {
        n = -n;
    }
    const double r = mu1 / mu2;
    const double c1 = -incident.dot(n);
    const double discriminant = 1.0 - r * r * (1.0 - c1 * c1);
    if (discriminant < 0.0) {
        return GeoError::kTotalInternalReflection;
    }
    const double c2 = std::sqrt(discriminant);
    const Vec3 transmitted = r * incident + (r * c1 - c2) * n;
    return transmitted.normalized();
}

GeoResult<Vec3> intersect_ray_plane(const Ray& ray, const Vec3& plane_normal,
                                    double plane_offset) {
    const double denom = ray.direction.dot(plane_normal);
    if (std::abs(denom) < 1e-12) {
        return GeoError::kParallelRay;
    }
    const double lambda = (plane_offset - ray.origin.dot(plane_normal)) / denom;
    if (lambda <= 0.0) {
        return GeoError::kNoForwardIntersection;
    }
    return ray.at(lambda);
}

GeoResult<Vec3> intersect_ray_sphere(const Ray& ray, const Vec3& center, double radius) {
    // |o + lambda d - c|^2 = radius^2 with |d| = 1.
    const Vec3 oc = ray.origin - center;
    const double b = ray.direction.dot(oc);
    const double c = oc.squaredNorm() - radius * radius;
    const double discriminant = b * b - c;
    if (discriminant < 0.0) {
        return GeoError::kNoIntersection;
    }
    const double sqrt_disc = std::sqrt(discriminant);
    const double lambda_near = -b - sqrt_disc;
    const double lambda_far = -b + sqrt_disc;
    double lambda = lambda_near;
    if (lambda <= 0.0) {
        lambda = lambda_far;
    }
    if (lambda <= 0.0) {
        return GeoError::kNoIntersection;
    }
    return ray.at(lambda);
}

}  // namespace aquacal

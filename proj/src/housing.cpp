#include "aquacal/housing.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "aquacal/refraction.hpp"

namespace aquacal {

namespace {

void fail_validation(const std::string& msg) {
    throw CalibrationError(CalibrationError::Code::kValidationError, msg);
}

// Project a camera-frame direction (z > 0) to a pixel.
GeoResult<Pixel> project_direction(const CameraIntrinsics& intrinsics, const Vec3& dir) {
    if (dir.z() <= 0.0) {
        return GeoError::kBehindCamera;
    }
    const Vec2 ideal(dir.x() / dir.z(), dir.y() / dir.z());
    const Vec2 distorted = distort(intrinsics, ideal);
    return Pixel(intrinsics.fx * distorted.x() + intrinsics.cx,
                 intrinsics.fy * distorted.y() + intrinsics.cy);
}

}  // namespace

void FlatPort::validate() const {
    if (std::abs(normal.norm() - 1.0) > 1e-12) fail_validation("flat port: normal must be unit");
    if (!(normal.z() > 0.0)) fail_validation("flat port: normal.z must be positive");
    if (!(distance >= 0.0)) fail_validation("flat port: distance must be >= 0");
    if (!(thickness > 0.0)) fail_validation("flat port: thickness must be positive");
    if (!(mu_air > 0.0) || !(mu_glass > 0.0) || !(mu_water > 0.0)) {
        fail_validation("flat port: refractive indices must be positive");
    }
}

void DomePort::validate() const {
    if (!(radius > 0.0)) fail_validation("dome port: radius must be positive");
    if (!(thickness > 0.0) || !(thickness < radius)) {
        fail_validation("dome port: need 0 < thickness < radius");
    }
    if (!(decentering.norm() < radius - thickness)) {
        fail_validation("dome port: camera must lie strictly inside the inner sphere");
    }
    if (!(mu_air > 0.0) || !(mu_glass > 0.0) || !(mu_water > 0.0)) {
        fail_validation("dome port: refractive indices must be positive");
    }
}

GeoResult<Ray> trace_flat(const FlatPort& port, const Vec3& dir_air) {
    if (!(dir_air.dot(port.normal) > 0.0)) {
        return GeoError::kNoForwardIntersection;
    }
    const Ray air_ray{Vec3::Zero(), dir_air};
    // distance == 0 puts the inner interface through the projection center;
    // the ray refracts right at the origin.
    Vec3 inner_hit = Vec3::Zero();
    if (port.distance > 0.0) {
        const GeoResult<Vec3> hit = intersect_ray_plane(air_ray, port.normal, port.distance);
        if (!hit) return hit.error();
        inner_hit = *hit;
    }

    const GeoResult<Vec3> dir_glass = refract(dir_air, port.normal, port.mu_air, port.mu_glass);
    if (!dir_glass) return dir_glass.error();

    const Ray glass_ray{inner_hit, *dir_glass};
    const GeoResult<Vec3> hit_outer =
        intersect_ray_plane(glass_ray, port.normal, port.distance + port.thickness);
    if (!hit_outer) return hit_outer.error();

    const GeoResult<Vec3> dir_water = refract(*dir_glass, port.normal, port.mu_glass, port.mu_water);
    if (!dir_water) return dir_water.error();

    return Ray{*hit_outer, *dir_water};
}

GeoResult<Ray> trace_dome(const DomePort& port, const Vec3& dir_air) {
    const Ray air_ray{Vec3::Zero(), dir_air};
    const GeoResult<Vec3> hit_inner =
        intersect_ray_sphere(air_ray, port.decentering, port.inner_radius());
    if (!hit_inner) return hit_inner.error();

    const Vec3 n_inner = (*hit_inner - port.decentering).normalized();
    const GeoResult<Vec3> dir_glass = refract(dir_air, n_inner, port.mu_air, port.mu_glass);
    if (!dir_glass) return dir_glass.error();

    const Ray glass_ray{*hit_inner, *dir_glass};
    const GeoResult<Vec3> hit_outer = intersect_ray_sphere(glass_ray, port.decentering, port.radius);
    if (!hit_outer) return hit_outer.error();

    const Vec3 n_outer = (*hit_outer - port.decentering).normalized();
    const GeoResult<Vec3> dir_water = refract(*dir_glass, n_outer, port.mu_glass, port.mu_water);
    if (!dir_water) return dir_water.error();

    return Ray{*hit_outer, *dir_water};
}

GeoResult<Ray> backproject_flat(const CameraIntrinsics& intrinsics, const FlatPort& port,
                                const Pixel& pixel) {
    const GeoResult<Ray> air = backproject_pinhole(intrinsics, pixel);
    if (!air) return air.error();
    return trace_flat(port, air->direction);
}

GeoResult<Ray> backproject_dome(const CameraIntrinsics& intrinsics, const DomePort& port,
                                const Pixel& pixel) {
    const GeoResult<Ray> air = backproject_pinhole(intrinsics, pixel);
    if (!air) return air.error();
    return trace_dome(port, air->direction);
}

GeoResult<Ray> backproject_housing(const CameraIntrinsics& intrinsics, const Housing& housing,
                                   const Pixel& pixel) {
    if (const auto* flat = std::get_if<FlatPort>(&housing)) {
        return backproject_flat(intrinsics, *flat, pixel);
    }
    return backproject_dome(intrinsics, std::get<DomePort>(housing), pixel);
}

namespace {

constexpr int kProjectMaxIter = 100;

// Residual of the flat-port forward problem, parameterized by the in-air
// incidence angle theta in the plane of incidence. Plane coordinates:
// first axis along the port normal, second along the lateral unit vector
// pointing toward the target. Returns theta_w - angle(X - exit point),
// which is strictly increasing in theta.
double flat_angle_residual(const FlatPort& port, double axial, double lateral, double theta) {
    const double sin_a = std::sin(theta);
    const double sin_g = sin_a * port.mu_air / port.mu_glass;
    const double sin_w = sin_a * port.mu_air / port.mu_water;
    const double theta_g = std::asin(sin_g);
    const double theta_w = std::asin(sin_w);

    const double exit_axial = port.distance + port.thickness;
    const double exit_lateral =
        port.distance * std::tan(theta) + port.thickness * std::tan(theta_g);

    return theta_w - std::atan2(lateral - exit_lateral, axial - exit_axial);
}

}  // namespace

GeoResult<Pixel> project_flat(const CameraIntrinsics& intrinsics, const FlatPort& port,
                              const Pose& pose, const Vec3& point_world) {
    const Vec3 p_cam = pose.apply(point_world);
    const double axial = p_cam.dot(port.normal);
    if (axial <= port.distance + port.thickness) {
        return GeoError::kBehindInterface;
    }

    const Vec3 lateral_vec = p_cam - axial * port.normal;
    const double lateral = lateral_vec.norm();
    if (lateral < 1e-14) {
        // On the port axis: the ray along the normal is undeviated.
        return project_direction(intrinsics, port.normal);
    }
    const Vec3 lateral_dir = lateral_vec / lateral;

    // Bracket the incidence angle; keep clear of total internal reflection.
    const double sin_cap =
        std::min({1.0, port.mu_glass / port.mu_air, port.mu_water / port.mu_air});
    double lo = 0.0;
    double hi = std::asin(sin_cap) - 1e-9;
    double f_lo = flat_angle_residual(port, axial, lateral, lo);
    if (f_lo > 0.0) {
        return GeoError::kNonConvergence;  // not reachable for lateral > 0
    }

    // Safeguarded Newton with bisection fallback.
    const double theta_cap = hi;
    double theta = std::atan2(lateral, axial);  // pinhole guess
    theta = std::clamp(theta, lo, hi);
    double f = flat_angle_residual(port, axial, lateral, theta);
    bool converged = false;
    for (int iter = 0; iter < kProjectMaxIter; ++iter) {
        if (std::abs(f) < 1e-12) {
            converged = true;
            break;
        }
        if (f > 0.0) {
            hi = theta;
        } else {
            lo = theta;
        }
        if (hi - lo < 1e-15) {
            converged = true;
            theta = 0.5 * (lo + hi);
            break;
        }
        const double h = 1e-7;
        double df;
        if (theta + h <= theta_cap) {
            df = (flat_angle_residual(port, axial, lateral, theta + h) - f) / h;
        } else {
            df = (f - flat_angle_residual(port, axial, lateral, theta - h)) / h;
        }
        double next = theta - f / df;
        if (!(df > 0.0) || !(next > lo) || !(next < hi)) {
            next = 0.5 * (lo + hi);
        }
        theta = next;
        f = flat_angle_residual(port, axial, lateral, theta);
    }
    if (!converged && std::abs(f) > 1e-10) {
        return GeoError::kNonConvergence;
    }

    const Vec3 dir_air = std::cos(theta) * port.normal + std::sin(theta) * lateral_dir;
    return project_direction(intrinsics, dir_air);
}

namespace {

// Alignment residual for the dome forward problem: difference between the
// traced in-water direction and the unit vector from the ray origin to the
// target, as a 3-vector. Zero iff the ray points at the target.
bool dome_alignment_residual(const CameraIntrinsics& intrinsics, const DomePort& port,
                             const Vec3& p_cam, const Pixel& pixel, Vec3* residual) {
    const GeoResult<Ray> water = backproject_dome(intrinsics, port, pixel);
    if (!water) return false;
    const Vec3 to_target = p_cam - water->origin;
    const double dist = to_target.norm();
    if (dist < 1e-12) return false;
    *residual = to_target / dist - water->direction;
    return true;
}

}  // namespace

GeoResult<Pixel> project_dome(const CameraIntrinsics& intrinsics, const DomePort& port,
                              const Pose& pose, const Vec3& point_world) {
    const Vec3 p_cam = pose.apply(point_world);
    if ((p_cam - port.decentering).norm() <= port.radius) {
        return GeoError::kBehindInterface;
    }
    if (p_cam.z() <= 0.0) {
        return GeoError::kBehindCamera;
    }

    const GeoResult<Pixel> init = project_direction(intrinsics, p_cam);
    if (!init) return init.error();

    auto run_newton = [&](Pixel x, Pixel* solution) -> bool {
        Vec3 r;
        if (!dome_alignment_residual(intrinsics, port, p_cam, x, &r)) {
            return false;
        }
        double r_norm = r.cwiseAbs().maxCoeff();
        const double step = 1e-6;  // px, for the numeric Jacobian
        for (int iter = 0; iter < kProjectMaxIter; ++iter) {
            if (r_norm < 1e-13) {
                *solution = x;
                return true;
            }
            Eigen::Matrix<double, 3, 2> J;
            for (int axis = 0; axis < 2; ++axis) {
                Pixel xp = x;
                Pixel xm = x;
                xp[axis] += step;
                xm[axis] -= step;
                Vec3 rp, rm;
                if (!dome_alignment_residual(intrinsics, port, p_cam, xp, &rp) ||
                    !dome_alignment_residual(intrinsics, port, p_cam, xm, &rm)) {
                    return false;
                }
                J.col(axis) = (rp - rm) / (2.0 * step);
            }
            const Eigen::Matrix2d JtJ = J.transpose() * J;
            const Vec2 g = J.transpose() * r;
            double lambda = 1e-14;
            bool improved = false;
            for (int attempt = 0; attempt < 40; ++attempt) {
                const Eigen::Matrix2d damped =
                    JtJ + lambda * Eigen::Matrix2d::Identity() * std::max(JtJ.trace(), 1e-300);
                const Vec2 delta = damped.ldlt().solve(-g);
                const Pixel x_new = x + delta;
                Vec3 r_new;
                if (dome_alignment_residual(intrinsics, port, p_cam, x_new, &r_new)) {
                    const double r_new_norm = r_new.cwiseAbs().maxCoeff();
                    if (r_new_norm < r_norm) {
                        x = x_new;
                        r = r_new;
                        r_norm = r_new_norm;
                        improved = true;
                        break;
                    }
                }
                lambda *= 100.0;
            }
            if (!improved) {
                // Stalled: accept only if already at numerical noise level.
                if (r_norm < 5e-12) {
                    *solution = x;
                    return true;
                }
                return false;
            }
        }
        if (r_norm < 5e-12) {
            *solution = x;
            return true;
        }
        return false;
    };

    Pixel solution;
    if (run_newton(*init, &solution)) {
        return solution;
    }

    // Multi-start fallback on a coarse grid around the pinhole guess.
    const double spread = 25.0;  // px
    double best_norm = std::numeric_limits<double>::infinity();
    Pixel best = *init;
    for (int i = -2; i <= 2; ++i) {
        for (int j = -2; j <= 2; ++j) {
            const Pixel candidate = *init + Pixel(i * spread, j * spread);
            Vec3 r;
            if (dome_alignment_residual(intrinsics, port, p_cam, candidate, &r)) {
                const double n = r.cwiseAbs().maxCoeff();
                if (n < best_norm) {
                    best_norm = n;
                    best = candidate;
                }
            }
        }
    }
    if (std::isfinite(best_norm) && run_newton(best, &solution)) {
        return solution;
    }
    return GeoError::kNonConvergence;
}

}  // namespace aquacal

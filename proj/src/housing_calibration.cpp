#include "aquacal/housing_calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aquacal/initializers.hpp"
#include "aquacal/so3.hpp"
#include "aquacal/solver.hpp"

namespace aquacal {

namespace {

using Code = CalibrationError::Code;

// Pixel residual in the virtual camera attached to an in-water ray:
// observed (a point of the ray) minus predicted (the world point).
bool virtual_residual_for_ray(const CameraIntrinsics& intrinsics, const Ray& water,
                              const Vec3& point_cam, Vec2* residual) {
    // Virtual center: point of the ray line closest to the projection center.
    const Vec3 center = water.origin - water.origin.dot(water.direction) * water.direction;

    const Vec3 q_point = point_cam - center;
    const Vec3 q_ray = water.origin + water.direction - center;
    if (q_point.z() <= 1e-12 || q_ray.z() <= 1e-12) {
        return false;
    }
    const double fx = intrinsics.fx;
    const double fy = intrinsics.fy;
    (*residual)[0] = fx * (q_ray.x() / q_ray.z() - q_point.x() / q_point.z());
    (*residual)[1] = fy * (q_ray.y() / q_ray.z() - q_point.y() / q_point.z());
    return true;
}

// Pinhole pose initialization: undistort the observations, then use the
// planar homography decomposition. Refraction is ignored here; the joint
// refinement absorbs the resulting bias.
std::vector<Pose> pinhole_pnp_poses(const ObservationDataset& dataset,
                                    const CameraIntrinsics& intrinsics) {
    std::vector<Pose> poses;
    poses.reserve(dataset.views.size());
    const CameraIntrinsics ideal{CameraModel::kPinhole, intrinsics.fx, intrinsics.fy,
                                 intrinsics.cx, intrinsics.cy, {}};
    for (const View& view : dataset.views) {
        std::vector<Vec2> target_xy, image_uv;
        target_xy.reserve(view.observations.size());
        image_uv.reserve(view.observations.size());
        for (const Observation& obs : view.observations) {
            target_xy.emplace_back(obs.point.x(), obs.point.y());
            Vec2 normalized((obs.pixel.x() - intrinsics.cx) / intrinsics.fx,
                            (obs.pixel.y() - intrinsics.cy) / intrinsics.fy);
            const GeoResult<Vec2> und = undistort(intrinsics, normalized);
            if (!und) {
                throw CalibrationError(Code::kNonConvergence,
                                       "failed to undistort observation during pose init");
            }
            image_uv.emplace_back(intrinsics.fx * und->x() + intrinsics.cx,
                                  intrinsics.fy * und->y() + intrinsics.cy);
        }
        poses.push_back(pose_from_homography(ideal, homography_dlt(target_xy, image_uv)));
    }
    return poses;
}

// In-air unit directions for every observation; fixed during housing
// refinement since the intrinsics are constant.
std::vector<std::vector<Vec3>> air_directions(const ObservationDataset& dataset,
                                              const CameraIntrinsics& intrinsics) {
    std::vector<std::vector<Vec3>> dirs(dataset.views.size());
    for (size_t i = 0; i < dataset.views.size(); ++i) {
        dirs[i].reserve(dataset.views[i].observations.size());
        for (const Observation& obs : dataset.views[i].observations) {
            const GeoResult<Ray> ray = backproject_pinhole(intrinsics, obs.pixel);
            if (!ray) {
                throw CalibrationError(Code::kNonConvergence,
                                       "failed to back-project observation");
            }
            dirs[i].push_back(ray->direction);
        }
    }
    return dirs;
}

GeoResult<Ray> trace_port(const FlatPort& port, const Vec3& dir) { return trace_flat(port, dir); }
GeoResult<Ray> trace_port(const DomePort& port, const Vec3& dir) { return trace_dome(port, dir); }

struct HousingSolveOutput {
    std::vector<double> housing_params;  // layout depends on port
    std::vector<Pose> poses;
    std::vector<std::vector<double>> housing_std_devs;
    double rms = 0.0;
    std::vector<double> per_view_rms;
    int iterations = 0;
    double initial_cost = 0.0;
    double final_cost = 0.0;
    int housing_tangent_dim = 0;
    Eigen::MatrixXd hessian;  // final tangent-space J^T J
};

// Marginal uncertainty of one housing tangent coordinate per pixel of
// observation noise, with the poses marginalized out. Near-parallel target
// planes leave the interface distance unconstrained, which shows up as a
// huge value here regardless of the noise level.
double marginal_sigma_per_px(const HousingSolveOutput& out, int coord) {
    const int nh = out.housing_tangent_dim;
    const int n = static_cast<int>(out.hessian.rows());
    if (n < nh || nh == 0) return std::numeric_limits<double>::infinity();
    Eigen::MatrixXd schur;
    if (n == nh) {
        schur = out.hessian;
    } else {
        const Eigen::MatrixXd h_hh = out.hessian.topLeftCorner(nh, nh);
        const Eigen::MatrixXd h_hp = out.hessian.topRightCorner(nh, n - nh);
        const Eigen::MatrixXd h_pp = out.hessian.bottomRightCorner(n - nh, n - nh);
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(h_pp);
        schur = h_hh - h_hp * ldlt.solve(h_hp.transpose());
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(schur);
    if (ldlt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    Eigen::VectorXd e = Eigen::VectorXd::Zero(nh);
    e(coord) = 1.0;
    const double variance = e.dot(ldlt.solve(e));
    return variance > 0.0 ? std::sqrt(variance) : std::numeric_limits<double>::infinity();
}

GeoResult<Pixel> project_port(const CameraIntrinsics& intrinsics, const FlatPort& port,
                              const Pose& pose, const Vec3& point) {
    return project_flat(intrinsics, port, pose, point);
}
GeoResult<Pixel> project_port(const CameraIntrinsics& intrinsics, const DomePort& port,
                              const Pose& pose, const Vec3& point) {
    return project_dome(intrinsics, port, pose, point);
}

// Shared solve driver, two stages. The bulk of the convergence runs on the
// virtual-camera error, which avoids the iterative refractive projection.
// That error measures the world point against a ray built from the noisy
// observation, so its optimum carries a noise-squared bias; a short final
// refinement on exact refractive reprojection residuals removes it.
template <typename Port>
HousingSolveOutput solve_housing(const ObservationDataset& dataset,
                                 const CameraIntrinsics& intrinsics,
                                 const std::vector<ParameterBlock>& housing_blocks,
                                 const std::function<Port(const double* const*)>& make_port,
                                 const std::vector<Pose>& init_poses,
                                 const HousingEstimationConfig& config) {
    const auto dirs = air_directions(dataset, intrinsics);

    LeastSquaresProblem problem;
    std::vector<int> housing_ids;
    for (const ParameterBlock& b : housing_blocks) {
        housing_ids.push_back(problem.add_block(b));
    }
    const int n_housing = static_cast<int>(housing_ids.size());

    std::vector<int> rot_ids, trans_ids;
    for (const Pose& pose : init_poses) {
        ParameterBlock rot;
        rot.manifold = Manifold::kRotationAxisAngle;
        const Vec3 w = so3_log(pose.R);
        rot.values = {w.x(), w.y(), w.z()};
        if (!config.optimize_poses) rot.constant_mask.assign(3, 1);
        rot_ids.push_back(problem.add_block(rot));
        ParameterBlock trans;
        trans.values = {pose.t.x(), pose.t.y(), pose.t.z()};
        if (!config.optimize_poses) trans.constant_mask.assign(3, 1);
        trans_ids.push_back(problem.add_block(trans));
    }

    for (size_t i = 0; i < dataset.views.size(); ++i) {
        for (size_t j = 0; j < dataset.views[i].observations.size(); ++j) {
            const Vec3 point = dataset.views[i].observations[j].point;
            const Vec3 air_dir = dirs[i][j];
            std::vector<int> ids = housing_ids;
            ids.push_back(rot_ids[i]);
            ids.push_back(trans_ids[i]);
            problem.add_residual(
                std::move(ids), 2,
                [&make_port, &intrinsics, n_housing, point, air_dir](
                    const double* const* blocks, double* residual) {
                    const Port port = make_port(blocks);
                    const GeoResult<Ray> water = trace_port(port, air_dir);
                    if (!water) return false;
                    const Pose pose{
                        so3_exp(Vec3(blocks[n_housing][0], blocks[n_housing][1],
                                     blocks[n_housing][2])),
                        Vec3(blocks[n_housing + 1][0], blocks[n_housing + 1][1],
                             blocks[n_housing + 1][2])};
                    Vec2 r;
                    if (!virtual_residual_for_ray(intrinsics, *water, pose.apply(point), &r)) {
                        return false;
                    }
                    residual[0] = r.x();
                    residual[1] = r.y();
                    return true;
                });
        }
    }

    const SolveResult bulk = solve_lm(problem, config.solver);

    // Final refinement on exact reprojection residuals, warm-started at the
    // virtual-camera optimum.
    LeastSquaresProblem polish;
    for (int id : housing_ids) {
        ParameterBlock b = problem.block(id);
        polish.add_block(b);
    }
    for (size_t i = 0; i < init_poses.size(); ++i) {
        polish.add_block(problem.block(rot_ids[i]));
        polish.add_block(problem.block(trans_ids[i]));
    }
    for (size_t i = 0; i < dataset.views.size(); ++i) {
        for (size_t j = 0; j < dataset.views[i].observations.size(); ++j) {
            const Vec3 point = dataset.views[i].observations[j].point;
            const Pixel observed = dataset.views[i].observations[j].pixel;
            std::vector<int> ids = housing_ids;
            ids.push_back(rot_ids[i]);
            ids.push_back(trans_ids[i]);
            polish.add_residual(
                std::move(ids), 2,
                [&make_port, &intrinsics, n_housing, point, observed](
                    const double* const* blocks, double* residual) {
                    const Port port = make_port(blocks);
                    const Pose pose{
                        so3_exp(Vec3(blocks[n_housing][0], blocks[n_housing][1],
                                     blocks[n_housing][2])),
                        Vec3(blocks[n_housing + 1][0], blocks[n_housing + 1][1],
                             blocks[n_housing + 1][2])};
                    const GeoResult<Pixel> projected =
                        project_port(intrinsics, port, pose, point);
                    if (!projected) return false;
                    residual[0] = observed.x() - projected->x();
                    residual[1] = observed.y() - projected->y();
                    return true;
                });
        }
    }
    SolverConfig polish_config = config.solver;
    polish_config.max_iterations = 25;
    const SolveResult solution = solve_lm(polish, polish_config);

    HousingSolveOutput out;
    out.iterations = bulk.iterations + solution.iterations;
    out.initial_cost = bulk.initial_cost;
    out.final_cost = solution.final_cost;
    for (const ParameterBlock& b : housing_blocks) out.housing_tangent_dim += b.tangent_size();
    out.hessian = solution.hessian;
    for (int id = 0; id < n_housing; ++id) {
        for (double v : solution.parameters[id]) out.housing_params.push_back(v);
        out.housing_std_devs.push_back(solution.std_devs[id]);
    }
    std::vector<const double*> housing_ptrs;
    for (int id = 0; id < n_housing; ++id) housing_ptrs.push_back(solution.parameters[id].data());
    const Port final_port = make_port(housing_ptrs.data());

    double total_sq = 0.0;
    int total_count = 0;
    for (size_t i = 0; i < dataset.views.size(); ++i) {
        const int rot_id = n_housing + 2 * static_cast<int>(i);
        const int trans_id = rot_id + 1;
        const Vec3 w(solution.parameters[rot_id][0], solution.parameters[rot_id][1],
                     solution.parameters[rot_id][2]);
        const Vec3 t(solution.parameters[trans_id][0], solution.parameters[trans_id][1],
                     solution.parameters[trans_id][2]);
        const Pose pose{so3_exp(w), t};
        out.poses.push_back(pose);

        double view_sq = 0.0;
        int view_count = 0;
        for (size_t j = 0; j < dataset.views[i].observations.size(); ++j) {
            const GeoResult<Ray> water = trace_port(final_port, dirs[i][j]);
            if (!water) continue;
            Vec2 r;
            if (!virtual_residual_for_ray(intrinsics, *water,
                                          pose.apply(dataset.views[i].observations[j].point),
                                          &r)) {
                continue;
            }
            view_sq += r.squaredNorm();
            ++view_count;
        }
        out.per_view_rms.push_back(view_count > 0 ? std::sqrt(view_sq / view_count) : 0.0);
        total_sq += view_sq;
        total_count += view_count;
    }
    out.rms = total_count > 0 ? std::sqrt(total_sq / total_count) : 0.0;
    return out;
}

}  // namespace

GeoResult<Vec2> virtual_camera_residual(const CameraIntrinsics& intrinsics, const Pose& pose,
                                        const FlatPort& port, const Vec3& point_world,
                                        const Pixel& observed) {
    const GeoResult<Ray> water = backproject_flat(intrinsics, port, observed);
    if (!water) return water.error();
    Vec2 r;
    if (!virtual_residual_for_ray(intrinsics, *water, pose.apply(point_world), &r)) {
        return GeoError::kBehindCamera;
    }
    return r;
}

GeoResult<Vec2> virtual_camera_residual(const CameraIntrinsics& intrinsics, const Pose& pose,
                                        const DomePort& port, const Vec3& point_world,
                                        const Pixel& observed) {
    const GeoResult<Ray> water = backproject_dome(intrinsics, port, observed);
    if (!water) return water.error();
    Vec2 r;
    if (!virtual_residual_for_ray(intrinsics, *water, pose.apply(point_world), &r)) {
        return GeoError::kBehindCamera;
    }
    return r;
}

Vec3 init_dome_decentering(const ObservationDataset& dataset, const CameraIntrinsics& intrinsics,
                           const DomePort& initial) {
    // Score on a handful of views; ranking is all that matters here.
    ObservationDataset subset;
    subset.target = dataset.target;
    subset.image_size = dataset.image_size;
    const size_t n_score_views = std::min<size_t>(dataset.views.size(), 6);
    subset.views.assign(dataset.views.begin(), dataset.views.begin() + n_score_views);

    const std::vector<Pose> pnp_poses = pinhole_pnp_poses(subset, intrinsics);
    const auto dirs = air_directions(subset, intrinsics);

    std::vector<Vec3> candidates = {Vec3::Zero()};
    for (double offset : {0.002, 0.005, 0.010}) {
        for (int axis = 0; axis < 3; ++axis) {
            Vec3 c = Vec3::Zero();
            c[axis] = offset;
            candidates.push_back(c);
            candidates.push_back(-c);
        }
    }
    candidates.push_back(initial.decentering);

    // The pinhole poses absorb much of the refraction, which would bias the
    // ranking toward zero decentering; each candidate is scored after a short
    // poses-only refinement with the candidate frozen.
    const double kFailurePenalty = 1e6;
    double best_cost = std::numeric_limits<double>::infinity();
    Vec3 best = Vec3::Zero();
    for (const Vec3& candidate : candidates) {
        DomePort port = initial;
        port.decentering = candidate;
        if (!(candidate.norm() < port.inner_radius())) continue;

        LeastSquaresProblem problem;
        std::vector<int> rot_ids, trans_ids;
        for (const Pose& pose : pnp_poses) {
            ParameterBlock rot;
            rot.manifold = Manifold::kRotationAxisAngle;
            const Vec3 w = so3_log(pose.R);
            rot.values = {w.x(), w.y(), w.z()};
            rot_ids.push_back(problem.add_block(rot));
            ParameterBlock trans;
            trans.values = {pose.t.x(), pose.t.y(), pose.t.z()};
            trans_ids.push_back(problem.add_block(trans));
        }
        int failed_traces = 0;
        for (size_t i = 0; i < subset.views.size(); ++i) {
            for (size_t j = 0; j < subset.views[i].observations.size(); ++j) {
                const GeoResult<Ray> water = trace_dome(port, dirs[i][j]);
                if (!water) {
                    ++failed_traces;
                    continue;
                }
                const Vec3 point = subset.views[i].observations[j].point;
                const Ray water_ray = *water;
                problem.add_residual(
                    {rot_ids[i], trans_ids[i]}, 2,
                    [&intrinsics, water_ray, point](const double* const* blocks,
                                                    double* residual) {
                        const Pose pose{so3_exp(Vec3(blocks[0][0], blocks[0][1], blocks[0][2])),
                                        Vec3(blocks[1][0], blocks[1][1], blocks[1][2])};
                        Vec2 r;
                        if (!virtual_residual_for_ray(intrinsics, water_ray, pose.apply(point),
                                                      &r)) {
                            return false;
                        }
                        residual[0] = r.x();
                        residual[1] = r.y();
                        return true;
                    });
            }
        }
        SolverConfig config;
        config.max_iterations = 15;
        double cost;
        try {
            cost = solve_lm(problem, config).final_cost;
        } catch (const CalibrationError&) {
            continue;
        }
        int invalid = 0;
        (void)problem.evaluate_cost(&invalid);
        cost += (invalid + failed_traces) * kFailurePenalty;
        if (cost < best_cost) {
            best_cost = cost;
            best = candidate;
        }
    }
    return best;
}

CalibrationReport calibrate_flat_port(const ObservationDataset& dataset,
                                      const CameraIntrinsics& intrinsics, const FlatPort& initial,
                                      const HousingEstimationConfig& config) {
    dataset.validate();
    intrinsics.validate();
    initial.validate();
    if (dataset.target.type != TargetInfo::Type::kCheckerboard) {
        throw CalibrationError(Code::kValidationError,
                               "housing calibration requires a planar checkerboard target");
    }

    const std::vector<Pose> init_poses = pinhole_pnp_poses(dataset, intrinsics);

    ParameterBlock normal_block;
    normal_block.manifold = Manifold::kUnitVector;
    normal_block.values = {initial.normal.x(), initial.normal.y(), initial.normal.z()};
    ParameterBlock distance_block;
    distance_block.values = {initial.distance};
    distance_block.lower_bounds = {0.0};

    const double thickness = initial.thickness;
    const double mu_air = initial.mu_air;
    const double mu_glass = initial.mu_glass;
    const double mu_water = initial.mu_water;
    std::function<FlatPort(const double* const*)> make_port =
        [thickness, mu_air, mu_glass, mu_water](const double* const* blocks) {
            FlatPort port;
            port.normal = Vec3(blocks[0][0], blocks[0][1], blocks[0][2]);
            port.distance = blocks[1][0];
            port.thickness = thickness;
            port.mu_air = mu_air;
            port.mu_glass = mu_glass;
            port.mu_water = mu_water;
            return port;
        };

    const HousingSolveOutput out =
        solve_housing<FlatPort>(dataset, intrinsics, {normal_block, distance_block}, make_port,
                                init_poses, config);

    // Tangent layout: normal (2 dof), then distance. With every target plane
    // near-parallel to the interface the distance is unobservable.
    if (config.optimize_poses && marginal_sigma_per_px(out, 2) > 0.05) {
        throw CalibrationError(Code::kDegenerateGeometry,
                               "interface distance is unobservable; target planes are "
                               "near-parallel to the interface");
    }

    FlatPort estimated = initial;
    estimated.normal =
        Vec3(out.housing_params[0], out.housing_params[1], out.housing_params[2]).normalized();
    estimated.distance = out.housing_params[3];

    HousingSection section;
    section.port = estimated;
    section.initial = initial;
    for (size_t i = 0; i < out.poses.size(); ++i) {
        section.poses.push_back(PoseEntry::from_pose(dataset.views[i].id, out.poses[i]));
    }
    section.rms_px = out.rms;
    section.per_view_rms_px = out.per_view_rms;
    section.std_devs["normal_x"] = out.housing_std_devs[0][0];
    section.std_devs["normal_y"] = out.housing_std_devs[0][1];
    section.std_devs["normal_z"] = out.housing_std_devs[0][2];
    section.std_devs["distance"] = out.housing_std_devs[1][0];

    const double cos_angle = std::clamp(estimated.normal.dot(initial.normal), -1.0, 1.0);
    section.metrics["angle_from_initial_deg"] = std::acos(cos_angle) * 180.0 / M_PI;
    section.metrics["distance_from_initial_m"] = std::abs(estimated.distance - initial.distance);
    section.metrics["iterations"] = out.iterations;
    section.metrics["initial_cost"] = out.initial_cost;
    section.metrics["final_cost"] = out.final_cost;

    CalibrationReport report;
    report.housing = std::move(section);
    return report;
}

CalibrationReport calibrate_dome_port(const ObservationDataset& dataset,
                                      const CameraIntrinsics& intrinsics, const DomePort& initial,
                                      const HousingEstimationConfig& config) {
    dataset.validate();
    intrinsics.validate();
    initial.validate();
    if (dataset.target.type != TargetInfo::Type::kCheckerboard) {
        throw CalibrationError(Code::kValidationError,
                               "housing calibration requires a planar checkerboard target");
    }

    const std::vector<Pose> init_poses = pinhole_pnp_poses(dataset, intrinsics);
    const Vec3 init_decentering = init_dome_decentering(dataset, intrinsics, initial);

    ParameterBlock decentering_block;
    decentering_block.values = {init_decentering.x(), init_decentering.y(), init_decentering.z()};

    const double radius = initial.radius;
    const double thickness = initial.thickness;
    const double mu_air = initial.mu_air;
    const double mu_glass = initial.mu_glass;
    const double mu_water = initial.mu_water;
    std::function<DomePort(const double* const*)> make_port =
        [radius, thickness, mu_air, mu_glass, mu_water](const double* const* blocks) {
            DomePort port;
            port.decentering = Vec3(blocks[0][0], blocks[0][1], blocks[0][2]);
            port.radius = radius;
            port.thickness = thickness;
            port.mu_air = mu_air;
            port.mu_glass = mu_glass;
            port.mu_water = mu_water;
            return port;
        };

    const HousingSolveOutput out = solve_housing<DomePort>(
        dataset, intrinsics, {decentering_block}, make_port, init_poses, config);

    DomePort estimated = initial;
    estimated.decentering = Vec3(out.housing_params[0], out.housing_params[1],
                                 out.housing_params[2]);

    HousingSection section;
    section.port = estimated;
    section.initial = initial;
    for (size_t i = 0; i < out.poses.size(); ++i) {
        section.poses.push_back(PoseEntry::from_pose(dataset.views[i].id, out.poses[i]));
    }
    section.rms_px = out.rms;
    section.per_view_rms_px = out.per_view_rms;
    section.std_devs["decentering_x"] = out.housing_std_devs[0][0];
    section.std_devs["decentering_y"] = out.housing_std_devs[0][1];
    section.std_devs["decentering_z"] = out.housing_std_devs[0][2];
    section.metrics["shift_from_initial_m"] =
        (estimated.decentering - initial.decentering).norm();
    section.metrics["iterations"] = out.iterations;
    section.metrics["initial_cost"] = out.initial_cost;
    section.metrics["final_cost"] = out.final_cost;

    CalibrationReport report;
    report.housing = std::move(section);
    return report;
}

}  // namespace aquacal

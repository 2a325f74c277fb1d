#include "aquacal/camera_calibration.hpp"

#include <cmath>

#include "aquacal/initializers.hpp"
#include "aquacal/so3.hpp"
#include "aquacal/solver.hpp"

namespace aquacal {

namespace {

using Code = CalibrationError::Code;

}  // namespace

std::vector<double> intrinsics_to_params(const CameraIntrinsics& intrinsics) {
    std::vector<double> p;
    if (intrinsics.model == CameraModel::kSimpleRadial) {
        p = {intrinsics.fx, intrinsics.cx, intrinsics.cy};
    } else {
        p = {intrinsics.fx, intrinsics.fy, intrinsics.cx, intrinsics.cy};
    }
    p.insert(p.end(), intrinsics.distortion.begin(), intrinsics.distortion.end());
    return p;
}

CameraIntrinsics intrinsics_from_params(CameraModel model, const double* params) {
    CameraIntrinsics out;
    out.model = model;
    int k = 0;
    if (model == CameraModel::kSimpleRadial) {
        out.fx = out.fy = params[k++];
    } else {
        out.fx = params[k++];
        out.fy = params[k++];
    }
    out.cx = params[k++];
    out.cy = params[k++];
    out.distortion.assign(params + k, params + k + distortion_size(model));
    return out;
}

std::vector<std::string> intrinsics_param_names(CameraModel model) {
    std::vector<std::string> names;
    if (model == CameraModel::kSimpleRadial) {
        names = {"f", "cx", "cy"};
    } else {
        names = {"fx", "fy", "cx", "cy"};
    }
    static const char* kDistNames[] = {"k1", "k2", "p1", "p2"};
    for (int i = 0; i < distortion_size(model); ++i) names.push_back(kDistNames[i]);
    return names;
}

ReprojectionStats evaluate_reprojection(const ObservationDataset& dataset,
                                        const CameraIntrinsics& intrinsics,
                                        std::span<const Pose> poses) {
    if (poses.size() != dataset.views.size()) {
        throw CalibrationError(Code::kValidationError,
                               "evaluate_reprojection: pose count does not match view count");
    }
    ReprojectionStats stats;
    double sum_sq = 0.0;
    int count = 0;
    for (size_t i = 0; i < dataset.views.size(); ++i) {
        const View& view = dataset.views[i];
        double view_sum = 0.0;
        int view_count = 0;
        auto& view_residuals = stats.residuals.emplace_back();
        for (const Observation& obs : view.observations) {
            const GeoResult<Pixel> projected = project_pinhole(intrinsics, poses[i], obs.point);
            if (!projected) {
                ++stats.behind_camera_count;
                view_residuals.emplace_back(Vec2::Zero());
                continue;
            }
            const Vec2 r = obs.pixel - *projected;
            view_residuals.push_back(r);
            view_sum += r.squaredNorm();
            ++view_count;
        }
        stats.per_view_rms.push_back(view_count > 0 ? std::sqrt(view_sum / view_count) : 0.0);
        sum_sq += view_sum;
        count += view_count;
    }
    stats.rms = count > 0 ? std::sqrt(sum_sq / count) : 0.0;
    return stats;
}

CalibrationReport calibrate_camera(const ObservationDataset& dataset, CameraModel model) {
    dataset.validate();
    if (dataset.target.type != TargetInfo::Type::kCheckerboard) {
        throw CalibrationError(Code::kValidationError,
                               "camera calibration requires a planar checkerboard target");
    }
    if (dataset.views.size() < 2) {
        throw CalibrationError(Code::kInsufficientViews,
                               "camera calibration needs at least 2 views");
    }

    // Closed-form initialization: per-view homographies, Zhang intrinsics,
    // pose decomposition. Distortion starts at zero.
    std::vector<Mat3> homographies;
    homographies.reserve(dataset.views.size());
    for (const View& view : dataset.views) {
        std::vector<Vec2> target_xy, image_uv;
        target_xy.reserve(view.observations.size());
        image_uv.reserve(view.observations.size());
        for (const Observation& obs : view.observations) {
            target_xy.emplace_back(obs.point.x(), obs.point.y());
            image_uv.push_back(obs.pixel);
        }
        homographies.push_back(homography_dlt(target_xy, image_uv));
    }

    const IntrinsicsConstraint constraint = model == CameraModel::kSimpleRadial
                                                ? IntrinsicsConstraint::kSharedFocal
                                                : IntrinsicsConstraint::kFullK;
    CameraIntrinsics init = zhang_intrinsics(homographies, constraint);
    init.model = model;
    init.distortion.assign(distortion_size(model), 0.0);

    std::vector<Pose> poses;
    poses.reserve(dataset.views.size());
    for (const Mat3& H : homographies) {
        poses.push_back(pose_from_homography(init, H));
    }

    // Joint refinement.
    LeastSquaresProblem problem;
    ParameterBlock intr_block;
    intr_block.values = intrinsics_to_params(init);
    const int intr_id = problem.add_block(intr_block);

    std::vector<int> rot_ids, trans_ids;
    for (const Pose& pose : poses) {
        ParameterBlock rot;
        rot.manifold = Manifold::kRotationAxisAngle;
        const Vec3 w = so3_log(pose.R);
        rot.values = {w.x(), w.y(), w.z()};
        rot_ids.push_back(problem.add_block(rot));
        ParameterBlock trans;
        trans.values = {pose.t.x(), pose.t.y(), pose.t.z()};
        trans_ids.push_back(problem.add_block(trans));
    }

    for (size_t i = 0; i < dataset.views.size(); ++i) {
        for (const Observation& obs : dataset.views[i].observations) {
            const Vec3 point = obs.point;
            const Pixel pixel = obs.pixel;
            problem.add_residual(
                {intr_id, rot_ids[i], trans_ids[i]}, 2,
                [model, point, pixel](const double* const* blocks, double* residual) {
                    const CameraIntrinsics K = intrinsics_from_params(model, blocks[0]);
                    const Pose pose{so3_exp(Vec3(blocks[1][0], blocks[1][1], blocks[1][2])),
                                    Vec3(blocks[2][0], blocks[2][1], blocks[2][2])};
                    const GeoResult<Pixel> projected = project_pinhole(K, pose, point);
                    if (!projected) return false;
                    residual[0] = pixel.x() - projected->x();
                    residual[1] = pixel.y() - projected->y();
                    return true;
                });
        }
    }

    const SolveResult solution = solve_lm(problem);

    CameraSection section;
    section.intrinsics = intrinsics_from_params(model, solution.parameters[intr_id].data());
    section.image_size = dataset.image_size;
    for (size_t i = 0; i < dataset.views.size(); ++i) {
        const Vec3 w(solution.parameters[rot_ids[i]][0], solution.parameters[rot_ids[i]][1],
                     solution.parameters[rot_ids[i]][2]);
        const Vec3 t(solution.parameters[trans_ids[i]][0], solution.parameters[trans_ids[i]][1],
                     solution.parameters[trans_ids[i]][2]);
        section.poses.push_back(PoseEntry{dataset.views[i].id, w, t});
    }

    std::vector<Pose> final_poses;
    for (const PoseEntry& entry : section.poses) final_poses.push_back(entry.pose());
    const ReprojectionStats stats = evaluate_reprojection(dataset, section.intrinsics, final_poses);
    section.rms_px = stats.rms;
    section.per_view_rms_px = stats.per_view_rms;

    const std::vector<std::string> names = intrinsics_param_names(model);
    for (size_t i = 0; i < names.size(); ++i) {
        section.std_devs[names[i]] = solution.std_devs[intr_id][i];
    }
    section.coverage = coverage(dataset);

    CalibrationReport report;
    report.camera = std::move(section);
    return report;
}

}  // namespace aquacal

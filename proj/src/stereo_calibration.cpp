#include "aquacal/stereo_calibration.hpp"

#include <cmath>
#include <iostream>

#include "aquacal/camera_calibration.hpp"
#include "aquacal/initializers.hpp"
#include "aquacal/so3.hpp"
#include "aquacal/solver.hpp"

namespace aquacal {

namespace {

using Code = CalibrationError::Code;

Pose pose_from_observations(const CameraIntrinsics& intrinsics,
                            const std::vector<Observation>& observations) {
    std::vector<Vec2> target_xy, image_uv;
    target_xy.reserve(observations.size());
    image_uv.reserve(observations.size());
    for (const Observation& obs : observations) {
        target_xy.emplace_back(obs.point.x(), obs.point.y());
        Vec2 normalized((obs.pixel.x() - intrinsics.cx) / intrinsics.fx,
                        (obs.pixel.y() - intrinsics.cy) / intrinsics.fy);
        const GeoResult<Vec2> und = undistort(intrinsics, normalized);
        if (!und) {
            throw CalibrationError(Code::kNonConvergence, "failed to undistort observation");
        }
        image_uv.emplace_back(intrinsics.fx * und->x() + intrinsics.cx,
                              intrinsics.fy * und->y() + intrinsics.cy);
    }
    const CameraIntrinsics ideal{CameraModel::kPinhole, intrinsics.fx, intrinsics.fy,
                                 intrinsics.cx, intrinsics.cy, {}};
    return pose_from_homography(ideal, homography_dlt(target_xy, image_uv));
}

}  // namespace

Pose relative_pose_per_pair(const Pose& pose1, const Pose& pose2) {
    const Mat3 R12 = pose2.R * pose1.R.transpose();
    return Pose{R12, pose2.t - R12 * pose1.t};
}

CalibrationReport calibrate_stereo(const StereoDataset& dataset, const CameraIntrinsics& K1,
                                   const CameraIntrinsics& K2,
                                   const StereoCalibrationOptions& options) {
    dataset.validate();
    K1.validate();
    K2.validate();
    if (dataset.target.type != TargetInfo::Type::kCheckerboard) {
        throw CalibrationError(Code::kValidationError,
                               "stereo calibration requires a planar checkerboard target");
    }

    // Per-pair absolute poses; pairs that fail are dropped.
    struct UsablePair {
        const StereoView* view;
        Pose pose1;
        Pose rel;
    };
    std::vector<UsablePair> pairs;
    int dropped = 0;
    for (const StereoView& view : dataset.views) {
        try {
            const Pose pose1 = pose_from_observations(K1, view.cam1);
            const Pose pose2 = pose_from_observations(K2, view.cam2);
            pairs.push_back({&view, pose1, relative_pose_per_pair(pose1, pose2)});
        } catch (const CalibrationError&) {
            ++dropped;
            std::cerr << "warning: dropping stereo pair " << view.id
                      << " (pose estimation failed)\n";
        }
    }
    if (pairs.size() < 2) {
        throw CalibrationError(Code::kInsufficientPairs,
                               "stereo calibration needs at least 2 usable pairs");
    }

    std::vector<Pose> rel_poses;
    for (const UsablePair& p : pairs) rel_poses.push_back(p.rel);
    const Pose rel_init =
        options.initial_relative_pose ? *options.initial_relative_pose : median_pose(rel_poses);

    // Joint refinement of camera-1 poses and the relative pose; intrinsics
    // blocks are frozen unless refinement was requested.
    LeastSquaresProblem problem;

    ParameterBlock k1_block, k2_block;
    k1_block.values = intrinsics_to_params(K1);
    k2_block.values = intrinsics_to_params(K2);
    if (!options.refine_intrinsics) {
        k1_block.constant_mask.assign(k1_block.values.size(), 1);
        k2_block.constant_mask.assign(k2_block.values.size(), 1);
    }
    const int k1_id = problem.add_block(k1_block);
    const int k2_id = problem.add_block(k2_block);

    ParameterBlock rel_rot;
    rel_rot.manifold = Manifold::kRotationAxisAngle;
    const Vec3 w12 = so3_log(rel_init.R);
    rel_rot.values = {w12.x(), w12.y(), w12.z()};
    const int rel_rot_id = problem.add_block(rel_rot);
    ParameterBlock rel_trans;
    rel_trans.values = {rel_init.t.x(), rel_init.t.y(), rel_init.t.z()};
    const int rel_trans_id = problem.add_block(rel_trans);

    const CameraModel model1 = K1.model;
    const CameraModel model2 = K2.model;

    std::vector<int> rot_ids, trans_ids;
    for (const UsablePair& pair : pairs) {
        ParameterBlock rot;
        rot.manifold = Manifold::kRotationAxisAngle;
        const Vec3 w = so3_log(pair.pose1.R);
        rot.values = {w.x(), w.y(), w.z()};
        rot_ids.push_back(problem.add_block(rot));
        ParameterBlock trans;
        trans.values = {pair.pose1.t.x(), pair.pose1.t.y(), pair.pose1.t.z()};
        trans_ids.push_back(problem.add_block(trans));
    }

    for (size_t i = 0; i < pairs.size(); ++i) {
        for (const Observation& obs : pairs[i].view->cam1) {
            const Vec3 point = obs.point;
            const Pixel pixel = obs.pixel;
            problem.add_residual(
                {k1_id, rot_ids[i], trans_ids[i]}, 2,
                [model1, point, pixel](const double* const* blocks, double* residual) {
                    const CameraIntrinsics K = intrinsics_from_params(model1, blocks[0]);
                    const Pose pose{so3_exp(Vec3(blocks[1][0], blocks[1][1], blocks[1][2])),
                                    Vec3(blocks[2][0], blocks[2][1], blocks[2][2])};
                    const GeoResult<Pixel> projected = project_pinhole(K, pose, point);
                    if (!projected) return false;
                    residual[0] = pixel.x() - projected->x();
                    residual[1] = pixel.y() - projected->y();
                    return true;
                });
        }
        for (const Observation& obs : pairs[i].view->cam2) {
            const Vec3 point = obs.point;
            const Pixel pixel = obs.pixel;
            problem.add_residual(
                {k2_id, rel_rot_id, rel_trans_id, rot_ids[i], trans_ids[i]}, 2,
                [model2, point, pixel](const double* const* blocks, double* residual) {
                    const CameraIntrinsics K = intrinsics_from_params(model2, blocks[0]);
                    const Pose rel{so3_exp(Vec3(blocks[1][0], blocks[1][1], blocks[1][2])),
                                   Vec3(blocks[2][0], blocks[2][1], blocks[2][2])};
                    const Pose pose1{so3_exp(Vec3(blocks[3][0], blocks[3][1], blocks[3][2])),
                                     Vec3(blocks[4][0], blocks[4][1], blocks[4][2])};
                    const GeoResult<Pixel> projected = project_pinhole(K, rel * pose1, point);
                    if (!projected) return false;
                    residual[0] = pixel.x() - projected->x();
                    residual[1] = pixel.y() - projected->y();
                    return true;
                });
        }
    }

    const SolveResult solution = solve_lm(problem);

    StereoSection section;
    const Pose rel_final{so3_exp(Vec3(solution.parameters[rel_rot_id][0],
                                      solution.parameters[rel_rot_id][1],
                                      solution.parameters[rel_rot_id][2])),
                         Vec3(solution.parameters[rel_trans_id][0],
                              solution.parameters[rel_trans_id][1],
                              solution.parameters[rel_trans_id][2])};
    section.set_relative_pose(rel_final);
    section.intrinsics1 = intrinsics_from_params(model1, solution.parameters[k1_id].data());
    section.intrinsics2 = intrinsics_from_params(model2, solution.parameters[k2_id].data());
    section.intrinsics_refined = options.refine_intrinsics;

    double sum1 = 0.0, sum2 = 0.0;
    int n1 = 0, n2 = 0;
    for (size_t i = 0; i < pairs.size(); ++i) {
        const Pose pose1{so3_exp(Vec3(solution.parameters[rot_ids[i]][0],
                                      solution.parameters[rot_ids[i]][1],
                                      solution.parameters[rot_ids[i]][2])),
                         Vec3(solution.parameters[trans_ids[i]][0],
                              solution.parameters[trans_ids[i]][1],
                              solution.parameters[trans_ids[i]][2])};
        section.cam1_poses.push_back(PoseEntry::from_pose(pairs[i].view->id, pose1));
        const Pose pose2 = rel_final * pose1;
        for (const Observation& obs : pairs[i].view->cam1) {
            const GeoResult<Pixel> proj = project_pinhole(section.intrinsics1, pose1, obs.point);
            if (!proj) continue;
            sum1 += (obs.pixel - *proj).squaredNorm();
            ++n1;
        }
        for (const Observation& obs : pairs[i].view->cam2) {
            const GeoResult<Pixel> proj = project_pinhole(section.intrinsics2, pose2, obs.point);
            if (!proj) continue;
            sum2 += (obs.pixel - *proj).squaredNorm();
            ++n2;
        }
    }
    section.rms_cam1_px = n1 > 0 ? std::sqrt(sum1 / n1) : 0.0;
    section.rms_cam2_px = n2 > 0 ? std::sqrt(sum2 / n2) : 0.0;
    section.rms_px = (n1 + n2) > 0 ? std::sqrt((sum1 + sum2) / (n1 + n2)) : 0.0;

    static const char* kRotNames[] = {"rotation_x", "rotation_y", "rotation_z"};
    static const char* kTransNames[] = {"translation_x", "translation_y", "translation_z"};
    for (int c = 0; c < 3; ++c) {
        section.std_devs[kRotNames[c]] = solution.std_devs[rel_rot_id][c];
        section.std_devs[kTransNames[c]] = solution.std_devs[rel_trans_id][c];
    }
    section.dropped_pairs = dropped;

    CalibrationReport report;
    report.stereo = std::move(section);
    return report;
}

}  // namespace aquacal

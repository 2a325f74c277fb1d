#include "aquacal/report.hpp"

#include "aquacal/so3.hpp"

namespace aquacal {

namespace {

bool exact(const Vec3& a, const Vec3& b) {
    return a.x() == b.x() && a.y() == b.y() && a.z() == b.z();
}

bool exact4(const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
    return a(0) == b(0) && a(1) == b(1) && a(2) == b(2) && a(3) == b(3);
}

}  // namespace

Pose PoseEntry::pose() const { return Pose{so3_exp(rotation_axis_angle), translation}; }

PoseEntry PoseEntry::from_pose(int id, const Pose& pose) {
    return PoseEntry{id, so3_log(pose.R), pose.t};
}

Pose StereoSection::relative_pose() const {
    return Pose{so3_exp(rotation_axis_angle), translation};
}

void StereoSection::set_relative_pose(const Pose& pose) {
    rotation_axis_angle = so3_log(pose.R);
    const Eigen::Quaterniond q(pose.R);
    rotation_quaternion = Eigen::Vector4d(q.w(), q.x(), q.y(), q.z());
    translation = pose.t;
}

bool operator==(const PoseEntry& a, const PoseEntry& b) {
    return a.view_id == b.view_id && exact(a.rotation_axis_angle, b.rotation_axis_angle) &&
           exact(a.translation, b.translation);
}

bool operator==(const CoverageGrid& a, const CoverageGrid& b) {
    return a.grid_size == b.grid_size && a.counts == b.counts &&
           a.empty_cells == b.empty_cells && a.min_count == b.min_count &&
           a.max_count == b.max_count;
}

bool operator==(const CameraIntrinsics& a, const CameraIntrinsics& b) {
    return a.model == b.model && a.fx == b.fx && a.fy == b.fy && a.cx == b.cx && a.cy == b.cy &&
           a.distortion == b.distortion;
}

bool operator==(const FlatPort& a, const FlatPort& b) {
    return exact(a.normal, b.normal) && a.distance == b.distance &&
           a.thickness == b.thickness && a.mu_air == b.mu_air && a.mu_glass == b.mu_glass &&
           a.mu_water == b.mu_water;
}

bool operator==(const DomePort& a, const DomePort& b) {
    return exact(a.decentering, b.decentering) && a.radius == b.radius &&
           a.thickness == b.thickness && a.mu_air == b.mu_air && a.mu_glass == b.mu_glass &&
           a.mu_water == b.mu_water;
}

bool operator==(const CameraSection& a, const CameraSection& b) {
    return a.intrinsics == b.intrinsics && a.image_size == b.image_size && a.poses == b.poses &&
           a.rms_px == b.rms_px && a.per_view_rms_px == b.per_view_rms_px &&
           a.std_devs == b.std_devs && a.coverage == b.coverage;
}

bool operator==(const HousingSection& a, const HousingSection& b) {
    return a.port == b.port && a.initial == b.initial && a.poses == b.poses &&
           a.rms_px == b.rms_px && a.per_view_rms_px == b.per_view_rms_px &&
           a.std_devs == b.std_devs && a.metrics == b.metrics;
}

bool operator==(const StereoSection& a, const StereoSection& b) {
    return exact(a.rotation_axis_angle, b.rotation_axis_angle) &&
           exact4(a.rotation_quaternion, b.rotation_quaternion) &&
           exact(a.translation, b.translation) && a.intrinsics1 == b.intrinsics1 &&
           a.intrinsics2 == b.intrinsics2 && a.intrinsics_refined == b.intrinsics_refined &&
           a.cam1_poses == b.cam1_poses && a.rms_px == b.rms_px &&
           a.rms_cam1_px == b.rms_cam1_px && a.rms_cam2_px == b.rms_cam2_px &&
           a.dropped_pairs == b.dropped_pairs && a.std_devs == b.std_devs;
}

bool operator==(const CalibrationReport& a, const CalibrationReport& b) {
    return a.camera == b.camera && a.housing == b.housing && a.stereo == b.stereo;
}

}  // namespace aquacal

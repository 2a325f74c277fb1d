#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aquacal/camera.hpp"
#include "aquacal/dataset.hpp"
#include "aquacal/housing.hpp"
#include "aquacal/types.hpp"

namespace aquacal {

struct PoseEntry {
    int view_id = 0;
    Vec3 rotation_axis_angle = Vec3::Zero();
    Vec3 translation = Vec3::Zero();

    Pose pose() const;
    static PoseEntry from_pose(int view_id, const Pose& pose);
};

struct CameraSection {
    CameraIntrinsics intrinsics;
    std::array<int, 2> image_size = {0, 0};
    std::vector<PoseEntry> poses;
    double rms_px = 0.0;
    std::vector<double> per_view_rms_px;
    std::map<std::string, double> std_devs;
    CoverageGrid coverage;
};

struct HousingSection {
    Housing port;     // estimated parameters (with the frozen constants)
    Housing initial;  // initial guess as configured
    std::vector<PoseEntry> poses;
    double rms_px = 0.0;
    std::vector<double> per_view_rms_px;
    std::map<std::string, double> std_devs;
    std::map<std::string, double> metrics;  // e.g. angle_from_initial_deg
};

struct StereoSection {
    Vec3 rotation_axis_angle = Vec3::Zero();
    Eigen::Vector4d rotation_quaternion = Eigen::Vector4d(1, 0, 0, 0);  // w, x, y, z
    Vec3 translation = Vec3::Zero();
    CameraIntrinsics intrinsics1;
    CameraIntrinsics intrinsics2;
    bool intrinsics_refined = false;
    std::vector<PoseEntry> cam1_poses;
    double rms_px = 0.0;
    double rms_cam1_px = 0.0;
    double rms_cam2_px = 0.0;
    int dropped_pairs = 0;
    std::map<std::string, double> std_devs;

    Pose relative_pose() const;
    void set_relative_pose(const Pose& pose);
};

struct CalibrationReport {
    std::optional<CameraSection> camera;
    std::optional<HousingSection> housing;
    std::optional<StereoSection> stereo;
};

bool operator==(const PoseEntry& a, const PoseEntry& b);
bool operator==(const CoverageGrid& a, const CoverageGrid& b);
bool operator==(const CameraIntrinsics& a, const CameraIntrinsics& b);
bool operator==(const FlatPort& a, const FlatPort& b);
bool operator==(const DomePort& a, const DomePort& b);
bool operator==(const CameraSection& a, const CameraSection& b);
bool operator==(const HousingSection& a, const HousingSection& b);
bool operator==(const StereoSection& a, const StereoSection& b);
bool operator==(const CalibrationReport& a, const CalibrationReport& b);

}  // namespace aquacal

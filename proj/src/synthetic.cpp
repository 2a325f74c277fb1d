#include "aquacal/synthetic.hpp"

#include <cmath>
#include <random>

#include "aquacal/so3.hpp"

namespace aquacal {

namespace {

using Code = CalibrationError::Code;

constexpr int kMaxAttemptsPerView = 1000;

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::mt19937_64 view_rng(uint64_t seed, int view_index) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(static_cast<uint64_t>(view_index) + 1)));
}

std::vector<Vec3> target_points(const TargetInfo& target) {
    std::vector<Vec3> points;
    points.reserve(target.rows * target.cols);
    for (int r = 0; r < target.rows; ++r) {
        for (int c = 0; c < target.cols; ++c) {
            points.emplace_back(c * target.spacing, r * target.spacing, 0.0);
        }
    }
    return points;
}

GeoResult<Pixel> project_truth(const ScenarioSpec& spec, const Pose& pose, const Vec3& point) {
    if (const auto* flat = std::get_if<FlatPort>(&spec.housing)) {
        return project_flat(spec.camera, *flat, pose, point);
    }
    if (const auto* dome = std::get_if<DomePort>(&spec.housing)) {
        return project_dome(spec.camera, *dome, pose, point);
    }
    return project_pinhole(spec.camera, pose, point);
}

// Half-angle of the usable field of view: smallest angle between an image
// corner ray (traced through the housing when present) and the optical
// axis, with a safety margin for the sampler.
double sampling_cap_rad(const ScenarioSpec& spec) {
    double min_angle = M_PI / 2.0;
    const double w = spec.image_size[0];
    const double h = spec.image_size[1];
    const Pixel corners[4] = {{0.0, 0.0}, {w, 0.0}, {0.0, h}, {w, h}};
    for (const Pixel& corner : corners) {
        GeoResult<Ray> ray = backproject_pinhole(spec.camera, corner);
        if (!ray) continue;
        if (const auto* flat = std::get_if<FlatPort>(&spec.housing)) {
            const GeoResult<Ray> water = trace_flat(*flat, ray->direction);
            if (!water) continue;
            ray = water;
        } else if (const auto* dome = std::get_if<DomePort>(&spec.housing)) {
            const GeoResult<Ray> water = trace_dome(*dome, ray->direction);
            if (!water) continue;
            ray = water;
        }
        min_angle = std::min(min_angle, std::acos(std::min(1.0, ray->direction.z())));
    }
    return 0.7 * min_angle;
}

Pose sample_pose(const ScenarioSpec& spec, double cap_rad, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const double dist = spec.sampler.min_distance +
                        unit(rng) * (spec.sampler.max_distance - spec.sampler.min_distance);

    // Target center direction on a spherical cap around the optical axis.
    const double cos_cap = std::cos(cap_rad);
    const double cos_angle = cos_cap + unit(rng) * (1.0 - cos_cap);
    const double sin_angle = std::sqrt(std::max(0.0, 1.0 - cos_angle * cos_angle));
    const double azimuth = 2.0 * M_PI * unit(rng);
    const Vec3 center_dir(sin_angle * std::cos(azimuth), sin_angle * std::sin(azimuth),
                          cos_angle);
    const Vec3 center_cam = dist * center_dir;

    // Board normal: facing the camera, tilted by a random amount about a
    // random in-plane axis, then rolled.
    const double tilt = unit(rng) * spec.sampler.max_tilt_deg * M_PI / 180.0;
    const double tilt_azimuth = 2.0 * M_PI * unit(rng);
    const double roll = 2.0 * M_PI * unit(rng);

    const Vec3 facing = -center_dir;
    const Vec3 ref = std::abs(facing.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 p = facing.cross(ref).normalized();
    const Vec3 q = facing.cross(p);
    const Vec3 tilt_axis = std::cos(tilt_azimuth) * p + std::sin(tilt_azimuth) * q;
    const Vec3 normal_cam = so3_exp(tilt * tilt_axis) * facing;

    const Vec3 ref2 = std::abs(normal_cam.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    Vec3 x_axis = normal_cam.cross(ref2).normalized();
    x_axis = so3_exp(roll * normal_cam) * x_axis;
    const Vec3 y_axis = normal_cam.cross(x_axis);

    Mat3 R;
    R.col(0) = x_axis;
    R.col(1) = y_axis;
    R.col(2) = normal_cam;

    const Vec3 target_center((spec.target.cols - 1) * spec.target.spacing * 0.5,
                             (spec.target.rows - 1) * spec.target.spacing * 0.5, 0.0);
    return Pose{R, center_cam - R * target_center};
}

bool in_image(const Pixel& px, const std::array<int, 2>& size) {
    return px.x() >= 0.0 && px.x() <= size[0] && px.y() >= 0.0 && px.y() <= size[1];
}

}  // namespace

void ScenarioSpec::validate() const {
    camera.validate();
    if (image_size[0] <= 0 || image_size[1] <= 0) {
        throw CalibrationError(Code::kValidationError, "scenario: invalid image size");
    }
    if (n_views < 1) {
        throw CalibrationError(Code::kValidationError, "scenario: need at least 1 view");
    }
    if (!(noise_sigma_px >= 0.0)) {
        throw CalibrationError(Code::kValidationError, "scenario: noise sigma must be >= 0");
    }
    if (target.rows < 2 || target.cols < 2 || !(target.spacing > 0.0)) {
        throw CalibrationError(Code::kValidationError, "scenario: invalid target");
    }
    if (!(sampler.min_distance > 0.0) || !(sampler.max_distance >= sampler.min_distance)) {
        throw CalibrationError(Code::kValidationError, "scenario: invalid distance range");
    }
    if (const auto* flat = std::get_if<FlatPort>(&housing)) flat->validate();
    if (const auto* dome = std::get_if<DomePort>(&housing)) dome->validate();
    if (stereo_rig && !std::holds_alternative<std::monostate>(housing)) {
        throw CalibrationError(Code::kValidationError,
                               "scenario: stereo generation is pinhole-only");
    }
}

GeneratedDataset generate_dataset(const ScenarioSpec& spec) {
    spec.validate();
    const std::vector<Vec3> points = target_points(spec.target);
    const double cap = sampling_cap_rad(spec);

    GeneratedDataset out;
    out.dataset.target = spec.target;
    out.dataset.image_size = spec.image_size;
    out.truth.spec = spec;

    for (int v = 0; v < spec.n_views; ++v) {
        std::mt19937_64 rng = view_rng(spec.seed, v);
        bool placed = false;
        for (int attempt = 0; attempt < kMaxAttemptsPerView && !placed; ++attempt) {
            const Pose pose = sample_pose(spec, cap, rng);
            View view;
            view.id = v;
            view.observations.reserve(points.size());
            bool ok = true;
            for (const Vec3& point : points) {
                const GeoResult<Pixel> px = project_truth(spec, pose, point);
                if (!px || !in_image(*px, spec.image_size)) {
                    ok = false;
                    break;
                }
                view.observations.push_back(Observation{*px, point});
            }
            if (!ok) continue;
            if (spec.noise_sigma_px > 0.0) {
                std::normal_distribution<double> noise(0.0, spec.noise_sigma_px);
                for (Observation& obs : view.observations) {
                    obs.pixel.x() += noise(rng);
                    obs.pixel.y() += noise(rng);
                }
            }
            out.dataset.views.push_back(std::move(view));
            out.truth.poses.push_back(PoseEntry::from_pose(v, pose));
            placed = true;
        }
        if (!placed) {
            throw CalibrationError(Code::kViewSamplingFailed,
                                   "could not place view " + std::to_string(v) +
                                       " with the target fully in view");
        }
    }
    return out;
}

GeneratedStereoDataset generate_stereo_dataset(const ScenarioSpec& spec) {
    spec.validate();
    if (!spec.stereo_rig) {
        throw CalibrationError(Code::kValidationError,
                               "stereo generation requires a rig in the scenario");
    }
    const Pose rig = *spec.stereo_rig;
    const std::vector<Vec3> points = target_points(spec.target);
    const double cap = sampling_cap_rad(spec);

    GeneratedStereoDataset out;
    out.dataset.target = spec.target;
    out.dataset.image_size1 = spec.image_size;
    out.dataset.image_size2 = spec.image_size;
    out.truth.spec = spec;
    out.truth.note = "stereo rig ground truth is a generator default";

    for (int v = 0; v < spec.n_views; ++v) {
        std::mt19937_64 rng = view_rng(spec.seed, v);
        bool placed = false;
        for (int attempt = 0; attempt < kMaxAttemptsPerView && !placed; ++attempt) {
            const Pose pose1 = sample_pose(spec, cap, rng);
            const Pose pose2 = rig * pose1;
            StereoView view;
            view.id = v;
            bool ok = true;
            for (const Vec3& point : points) {
                const GeoResult<Pixel> px1 = project_pinhole(spec.camera, pose1, point);
                const GeoResult<Pixel> px2 = project_pinhole(spec.camera, pose2, point);
                if (!px1 || !px2 || !in_image(*px1, spec.image_size) ||
                    !in_image(*px2, spec.image_size)) {
                    ok = false;
                    break;
                }
                view.cam1.push_back(Observation{*px1, point});
                view.cam2.push_back(Observation{*px2, point});
            }
            if (!ok) continue;
            if (spec.noise_sigma_px > 0.0) {
                std::normal_distribution<double> noise(0.0, spec.noise_sigma_px);
                for (Observation& obs : view.cam1) {
                    obs.pixel.x() += noise(rng);
                    obs.pixel.y() += noise(rng);
                }
                for (Observation& obs : view.cam2) {
                    obs.pixel.x() += noise(rng);
                    obs.pixel.y() += noise(rng);
                }
            }
            out.dataset.views.push_back(std::move(view));
            out.truth.poses.push_back(PoseEntry::from_pose(v, pose1));
            placed = true;
        }
        if (!placed) {
            throw CalibrationError(Code::kViewSamplingFailed,
                                   "could not place stereo view " + std::to_string(v));
        }
    }
    return out;
}

namespace {

// Close, large, strongly tilted boards: depth variation at high incidence
// angles is what separates the housing parameters from the per-view poses.
ScenarioSpec base_scenario() {
    ScenarioSpec spec;
    spec.image_size = {1920, 1080};
    spec.target.type = TargetInfo::Type::kCheckerboard;
    spec.target.rows = 12;
    spec.target.cols = 17;
    spec.target.spacing = 0.03;
    spec.n_views = 25;
    spec.sampler = PoseSamplerParams{0.5, 1.0, 60.0};
    spec.noise_sigma_px = 0.0;
    spec.seed = 1;
    return spec;
}

constexpr double kPresetFocal = 1297.3655;

}  // namespace

ScenarioSpec preset(const std::string& name) {
    ScenarioSpec spec = base_scenario();
    if (name == "air_table1") {
        spec.camera = CameraIntrinsics{CameraModel::kRadial, kPresetFocal, kPresetFocal,
                                       960.0,  540.0,        {-0.1, -0.02}};
        return spec;
    }
    spec.camera = CameraIntrinsics::pinhole(kPresetFocal, 960.0, 540.0);
    if (name == "dome_table1") {
        DomePort dome;
        dome.decentering = Vec3(0.01, 0.006, 0.002);
        dome.radius = 0.05;
        dome.thickness = 0.006;
        dome.mu_air = 1.0;
        dome.mu_glass = 1.473;
        dome.mu_water = 1.334;
        spec.housing = dome;
        return spec;
    }
    if (name == "flat_table1") {
        FlatPort flat;
        const double tilt = 5.0 * M_PI / 180.0;
        flat.normal = Vec3(std::sin(tilt), 0.0, std::cos(tilt));
        flat.distance = 0.02;
        flat.thickness = 0.014;
        flat.mu_air = 1.0;
        flat.mu_glass = 1.473;
        flat.mu_water = 1.334;
        spec.housing = flat;
        return spec;
    }
    if (name == "stereo_table1") {
        const double yaw = 2.0 * M_PI / 180.0;
        const Mat3 R12 = so3_exp(Vec3(0.0, yaw, 0.0));
        const Vec3 camera2_center(0.1, 0.0, 0.0);
        spec.stereo_rig = Pose{R12, -(R12 * camera2_center)};
        spec.sampler.min_distance = 0.8;
        spec.sampler.max_distance = 1.6;
        spec.sampler.max_tilt_deg = 45.0;
        return spec;
    }
    throw CalibrationError(Code::kUnknownPreset, "unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() {
    return {"air_table1", "dome_table1", "flat_table1", "stereo_table1"};
}

}  // namespace aquacal

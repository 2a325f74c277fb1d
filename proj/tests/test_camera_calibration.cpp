#include <doctest.h>

#include <cmath>

#include "aquacal/camera_calibration.hpp"
#include "aquacal/synthetic.hpp"

using namespace aquacal;

namespace {

// Relative error against a reference scale.
double rel_err(double est, double truth) { return std::abs(est - truth) / std::abs(truth); }

}  // namespace

TEST_SUITE_BEGIN("camera_calibration");

TEST_CASE("evaluate_reprojection: zero at the generating parameters") {
    ScenarioSpec spec = preset("air_table1");
    spec.n_views = 5;
    spec.seed = 2;
    const GeneratedDataset generated = generate_dataset(spec);
    std::vector<Pose> poses;
    for (const PoseEntry& entry : generated.truth.poses) poses.push_back(entry.pose());
    const ReprojectionStats stats =
        evaluate_reprojection(generated.dataset, spec.camera, poses);
    CHECK(stats.rms < 1e-9);
    CHECK(stats.behind_camera_count == 0);
}

TEST_CASE("evaluate_reprojection: hand-computed RMS with one bad observation") {
    // 25 observations, 24 exact and one displaced by (3,4) px:
    // RMS = sqrt(25 / 25) = 1.
    const CameraIntrinsics k = CameraIntrinsics::pinhole(1000.0, 500.0, 500.0);
    ObservationDataset dataset;
    dataset.target.type = TargetInfo::Type::kGeneric3D;
    dataset.image_size = {1000, 1000};
    View view;
    view.id = 0;
    const Pose pose;  // identity
    for (int i = 0; i < 25; ++i) {
        const Vec3 point(-0.2 + 0.016 * i, 0.1 - 0.008 * i, 2.0);
        const GeoResult<Pixel> px = project_pinhole(k, pose, point);
        REQUIRE(px.has_value());
        Observation obs{*px, point};
        if (i == 7) {
            obs.pixel += Vec2(3.0, 4.0);
        }
        view.observations.push_back(obs);
    }
    dataset.views.push_back(view);
    const ReprojectionStats stats = evaluate_reprojection(dataset, k, std::vector<Pose>{pose});
    CHECK(stats.rms == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(stats.per_view_rms[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("evaluate_reprojection: perturbing fx strictly increases the error") {
    ScenarioSpec spec = preset("air_table1");
    spec.n_views = 5;
    spec.seed = 4;
    const GeneratedDataset generated = generate_dataset(spec);
    std::vector<Pose> poses;
    for (const PoseEntry& entry : generated.truth.poses) poses.push_back(entry.pose());

    CameraIntrinsics perturbed = spec.camera;
    perturbed.fx += 1.0;
    const double rms_true = evaluate_reprojection(generated.dataset, spec.camera, poses).rms;
    const double rms_perturbed =
        evaluate_reprojection(generated.dataset, perturbed, poses).rms;
    CHECK(rms_perturbed > rms_true + 1e-6);
}

TEST_CASE("evaluate_reprojection: behind-camera observations are flagged, not fatal") {
    const CameraIntrinsics k = CameraIntrinsics::pinhole(1000.0, 500.0, 500.0);
    ObservationDataset dataset;
    dataset.target.type = TargetInfo::Type::kGeneric3D;
    dataset.image_size = {1000, 1000};
    View view;
    view.id = 0;
    for (int i = 0; i < 4; ++i) {
        view.observations.push_back(
            Observation{Pixel(500, 500), Vec3(0.01 * i, 0.0, 1.0)});
    }
    dataset.views.push_back(view);
    // A pose that puts the points behind the camera.
    const Pose behind{Mat3::Identity(), Vec3(0, 0, -3)};
    const ReprojectionStats stats =
        evaluate_reprojection(dataset, k, std::vector<Pose>{behind});
    CHECK(stats.behind_camera_count == 4);
    CHECK(stats.rms == 0.0);
}

TEST_CASE("calibrate_camera: noise-free identifiability on the in-air scenario") {
    ScenarioSpec spec = preset("air_table1");
    spec.seed = 7;
    const GeneratedDataset generated = generate_dataset(spec);
    const CalibrationReport report = calibrate_camera(generated.dataset, CameraModel::kRadial);
    REQUIRE(report.camera.has_value());
    const CameraIntrinsics& est = report.camera->intrinsics;

    CHECK(rel_err(est.fx, spec.camera.fx) < 1e-6);
    CHECK(rel_err(est.fy, spec.camera.fy) < 1e-6);
    CHECK(rel_err(est.cx, spec.camera.cx) < 1e-6);
    CHECK(rel_err(est.cy, spec.camera.cy) < 1e-6);
    CHECK(std::abs(est.distortion[0] - spec.camera.distortion[0]) < 1e-6);
    CHECK(std::abs(est.distortion[1] - spec.camera.distortion[1]) < 1e-6);
    CHECK(report.camera->rms_px < 1e-8);
    CHECK(report.camera->per_view_rms_px.size() == generated.dataset.views.size());
}

TEST_CASE("calibrate_camera: all supported models are identifiable noise-free") {
    struct Case {
        CameraModel model;
        CameraIntrinsics truth;
    };
    const std::vector<Case> cases = {
        {CameraModel::kPinhole,
         CameraIntrinsics{CameraModel::kPinhole, 1297.3655, 1290.0, 960.0, 540.0, {}}},
        {CameraModel::kSimpleRadial,
         CameraIntrinsics{CameraModel::kSimpleRadial, 1297.3655, 1297.3655, 955.0, 545.0,
                          {-0.08}}},
        {CameraModel::kRadial,
         CameraIntrinsics{CameraModel::kRadial, 1297.3655, 1292.0, 960.0, 540.0, {-0.1, -0.02}}},
        {CameraModel::kFullOpen,
         CameraIntrinsics{CameraModel::kFullOpen, 1297.3655, 1292.0, 960.0, 540.0,
                          {-0.1, -0.02, 0.001, -0.0005}}},
    };
    for (const Case& test_case : cases) {
        ScenarioSpec spec = preset("air_table1");
        spec.camera = test_case.truth;
        spec.n_views = 15;
        spec.seed = 13;
        const GeneratedDataset generated = generate_dataset(spec);
        const CalibrationReport report = calibrate_camera(generated.dataset, test_case.model);
        const CameraIntrinsics& est = report.camera->intrinsics;
        CHECK(rel_err(est.fx, test_case.truth.fx) < 1e-6);
        CHECK(rel_err(est.fy, test_case.truth.fy) < 1e-6);
        for (size_t i = 0; i < test_case.truth.distortion.size(); ++i) {
            CHECK(std::abs(est.distortion[i] - test_case.truth.distortion[i]) < 1e-6);
        }
        if (test_case.model == CameraModel::kSimpleRadial) {
            CHECK(est.fx == est.fy);
        }
    }
}

TEST_CASE("calibrate_camera: matches the published tolerances under noise") {
    ScenarioSpec spec = preset("air_table1");
    spec.noise_sigma_px = 0.5;
    spec.seed = 17;
    const GeneratedDataset generated = generate_dataset(spec);
    const CalibrationReport report = calibrate_camera(generated.dataset, CameraModel::kRadial);
    const CameraIntrinsics& est = report.camera->intrinsics;
    CHECK(std::abs(est.fx - 1297.3655) < 6.0);
    CHECK(std::abs(est.distortion[0] + 0.1) < 0.01);
    CHECK(std::abs(est.distortion[1] + 0.02) < 0.005);
    CHECK(report.camera->rms_px == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("calibrate_camera: single view is insufficient") {
    ScenarioSpec spec = preset("air_table1");
    spec.n_views = 1;
    spec.seed = 23;
    const GeneratedDataset generated = generate_dataset(spec);
    CHECK_THROWS_AS((void)calibrate_camera(generated.dataset, CameraModel::kFullOpen),
                    CalibrationError);
    try {
        (void)calibrate_camera(generated.dataset, CameraModel::kFullOpen);
    } catch (const CalibrationError& e) {
        CHECK(e.code() == CalibrationError::Code::kInsufficientViews);
    }
}

TEST_SUITE_END();

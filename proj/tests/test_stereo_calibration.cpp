#include <doctest.h>

#include <cmath>
#include <random>

#include "aquacal/initializers.hpp"
#include "aquacal/so3.hpp"
#include "aquacal/stereo_calibration.hpp"
#include "aquacal/synthetic.hpp"
#include "oracles.hpp"

using namespace aquacal;

namespace {

double rotation_err_rad(const Pose& a, const Pose& b) {
    return so3_log(a.R * b.R.transpose()).norm();
}

}  // namespace

TEST_SUITE_BEGIN("stereo_calibration");

TEST_CASE("relative_pose_per_pair: identities and algebraic round trip") {
    std::mt19937_64 rng(307);
    const Mat3 R = aquacal::testing::random_rotation(rng, 0.7);
    const Pose pose{R, Vec3(0.2, -0.1, 1.4)};

    const Pose same = relative_pose_per_pair(pose, pose);
    CHECK((same.R - Mat3::Identity()).norm() < 1e-14);
    CHECK(same.t.norm() < 1e-14);

    const Pose from_identity = relative_pose_per_pair(Pose{}, pose);
    CHECK((from_identity.R - pose.R).norm() < 1e-14);
    CHECK((from_identity.t - pose.t).norm() < 1e-14);

    for (int i = 0; i < 20; ++i) {
        const Pose pose1{aquacal::testing::random_rotation(rng, 0.7),
                         Vec3(0.1, 0.0, 1.0 + 0.1 * i)};
        const Pose pose2{aquacal::testing::random_rotation(rng, 0.7), Vec3(-0.2, 0.3, 2.0)};
        const Pose rel = relative_pose_per_pair(pose1, pose2);
        const Pose recomposed = rel * pose1;
        CHECK((recomposed.R - pose2.R).norm() < 1e-12);
        CHECK((recomposed.t - pose2.t).norm() < 1e-12);
    }
}

TEST_CASE("calibrate_stereo: noise-free rig recovery") {
    ScenarioSpec spec = preset("stereo_table1");
    spec.seed = 311;
    const GeneratedStereoDataset generated = generate_stereo_dataset(spec);
    const Pose rig = *spec.stereo_rig;

    StereoCalibrationOptions options;  // intrinsics stay fixed
    const CalibrationReport report =
        calibrate_stereo(generated.dataset, spec.camera, spec.camera, options);
    REQUIRE(report.stereo.has_value());
    const Pose est = report.stereo->relative_pose();
    CHECK(rotation_err_rad(est, rig) < 1e-7);
    CHECK((est.t - rig.t).norm() < 1e-7);
    CHECK(report.stereo->rms_px < 1e-8);
    CHECK(report.stereo->dropped_pairs == 0);
}

TEST_CASE("calibrate_stereo: published noise tolerances") {
    ScenarioSpec spec = preset("stereo_table1");
    spec.noise_sigma_px = 0.5;
    spec.seed = 313;
    const GeneratedStereoDataset generated = generate_stereo_dataset(spec);
    const Pose rig = *spec.stereo_rig;

    const CalibrationReport report =
        calibrate_stereo(generated.dataset, spec.camera, spec.camera, {});
    const Pose est = report.stereo->relative_pose();
    CHECK(rotation_err_rad(est, rig) * 180.0 / M_PI <= 0.05);
    CHECK((est.t - rig.t).norm() <= 0.002);
}

TEST_CASE("calibrate_stereo: identical streams give the identity rig") {
    ScenarioSpec spec = preset("stereo_table1");
    spec.stereo_rig = Pose{};  // zero baseline
    spec.seed = 317;
    spec.n_views = 8;
    const GeneratedStereoDataset generated = generate_stereo_dataset(spec);
    const CalibrationReport report =
        calibrate_stereo(generated.dataset, spec.camera, spec.camera, {});
    const Pose est = report.stereo->relative_pose();
    CHECK(so3_log(est.R).norm() < 1e-9);
    CHECK(est.t.norm() < 1e-9);
}

TEST_CASE("calibrate_stereo: frozen intrinsics stay bit-identical") {
    ScenarioSpec spec = preset("stereo_table1");
    spec.noise_sigma_px = 0.3;
    spec.seed = 331;
    spec.n_views = 8;
    const GeneratedStereoDataset generated = generate_stereo_dataset(spec);
    const CalibrationReport report =
        calibrate_stereo(generated.dataset, spec.camera, spec.camera, {});
    CHECK(report.stereo->intrinsics1 == spec.camera);
    CHECK(report.stereo->intrinsics2 == spec.camera);
    CHECK(!report.stereo->intrinsics_refined);
}

TEST_CASE("calibrate_stereo: joint cost is zero at the truth on clean data") {
    ScenarioSpec spec = preset("stereo_table1");
    spec.seed = 337;
    spec.n_views = 6;
    const GeneratedStereoDataset generated = generate_stereo_dataset(spec);
    const Pose rig = *spec.stereo_rig;

    double cost = 0.0;
    for (size_t i = 0; i < generated.dataset.views.size(); ++i) {
        const Pose pose1 = generated.truth.poses[i].pose();
        const Pose pose2 = rig * pose1;
        for (const Observation& obs : generated.dataset.views[i].cam1) {
            const GeoResult<Pixel> px = project_pinhole(spec.camera, pose1, obs.point);
            REQUIRE(px.has_value());
            cost += (obs.pixel - *px).squaredNorm();
        }
        for (const Observation& obs : generated.dataset.views[i].cam2) {
            const GeoResult<Pixel> px = project_pinhole(spec.camera, pose2, obs.point);
            REQUIRE(px.has_value());
            cost += (obs.pixel - *px).squaredNorm();
        }
    }
    CHECK(cost < 1e-12);
}

TEST_CASE("calibrate_stereo: refined intrinsics stay near the truth") {
    ScenarioSpec spec = preset("stereo_table1");
    spec.camera = CameraIntrinsics{CameraModel::kRadial, 1297.3655, 1297.3655,
                                   960.0,  540.0,        {-0.1, -0.02}};
    spec.noise_sigma_px = 0.3;
    spec.seed = 347;
    const GeneratedStereoDataset generated = generate_stereo_dataset(spec);

    StereoCalibrationOptions options;
    options.refine_intrinsics = true;
    const CalibrationReport report =
        calibrate_stereo(generated.dataset, spec.camera, spec.camera, options);
    CHECK(std::abs(report.stereo->intrinsics1.fx - spec.camera.fx) < 3.0);
    CHECK(std::abs(report.stereo->intrinsics2.fx - spec.camera.fx) < 3.0);
    CHECK(report.stereo->intrinsics_refined);
}

TEST_CASE("calibrate_stereo: insufficient pairs") {
    ScenarioSpec spec = preset("stereo_table1");
    spec.seed = 349;
    spec.n_views = 2;
    GeneratedStereoDataset generated = generate_stereo_dataset(spec);
    // Corrupt one pair so its pose estimation fails (collinear points).
    for (size_t j = 0; j < generated.dataset.views[0].cam1.size(); ++j) {
        generated.dataset.views[0].cam1[j].pixel = Pixel(100.0 + j, 200.0);
        generated.dataset.views[0].cam1[j].point = Vec3(j * 0.03, 0.0, 0.0);
    }
    // Still a structurally valid dataset, but only one usable pair remains.
    CHECK_THROWS_AS(
        (void)calibrate_stereo(generated.dataset, spec.camera, spec.camera, {}),
        CalibrationError);
}

TEST_CASE("median initialization shrugs off one outlier pair") {
    // A 90-degree outlier among 7 relative poses moves the median init by a
    // small fraction of the outlier, and the optimum it leads to is the same.
    ScenarioSpec spec = preset("stereo_table1");
    spec.noise_sigma_px = 0.2;
    spec.seed = 353;
    spec.n_views = 7;
    const GeneratedStereoDataset generated = generate_stereo_dataset(spec);
    const Pose rig = *spec.stereo_rig;

    std::vector<Pose> rels(7, rig);
    rels[3] = Pose{so3_exp(Vec3(0, 0, M_PI / 2)) * rig.R, rig.t + Vec3(0.5, 0, 0)};
    const Pose clean_median = median_pose(std::vector<Pose>(7, rig));
    const Pose outlier_median = median_pose(rels);
    const double init_shift = rotation_err_rad(outlier_median, clean_median);
    CHECK(init_shift < 0.05 * (M_PI / 2));

    StereoCalibrationOptions with_outlier_init;
    with_outlier_init.initial_relative_pose = outlier_median;
    const CalibrationReport a =
        calibrate_stereo(generated.dataset, spec.camera, spec.camera, with_outlier_init);
    const CalibrationReport b =
        calibrate_stereo(generated.dataset, spec.camera, spec.camera, {});
    const double final_shift =
        rotation_err_rad(a.stereo->relative_pose(), b.stereo->relative_pose());
    CHECK(final_shift < 1e-3 * (M_PI / 2));
}

TEST_SUITE_END();

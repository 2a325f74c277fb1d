#include <doctest.h>

#include <cmath>
#include <random>

#include "aquacal/camera.hpp"
#include "aquacal/housing.hpp"
#include "aquacal/refraction.hpp"
#include "aquacal/synthetic.hpp"
#include "oracles.hpp"

using namespace aquacal;
using aquacal::testing::incidence_angle;

namespace {

const CameraIntrinsics kTestCamera = CameraIntrinsics::pinhole(1297.3655, 960.0, 540.0);

CameraIntrinsics radial_camera(double k1, double k2) {
    return CameraIntrinsics{CameraModel::kRadial, 1297.3655, 1297.3655, 960.0, 540.0, {k1, k2}};
}

}  // namespace

TEST_SUITE_BEGIN("geometry");

TEST_CASE("distort: zero coefficients are the identity") {
    const CameraIntrinsics k = radial_camera(0.0, 0.0);
    const Vec2 p(0.3, -0.2);
    CHECK((distort(k, p) - p).norm() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("distort: origin is a fixed point") {
    const CameraIntrinsics k = radial_camera(-0.1, -0.02);
    CHECK(distort(k, Vec2(0.0, 0.0)).norm() == 0.0);
}

TEST_CASE("distort: hand-computed radial value") {
    const CameraIntrinsics k = radial_camera(-0.1, -0.02);
    const Vec2 out = distort(k, Vec2(0.5, 0.0));
    CHECK(out.x() == doctest::Approx(0.4868750).epsilon(1e-12));
    CHECK(out.y() == 0.0);
}

TEST_CASE("undistort: identity without coefficients") {
    const CameraIntrinsics k = kTestCamera;
    const Vec2 p(0.4, -0.3);
    const GeoResult<Vec2> out = undistort(k, p);
    REQUIRE(out.has_value());
    CHECK((*out - p).norm() == 0.0);
}

TEST_CASE("undistort: inverse of the hand-computed value") {
    const CameraIntrinsics k = radial_camera(-0.1, -0.02);
    const GeoResult<Vec2> out = undistort(k, Vec2(0.4868750, 0.0));
    REQUIRE(out.has_value());
    CHECK(out->x() == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::abs(out->y()) < 1e-12);
}

TEST_CASE("undistort: round trip over a grid") {
    const CameraIntrinsics k = radial_camera(-0.1, -0.02);
    double max_err = 0.0;
    for (int i = 0; i <= 10; ++i) {
        for (int j = 0; j <= 10; ++j) {
            const Vec2 p(-0.6 + 0.12 * i, -0.6 + 0.12 * j);
            const GeoResult<Vec2> back = undistort(k, distort(k, p));
            REQUIRE(back.has_value());
            max_err = std::max(max_err, (*back - p).norm());
        }
    }
    CHECK(max_err < 1e-10);
}

TEST_CASE("project_pinhole: principal ray and linear offset") {
    const Pose identity;
    const GeoResult<Pixel> center = project_pinhole(kTestCamera, identity, Vec3(0, 0, 1));
    REQUIRE(center.has_value());
    CHECK(center->x() == doctest::Approx(960.0).epsilon(1e-12));
    CHECK(center->y() == doctest::Approx(540.0).epsilon(1e-12));

    const GeoResult<Pixel> off = project_pinhole(kTestCamera, identity, Vec3(0.1, 0, 1));
    REQUIRE(off.has_value());
    CHECK(off->x() == doctest::Approx(1089.73655).epsilon(1e-12));
    CHECK(off->y() == doctest::Approx(540.0).epsilon(1e-12));
}

TEST_CASE("project_pinhole: rejects points behind the camera") {
    const GeoResult<Pixel> out = project_pinhole(kTestCamera, Pose{}, Vec3(0, 0, -1));
    REQUIRE(!out.has_value());
    CHECK(out.error() == GeoError::kBehindCamera);
}

TEST_CASE("backproject_pinhole: principal point and inverse example") {
    const GeoResult<Ray> center = backproject_pinhole(kTestCamera, Pixel(960, 540));
    REQUIRE(center.has_value());
    CHECK((center->direction - Vec3(0, 0, 1)).norm() < 1e-12);

    const GeoResult<Ray> off = backproject_pinhole(kTestCamera, Pixel(1089.73655, 540));
    REQUIRE(off.has_value());
    const Vec3 expected = Vec3(0.1, 0, 1).normalized();
    CHECK((off->direction - expected).norm() < 1e-9);
}

TEST_CASE("backproject_pinhole: project round trip on random in-view points") {
    const CameraIntrinsics k = radial_camera(-0.1, -0.02);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(0.0, 1920.0), uy(0.0, 1080.0);
    for (int i = 0; i < 100; ++i) {
        const Pixel px(ux(rng), uy(rng));
        const GeoResult<Ray> ray = backproject_pinhole(k, px);
        REQUIRE(ray.has_value());
        const GeoResult<Pixel> back = project_pinhole(k, Pose{}, ray->direction);
        REQUIRE(back.has_value());
        CHECK((*back - px).norm() < 1e-8);
    }
}

TEST_CASE("refract: equal indices and normal incidence are identities") {
    const Vec3 d = Vec3(0.3, -0.2, 1.0).normalized();
    const GeoResult<Vec3> same = refract(d, Vec3(0, 0, 1), 1.334, 1.334);
    REQUIRE(same.has_value());
    CHECK((*same - d).norm() < 1e-15);

    const GeoResult<Vec3> axial = refract(Vec3(0, 0, 1), Vec3(0, 0, -1), 1.0, 1.473);
    REQUIRE(axial.has_value());
    CHECK((*axial - Vec3(0, 0, 1)).norm() < 1e-15);
}

TEST_CASE("refract: 30 degrees air to water against the scalar oracle") {
    const double theta1 = 30.0 * M_PI / 180.0;
    const Vec3 n(0, 0, 1);
    const Vec3 incident(std::sin(theta1), 0.0, std::cos(theta1));
    const GeoResult<Vec3> out = refract(incident, n, 1.0, 1.334);
    REQUIRE(out.has_value());
    const double theta2 = std::asin(std::sin(theta1) / 1.334);
    CHECK(incidence_angle(*out, n) == doctest::Approx(theta2).epsilon(1e-12));
}

TEST_CASE("refract: total internal reflection leaving the denser medium") {
    const double theta1 = 60.0 * M_PI / 180.0;
    const Vec3 incident(std::sin(theta1), 0.0, std::cos(theta1));
    const GeoResult<Vec3> out = refract(incident, Vec3(0, 0, 1), 1.334, 1.0);
    REQUIRE(!out.has_value());
    CHECK(out.error() == GeoError::kTotalInternalReflection);
}

TEST_CASE("refract: Snell's law, unit norm, coplanarity and reversibility") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> mu(0.7, 2.0);
    for (int i = 0; i < 2000; ++i) {
        const Vec3 n = aquacal::testing::random_unit(rng);
        Vec3 d = aquacal::testing::random_unit(rng);
        if (d.dot(n) > 0.0) d = -d;  // incoming against the normal
        const double mu1 = mu(rng), mu2 = mu(rng);
        const GeoResult<Vec3> t = refract(d, n, mu1, mu2);
        if (!t.has_value()) {
            CHECK(t.error() == GeoError::kTotalInternalReflection);
            continue;
        }
        CHECK(std::abs(t->norm() - 1.0) < 1e-12);
        CHECK(std::abs(mu1 * std::sin(incidence_angle(d, n)) -
                       mu2 * std::sin(incidence_angle(*t, n))) < 1e-12);
        CHECK(std::abs(t->dot(d.cross(n))) < 1e-12);  // stays in the incidence plane

        const GeoResult<Vec3> back = refract(*t, -n, mu2, mu1);
        REQUIRE(back.has_value());
        CHECK((*back - d).norm() < 1e-10);
    }
}

TEST_CASE("intersect_ray_plane: axial, parallel and oblique") {
    const GeoResult<Vec3> axial =
        intersect_ray_plane(Ray{Vec3::Zero(), Vec3(0, 0, 1)}, Vec3(0, 0, 1), 0.02);
    REQUIRE(axial.has_value());
    CHECK((*axial - Vec3(0, 0, 0.02)).norm() < 1e-15);

    const GeoResult<Vec3> parallel =
        intersect_ray_plane(Ray{Vec3::Zero(), Vec3(0, 1, 0)}, Vec3(0, 0, 1), 0.02);
    REQUIRE(!parallel.has_value());
    CHECK(parallel.error() == GeoError::kParallelRay);

    const GeoResult<Vec3> oblique = intersect_ray_plane(
        Ray{Vec3::Zero(), Vec3(1, 0, 1).normalized()}, Vec3(0, 0, 1), 0.02);
    REQUIRE(oblique.has_value());
    CHECK((*oblique - Vec3(0.02, 0, 0.02)).norm() < 1e-15);

    const GeoResult<Vec3> backward =
        intersect_ray_plane(Ray{Vec3::Zero(), Vec3(0, 0, 1)}, Vec3(0, 0, 1), -0.02);
    REQUIRE(!backward.has_value());
    CHECK(backward.error() == GeoError::kNoForwardIntersection);
}

TEST_CASE("intersect_ray_sphere: inside, ahead, and miss") {
    const Ray axial{Vec3::Zero(), Vec3(0, 0, 1)};
    const GeoResult<Vec3> from_center = intersect_ray_sphere(axial, Vec3::Zero(), 0.05);
    REQUIRE(from_center.has_value());
    CHECK((*from_center - Vec3(0, 0, 0.05)).norm() < 1e-15);

    const GeoResult<Vec3> ahead = intersect_ray_sphere(axial, Vec3(0, 0, 0.2), 0.05);
    REQUIRE(ahead.has_value());
    CHECK((*ahead - Vec3(0, 0, 0.15)).norm() < 1e-15);

    const GeoResult<Vec3> miss = intersect_ray_sphere(axial, Vec3(0.2, 0, 0), 0.05);
    REQUIRE(!miss.has_value());
    CHECK(miss.error() == GeoError::kNoIntersection);
}

TEST_CASE("port validation rejects broken parameters") {
    FlatPort flat;
    flat.thickness = 0.0;
    CHECK_THROWS_AS(flat.validate(), CalibrationError);

    DomePort dome;
    dome.decentering = Vec3(0.05, 0, 0);  // outside the inner sphere
    CHECK_THROWS_AS(dome.validate(), CalibrationError);
}

TEST_CASE("backproject_flat: axial pixel through an aligned port is undeviated") {
    FlatPort port;
    port.normal = Vec3(0, 0, 1);
    port.distance = 0.02;
    port.thickness = 0.014;
    const GeoResult<Ray> ray = backproject_flat(kTestCamera, port, Pixel(960, 540));
    REQUIRE(ray.has_value());
    CHECK((ray->origin - Vec3(0, 0, 0.034)).norm() < 1e-12);
    CHECK((ray->direction - Vec3(0, 0, 1)).norm() < 1e-12);
}

TEST_CASE("backproject_flat: ray along a tilted port normal is undeviated") {
    const ScenarioSpec spec = preset("flat_table1");
    const FlatPort port = std::get<FlatPort>(spec.housing);
    CHECK(port.normal.x() == doctest::Approx(0.08715).epsilon(1e-3));
    CHECK(port.normal.z() == doctest::Approx(0.99619).epsilon(1e-3));

    const GeoResult<Pixel> px = project_pinhole(kTestCamera, Pose{}, port.normal);
    REQUIRE(px.has_value());
    const GeoResult<Ray> ray = backproject_flat(kTestCamera, port, *px);
    REQUIRE(ray.has_value());
    CHECK((ray->direction - port.normal).norm() < 1e-9);
}

TEST_CASE("backproject_flat: compound Snell relation at both interfaces") {
    const ScenarioSpec spec = preset("flat_table1");
    const FlatPort port = std::get<FlatPort>(spec.housing);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(0.0, 1920.0), uy(0.0, 1080.0);
    for (int i = 0; i < 100; ++i) {
        const Pixel px(ux(rng), uy(rng));
        const GeoResult<Ray> air = backproject_pinhole(kTestCamera, px);
        REQUIRE(air.has_value());
        const GeoResult<Ray> water = backproject_flat(kTestCamera, port, px);
        REQUIRE(water.has_value());

        // Reconstruct the glass segment from the inner-plane hit point.
        const GeoResult<Vec3> hit_inner =
            intersect_ray_plane(*air, port.normal, port.distance);
        REQUIRE(hit_inner.has_value());
        const Vec3 dir_glass = (water->origin - *hit_inner).normalized();

        const double sin_air = std::sin(incidence_angle(air->direction, port.normal));
        const double sin_glass = std::sin(incidence_angle(dir_glass, port.normal));
        const double sin_water = std::sin(incidence_angle(water->direction, port.normal));
        CHECK(std::abs(port.mu_air * sin_air - port.mu_glass * sin_glass) < 1e-12);
        CHECK(std::abs(port.mu_glass * sin_glass - port.mu_water * sin_water) < 1e-12);
    }
}

TEST_CASE("backproject_dome: zero decentering leaves every ray collinear") {
    DomePort port;
    port.decentering = Vec3::Zero();
    port.radius = 0.05;
    port.thickness = 0.006;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(0.0, 1920.0), uy(0.0, 1080.0);
    for (int i = 0; i < 50; ++i) {
        const Pixel px(ux(rng), uy(rng));
        const GeoResult<Ray> air = backproject_pinhole(kTestCamera, px);
        const GeoResult<Ray> water = backproject_dome(kTestCamera, port, px);
        REQUIRE(air.has_value());
        REQUIRE(water.has_value());
        CHECK((water->direction - air->direction).norm() < 1e-12);
        CHECK(water->origin.cross(water->direction).norm() < 1e-12);
    }
}

TEST_CASE("backproject_dome: ray toward the sphere center is undeviated") {
    const ScenarioSpec spec = preset("dome_table1");
    const DomePort port = std::get<DomePort>(spec.housing);
    const Vec3 center_dir = port.decentering.normalized();
    const GeoResult<Pixel> px = project_pinhole(kTestCamera, Pose{}, center_dir);
    REQUIRE(px.has_value());
    const GeoResult<Ray> water = backproject_dome(kTestCamera, port, *px);
    REQUIRE(water.has_value());
    CHECK((water->direction - center_dir).norm() < 1e-9);
}

TEST_CASE("backproject_dome: Snell relation at both spherical interfaces") {
    const ScenarioSpec spec = preset("dome_table1");
    const DomePort port = std::get<DomePort>(spec.housing);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ux(0.0, 1920.0), uy(0.0, 1080.0);
    for (int i = 0; i < 100; ++i) {
        const Pixel px(ux(rng), uy(rng));
        const GeoResult<Ray> air = backproject_pinhole(kTestCamera, px);
        REQUIRE(air.has_value());
        const GeoResult<Ray> water = backproject_dome(kTestCamera, port, px);
        REQUIRE(water.has_value());

        const GeoResult<Vec3> hit_inner =
            intersect_ray_sphere(*air, port.decentering, port.inner_radius());
        REQUIRE(hit_inner.has_value());
        const Vec3 n_inner = (*hit_inner - port.decentering).normalized();
        const Vec3 n_outer = (water->origin - port.decentering).normalized();
        const Vec3 dir_glass = (water->origin - *hit_inner).normalized();

        CHECK(std::abs(port.mu_air * std::sin(incidence_angle(air->direction, n_inner)) -
                       port.mu_glass * std::sin(incidence_angle(dir_glass, n_inner))) < 1e-12);
        CHECK(std::abs(port.mu_glass * std::sin(incidence_angle(dir_glass, n_outer)) -
                       port.mu_water * std::sin(incidence_angle(water->direction, n_outer))) <
              1e-12);
    }
}

TEST_CASE("equal refractive indices reduce both ports to the pinhole ray") {
    FlatPort flat;
    flat.normal = Vec3(0.1, -0.05, 1.0).normalized();
    flat.distance = 0.02;
    flat.thickness = 0.014;
    flat.mu_air = flat.mu_glass = flat.mu_water = 1.0;

    DomePort dome;
    dome.decentering = Vec3(0.01, 0.006, 0.002);
    dome.radius = 0.05;
    dome.thickness = 0.006;
    dome.mu_air = dome.mu_glass = dome.mu_water = 1.0;

    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> ux(0.0, 1920.0), uy(0.0, 1080.0);
    for (int i = 0; i < 50; ++i) {
        const Pixel px(ux(rng), uy(rng));
        const GeoResult<Ray> air = backproject_pinhole(kTestCamera, px);
        REQUIRE(air.has_value());
        const GeoResult<Ray> through_flat = backproject_flat(kTestCamera, flat, px);
        const GeoResult<Ray> through_dome = backproject_dome(kTestCamera, dome, px);
        REQUIRE(through_flat.has_value());
        REQUIRE(through_dome.has_value());
        CHECK((through_flat->direction - air->direction).norm() < 1e-12);
        CHECK((through_dome->direction - air->direction).norm() < 1e-12);
    }
}

TEST_CASE("project_flat: axial point maps to the port-normal pixel") {
    const ScenarioSpec spec = preset("flat_table1");
    const FlatPort port = std::get<FlatPort>(spec.housing);
    const Vec3 point = 2.0 * port.normal;
    const GeoResult<Pixel> px = project_flat(kTestCamera, port, Pose{}, point);
    REQUIRE(px.has_value());
    const GeoResult<Pixel> expected = project_pinhole(kTestCamera, Pose{}, port.normal);
    REQUIRE(expected.has_value());
    CHECK((*px - *expected).norm() < 1e-9);
}

TEST_CASE("project_flat: rejects points behind the interface") {
    const ScenarioSpec spec = preset("flat_table1");
    const FlatPort port = std::get<FlatPort>(spec.housing);
    const GeoResult<Pixel> px = project_flat(kTestCamera, port, Pose{}, Vec3(0, 0, 0.02));
    REQUIRE(!px.has_value());
    CHECK(px.error() == GeoError::kBehindInterface);
}

TEST_CASE("project_flat: back-projection round trip over random pixels") {
    const ScenarioSpec spec = preset("flat_table1");
    const FlatPort port = std::get<FlatPort>(spec.housing);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ux(0.0, 1920.0), uy(0.0, 1080.0);
    double max_err = 0.0;
    for (int i = 0; i < 200; ++i) {
        const Pixel px(ux(rng), uy(rng));
        const GeoResult<Ray> water = backproject_flat(kTestCamera, port, px);
        REQUIRE(water.has_value());
        const Vec3 point = water->at(2.0);
        const GeoResult<Pixel> back = project_flat(kTestCamera, port, Pose{}, point);
        REQUIRE(back.has_value());
        max_err = std::max(max_err, (*back - px).norm());
    }
    CHECK(max_err < 1e-6);
}

TEST_CASE("project_flat: agrees with the independent bisection oracle") {
    const ScenarioSpec spec = preset("flat_table1");
    const FlatPort port = std::get<FlatPort>(spec.housing);
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> ux(100.0, 1820.0), uy(100.0, 980.0);
    double max_err = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Pixel px(ux(rng), uy(rng));
        const GeoResult<Ray> water = backproject_flat(kTestCamera, port, px);
        REQUIRE(water.has_value());
        const Vec3 point = water->at(1.5);
        const GeoResult<Pixel> solved = project_flat(kTestCamera, port, Pose{}, point);
        REQUIRE(solved.has_value());
        const Pixel oracle =
            aquacal::testing::bisection_project_flat(kTestCamera, port, Pose{}, point);
        max_err = std::max(max_err, (*solved - oracle).norm());
    }
    CHECK(max_err < 1e-8);
}

TEST_CASE("project_dome: zero decentering equals the pinhole projection") {
    DomePort port;
    port.decentering = Vec3::Zero();
    port.radius = 0.05;
    port.thickness = 0.006;
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> ux(-0.6, 0.6), uy(-0.35, 0.35);
    for (int i = 0; i < 50; ++i) {
        const Vec3 point(ux(rng), uy(rng), 1.5);
        const GeoResult<Pixel> through_dome = project_dome(kTestCamera, port, Pose{}, point);
        const GeoResult<Pixel> pinhole = project_pinhole(kTestCamera, Pose{}, point);
        REQUIRE(through_dome.has_value());
        REQUIRE(pinhole.has_value());
        CHECK((*through_dome - *pinhole).norm() < 1e-9);
    }
}

TEST_CASE("project_dome: back-projection round trip over random pixels") {
    const ScenarioSpec spec = preset("dome_table1");
    const DomePort port = std::get<DomePort>(spec.housing);
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> ux(0.0, 1920.0), uy(0.0, 1080.0);
    double max_err = 0.0;
    for (int i = 0; i < 200; ++i) {
        const Pixel px(ux(rng), uy(rng));
        const GeoResult<Ray> water = backproject_dome(kTestCamera, port, px);
        REQUIRE(water.has_value());
        const Vec3 point = water->at(2.0);
        const GeoResult<Pixel> back = project_dome(kTestCamera, port, Pose{}, point);
        REQUIRE(back.has_value());
        max_err = std::max(max_err, (*back - px).norm());
    }
    CHECK(max_err < 1e-6);
}

TEST_CASE("project_dome: point along the decentering direction is undeviated") {
    const ScenarioSpec spec = preset("dome_table1");
    const DomePort port = std::get<DomePort>(spec.housing);
    const Vec3 point = port.decentering.normalized();
    const GeoResult<Pixel> px = project_dome(kTestCamera, port, Pose{}, point);
    REQUIRE(px.has_value());
    const GeoResult<Pixel> pinhole = project_pinhole(kTestCamera, Pose{}, point);
    REQUIRE(pinhole.has_value());
    CHECK((*px - *pinhole).norm() < 1e-7);
}

TEST_SUITE_END();

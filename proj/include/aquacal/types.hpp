#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cassert>
#include <stdexcept>
#include <string>

namespace aquacal {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Image point, u = x() (right), v = y() (down), in pixels.
using Pixel = Eigen::Vector2d;

// Rigid transform mapping world coordinates to camera coordinates:
// X_cam = R * X_world + t.
struct Pose {
    Mat3 R = Mat3::Identity();
    Vec3 t = Vec3::Zero();

    Vec3 apply(const Vec3& x) const { return R * x + t; }

    Pose inverse() const { return Pose{R.transpose(), -(R.transpose() * t)}; }

    // Composition: (a * b).apply(x) == a.apply(b.apply(x)).
    friend Pose operator*(const Pose& a, const Pose& b) {
        return Pose{a.R * b.R, a.R * b.t + a.t};
    }

    bool is_valid_rotation(double tol = 1e-10) const {
        return (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
               std::abs(R.determinant() - 1.0) <= tol;
    }
};

struct Ray {
    Vec3 origin = Vec3::Zero();
    Vec3 direction = Vec3::UnitZ();  // unit norm

    Vec3 at(double lambda) const { return origin + lambda * direction; }

    // Perpendicular distance from a point to the ray's supporting line.
    double distance_to_point(const Vec3& x) const {
        const Vec3 d = x - origin;
        return (d - d.dot(direction) * direction).norm();
    }
};

// Failure modes of the pure geometric operations. These are expected
// outcomes on valid inputs (e.g. total internal reflection), so they are
// reported by value instead of thrown.
enum class GeoError {
    kTotalInternalReflection,
    kParallelRay,
    kNoForwardIntersection,
    kNoIntersection,
    kBehindCamera,
    kBehindInterface,
    kNonConvergence,
};

const char* to_string(GeoError err);

template <typename T>
class GeoResult {
  public:
    GeoResult(T value) : value_(std::move(value)), ok_(true) {}
    GeoResult(GeoError err) : error_(err), ok_(false) {}

    bool has_value() const { return ok_; }
    explicit operator bool() const { return ok_; }

    const T& value() const {
        assert(ok_);
        return value_;
    }
    const T& operator*() const { return value(); }
    const T* operator->() const { return &value(); }

    GeoError error() const {
        assert(!ok_);
        return error_;
    }

  private:
    T value_{};
    GeoError error_{};
    bool ok_;
};

// Errors raised by the calibration pipelines and file I/O.
class CalibrationError : public std::runtime_error {
  public:
    enum class Code {
        kInsufficientViews,
        kInsufficientPairs,
        kDegenerateMotion,
        kDegenerateConfiguration,
        kDegenerateHomography,
        kDegenerateGeometry,
        kNonConvergence,
        kRankDeficient,
        kViewSamplingFailed,
        kUnknownPreset,
        kParseError,
        kSchemaError,
        kValidationError,
    };

    CalibrationError(Code code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Code code() const { return code_; }

  private:
    Code code_;
};

}  // namespace aquacal

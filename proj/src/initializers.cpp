#include "aquacal/initializers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "aquacal/so3.hpp"

namespace aquacal {

namespace {

using Code = CalibrationError::Code;

// Hartley normalization: translate to the centroid, scale mean distance to
// sqrt(2).
Mat3 normalizing_transform(std::span<const Vec2> pts) {
    Vec2 mean = Vec2::Zero();
    for (const Vec2& p : pts) mean += p;
    mean /= static_cast<double>(pts.size());
    double mean_dist = 0.0;
    for (const Vec2& p : pts) mean_dist += (p - mean).norm();
    mean_dist /= static_cast<double>(pts.size());
    const double s = mean_dist < 1e-12 ? 1.0 : std::sqrt(2.0) / mean_dist;
    Mat3 T;
    T << s, 0.0, -s * mean.x(), 0.0, s, -s * mean.y(), 0.0, 0.0, 1.0;
    return T;
}

Eigen::Matrix<double, 6, 1> zhang_constraint_row(const Mat3& H, int i, int j) {
    Eigen::Matrix<double, 6, 1> v;
    v << H(0, i) * H(0, j),
        H(0, i) * H(1, j) + H(1, i) * H(0, j),
        H(1, i) * H(1, j),
        H(2, i) * H(0, j) + H(0, i) * H(2, j),
        H(2, i) * H(1, j) + H(1, i) * H(2, j),
        H(2, i) * H(2, j);
    return v;
}

}  // namespace

Mat3 homography_dlt(std::span<const Vec2> target_xy, std::span<const Vec2> image_uv) {
    if (target_xy.size() != image_uv.size()) {
        throw CalibrationError(Code::kValidationError, "homography: size mismatch");
    }
    const int n = static_cast<int>(target_xy.size());
    if (n < 4) {
        throw CalibrationError(Code::kDegenerateConfiguration,
                               "homography: need at least 4 point pairs");
    }

    const Mat3 T_target = normalizing_transform(target_xy);
    const Mat3 T_image = normalizing_transform(image_uv);

    Eigen::MatrixXd A(2 * n, 9);
    for (int i = 0; i < n; ++i) {
        const Vec3 p = T_target * Vec3(target_xy[i].x(), target_xy[i].y(), 1.0);
        const Vec3 q = T_image * Vec3(image_uv[i].x(), image_uv[i].y(), 1.0);
        const double X = p.x() / p.z();
        const double Y = p.y() / p.z();
        const double u = q.x() / q.z();
        const double v = q.y() / q.z();
        A.row(2 * i + 0) << -X, -Y, -1.0, 0.0, 0.0, 0.0, u * X, u * Y, u;
        A.row(2 * i + 1) << 0.0, 0.0, 0.0, -X, -Y, -1.0, v * X, v * Y, v;
    }

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // With a unique solution only the smallest singular value vanishes.
    if (sv(7) < 1e-9 * sv(0)) {
        throw CalibrationError(Code::kDegenerateConfiguration,
                               "homography: degenerate point configuration");
    }
    const Eigen::VectorXd h = svd.matrixV().col(8);
    Mat3 Hn;
    Hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

    Mat3 H = T_image.inverse() * Hn * T_target;
    H /= H.norm();
    if (H(2, 2) < 0.0) H = -H;
    return H;
}

CameraIntrinsics zhang_intrinsics(std::span<const Mat3> homographies,
                                  IntrinsicsConstraint constraint) {
    const int m = static_cast<int>(homographies.size());
    if (m < 2) {
        throw CalibrationError(Code::kInsufficientViews,
                               "intrinsics: need at least 2 homographies");
    }

    // Rows constrain B = K^-T K^-1 via the orthogonality of H's columns.
    // Zero skew adds B12 = 0; a shared focal adds B11 = B22.
    const int extra = constraint == IntrinsicsConstraint::kSharedFocal ? 2 : 1;
    Eigen::MatrixXd V(2 * m + extra, 6);
    for (int k = 0; k < m; ++k) {
        V.row(2 * k + 0) = zhang_constraint_row(homographies[k], 0, 1).transpose();
        V.row(2 * k + 1) = (zhang_constraint_row(homographies[k], 0, 0) -
                            zhang_constraint_row(homographies[k], 1, 1))
                               .transpose();
    }
    V.row(2 * m).setZero();
    V(2 * m, 1) = 1.0;  // B12 = 0
    if (extra == 2) {
        V.row(2 * m + 1).setZero();
        V(2 * m + 1, 0) = 1.0;
        V(2 * m + 1, 2) = -1.0;  // B11 - B22 = 0
    }

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(4) < 1e-9 * sv(0)) {
        throw CalibrationError(Code::kDegenerateMotion,
                               "intrinsics: degenerate motion, constraints are rank deficient");
    }
    Eigen::VectorXd b = svd.matrixV().col(5);
    if (b(0) < 0.0) b = -b;

    const double B11 = b(0), B12 = b(1), B22 = b(2), B13 = b(3), B23 = b(4), B33 = b(5);
    const double denom = B11 * B22 - B12 * B12;
    if (!(B11 > 0.0) || !(denom > 0.0)) {
        throw CalibrationError(Code::kDegenerateMotion,
                               "intrinsics: recovered conic is not positive definite");
    }
    const double v0 = (B12 * B13 - B11 * B23) / denom;
    const double lambda = B33 - (B13 * B13 + v0 * (B12 * B13 - B11 * B23)) / B11;
    if (!(lambda > 0.0)) {
        throw CalibrationError(Code::kDegenerateMotion,
                               "intrinsics: recovered conic is not positive definite");
    }
    const double fx = std::sqrt(lambda / B11);
    const double fy = std::sqrt(lambda * B11 / denom);
    const double u0 = -B13 * fx * fx / lambda;

    CameraIntrinsics out;
    out.model = CameraModel::kPinhole;
    out.fx = fx;
    out.fy = fy;
    out.cx = u0;
    out.cy = v0;
    if (constraint == IntrinsicsConstraint::kSharedFocal) {
        const double f = 0.5 * (fx + fy);
        out.fx = f;
        out.fy = f;
    }
    out.validate();
    return out;
}

Pose pose_from_homography(const CameraIntrinsics& intrinsics, const Mat3& H) {
    Mat3 K;
    K << intrinsics.fx, 0.0, intrinsics.cx, 0.0, intrinsics.fy, intrinsics.cy, 0.0, 0.0, 1.0;
    Mat3 M = K.inverse() * H;

    const double norm1 = M.col(0).norm();
    const double norm2 = M.col(1).norm();
    if (norm1 < 1e-12 || norm2 < 1e-12 || !M.allFinite()) {
        throw CalibrationError(Code::kDegenerateHomography, "pose: homography is degenerate");
    }
    // Cheirality: the target must sit in front of the camera.
    if (M(2, 2) < 0.0) M = -M;

    const double scale = 2.0 / (norm1 + norm2);
    const Vec3 r1 = scale * M.col(0);
    const Vec3 r2 = scale * M.col(1);

    Mat3 R0;
    R0.col(0) = r1;
    R0.col(1) = r2;
    R0.col(2) = r1.cross(r2);

    const Eigen::JacobiSVD<Mat3> svd(R0, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 R = svd.matrixU() * svd.matrixV().transpose();
    if (R.determinant() < 0.0) {
        Mat3 U = svd.matrixU();
        U.col(2) *= -1.0;
        R = U * svd.matrixV().transpose();
    }

    Pose pose;
    pose.R = R;
    pose.t = scale * M.col(2);
    if (pose.t.z() <= 0.0) {
        throw CalibrationError(Code::kDegenerateHomography, "pose: target is behind the camera");
    }
    return pose;
}

namespace {

double lower_median(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    return v[(v.size() - 1) / 2];
}

}  // namespace

Pose median_pose(std::span<const Pose> poses) {
    if (poses.empty()) {
        throw CalibrationError(Code::kValidationError, "median_pose: no poses");
    }
    std::vector<Vec3> axis_angles;
    axis_angles.reserve(poses.size());
    for (const Pose& pose : poses) {
        const Vec3 w = so3_log(pose.R);
        if (w.norm() >= M_PI - 1e-6) {
            throw CalibrationError(Code::kValidationError,
                                   "median_pose: rotation too close to pi");
        }
        axis_angles.push_back(w);
    }
    std::vector<double> comp(poses.size());
    Vec3 w_med, t_med;
    for (int c = 0; c < 3; ++c) {
        for (size_t i = 0; i < poses.size(); ++i) comp[i] = axis_angles[i][c];
        w_med[c] = lower_median(comp);
        for (size_t i = 0; i < poses.size(); ++i) comp[i] = poses[i].t[c];
        t_med[c] = lower_median(comp);
    }
    return Pose{so3_exp(w_med), t_med};
}

}  // namespace aquacal

#include "viwo/geometry.hpp"

#include <cmath>

namespace viwo {

Eigen::Matrix3d skew(const Eigen::Vector3d &w) {
  Eigen::Matrix3d W;
  W << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return W;
}

Eigen::Matrix3d exp_so3(const Eigen::Vector3d &w) {
  const double theta = w.norm();
  const Eigen::Matrix3d W = skew(w);
  if (theta < 1e-10) {
    return Eigen::Matrix3d::Identity() + W + 0.5 * W * W;
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Eigen::Matrix3d::Identity() + a * W + b * W * W;
}

Eigen::Vector3d log_so3(const Eigen::Matrix3d &R) {
  // Go through the quaternion: numerically stable away from angle pi.
  Eigen::Quaterniond q(R);
  q.normalize();
  if (q.w() < 0) {
    q.coeffs() *= -1.0;
  }
  const double vn = q.vec().norm();
  if (vn < 1e-14) {
    return 2.0 * q.vec();
  }
  const double angle = 2.0 * std::atan2(vn, q.w());
  return angle * q.vec() / vn;
}

Eigen::Matrix3d right_jacobian_so3(const Eigen::Vector3d &w) {
  const double theta = w.norm();
  const Eigen::Matrix3d W = skew(w);
  if (theta < 1e-7) {
    return Eigen::Matrix3d::Identity() - 0.5 * W + (1.0 / 6.0) * W * W;
  }
  const double t2 = theta * theta;
  const double a = (1.0 - std::cos(theta)) / t2;
  const double b = (theta - std::sin(theta)) / (t2 * theta);
  return Eigen::Matrix3d::Identity() - a * W + b * W * W;
}

Rotation Rotation::exp(const Eigen::Vector3d &w) {
  const double theta = w.norm();
  if (theta < 1e-12) {
    return Rotation(Eigen::Quaterniond(1.0, 0.5 * w.x(), 0.5 * w.y(), 0.5 * w.z()));
  }
  Eigen::AngleAxisd aa(theta, w / theta);
  return Rotation(Eigen::Quaterniond(aa));
}

Eigen::Vector3d Rotation::log() const {
  Eigen::Quaterniond q = q_;
  if (q.w() < 0) {
    q.coeffs() *= -1.0;
  }
  const double vn = q.vec().norm();
  if (vn < 1e-14) {
    return 2.0 * q.vec();
  }
  const double angle = 2.0 * std::atan2(vn, q.w());
  return angle * q.vec() / vn;
}

std::optional<Eigen::Vector2d> project_point(const Eigen::Vector3d &p_C,
                                             const CameraModel &cam) {
  if (p_C.z() <= kMinProjectionDepth) {
    return std::nullopt;
  }
  return Eigen::Vector2d(cam.fx * p_C.x() / p_C.z() + cam.cx,
                         cam.fy * p_C.y() / p_C.z() + cam.cy);
}

Eigen::Matrix<double, 2, 3> project_point_jacobian(const Eigen::Vector3d &p_C,
                                                   const CameraModel &cam) {
  const double iz = 1.0 / p_C.z();
  Eigen::Matrix<double, 2, 3> J;
  J << cam.fx * iz, 0, -cam.fx * p_C.x() * iz * iz,
      0, cam.fy * iz, -cam.fy * p_C.y() * iz * iz;
  return J;
}

Eigen::Matrix<double, 6, 6> plucker_transform_matrix(const Pose &T) {
  const Eigen::Matrix3d R = T.rot.matrix();
  const Eigen::Vector3d p_BA = -(R * T.trans); // origin of A expressed in B
  Eigen::Matrix<double, 6, 6> M = Eigen::Matrix<double, 6, 6>::Zero();
  M.block<3, 3>(0, 0) = R;
  M.block<3, 3>(0, 3) = skew(p_BA) * R;
  M.block<3, 3>(3, 3) = R;
  return M;
}

PluckerLine transform_plucker(const Pose &T, const PluckerLine &L) {
  const Eigen::Matrix3d R = T.rot.matrix();
  const Eigen::Vector3d p_BA = -(R * T.trans);
  PluckerLine out;
  out.v = R * L.v;
  out.n = R * L.n + p_BA.cross(out.v);
  return out;
}

Eigen::Matrix3d line_projection_matrix(const CameraModel &cam) {
  Eigen::Matrix3d K;
  K << cam.fy, 0, 0,
      0, cam.fx, 0,
      -cam.fy * cam.cx, -cam.fx * cam.cy, cam.fx * cam.fy;
  return K;
}

std::optional<Line2D> project_line(const PluckerLine &L_C, const CameraModel &cam) {
  if (L_C.n.norm() < kMinLineNormal) {
    return std::nullopt;
  }
  Line2D out;
  out.l = line_projection_matrix(cam) * L_C.n;
  return out;
}

} // namespace viwo

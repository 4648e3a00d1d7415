#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <optional>

namespace viwo {

/// Skew-symmetric matrix such that skew(a) * b == a.cross(b).
Eigen::Matrix3d skew(const Eigen::Vector3d &w);

/// SO(3) exponential map (rotation vector -> rotation matrix).
Eigen::Matrix3d exp_so3(const Eigen::Vector3d &w);

/// SO(3) logarithm map (rotation matrix -> rotation vector).
Eigen::Vector3d log_so3(const Eigen::Matrix3d &R);

/// Right Jacobian of the SO(3) exponential map.
Eigen::Matrix3d right_jacobian_so3(const Eigen::Vector3d &w);

/**
 * Rotation stored as a unit quaternion, exposed as a 3x3 matrix.
 * Composition renormalizes, so long chains stay orthonormal.
 */
class Rotation {
public:
  Rotation() : q_(Eigen::Quaterniond::Identity()) {}
  explicit Rotation(const Eigen::Matrix3d &R) : q_(R) { q_.normalize(); }
  explicit Rotation(const Eigen::Quaterniond &q) : q_(q) { q_.normalize(); }

  static Rotation exp(const Eigen::Vector3d &w);
  Eigen::Vector3d log() const;

  Eigen::Matrix3d matrix() const { return q_.toRotationMatrix(); }
  const Eigen::Quaterniond &quat() const { return q_; }

  Rotation inverse() const { return Rotation(q_.conjugate()); }

  Rotation operator*(const Rotation &rhs) const { return Rotation(q_ * rhs.q_); }
  Eigen::Vector3d operator*(const Eigen::Vector3d &p) const { return q_ * p; }

private:
  Eigen::Quaterniond q_;
};

/**
 * Rigid transform from frame A to frame B.
 * rot maps A-frame vectors into B, trans is the position of B's origin
 * expressed in A. A point transforms as p_B = rot * (p_A - trans).
 */
struct Pose {
  Rotation rot;
  Eigen::Vector3d trans = Eigen::Vector3d::Zero();

  Pose() = default;
  Pose(const Rotation &R, const Eigen::Vector3d &t) : rot(R), trans(t) {}

  static Pose identity() { return Pose(); }

  Eigen::Vector3d transform(const Eigen::Vector3d &p_A) const {
    return rot * (p_A - trans);
  }

  /// T_BtoA from T_AtoB.
  Pose inverse() const { return Pose(rot.inverse(), -(rot * trans)); }

  /// Composition (*this: B->C) applied after rhs (A->B), giving A->C.
  Pose operator*(const Pose &rhs) const {
    return Pose(rot * rhs.rot, rhs.trans + rhs.rot.inverse() * trans);
  }
};

/// Pinhole camera with rigid IMU-to-camera extrinsics.
struct CameraModel {
  double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;
  int width = 0, height = 0;
  Rotation R_ItoC;                                 // IMU frame -> camera frame
  Eigen::Vector3d p_IinC = Eigen::Vector3d::Zero(); // IMU origin in camera frame

  Eigen::Matrix3d K() const {
    Eigen::Matrix3d K;
    K << fx, 0, cx, 0, fy, cy, 0, 0, 1;
    return K;
  }

  /// Unit-depth bearing in camera frame for a pixel.
  Eigen::Vector3d bearing(double u, double v) const {
    return {(u - cx) / fx, (v - cy) / fy, 1.0};
  }

  bool in_image(const Eigen::Vector2d &uv, double margin = 0.0) const {
    return uv.x() >= margin && uv.x() <= width - 1 - margin && uv.y() >= margin &&
           uv.y() <= height - 1 - margin;
  }

  /// Camera pose G->C given the IMU pose G->I.
  Pose camera_pose(const Pose &T_GtoI) const {
    const Pose T_ItoC(R_ItoC, -(R_ItoC.inverse() * p_IinC));
    return T_ItoC * T_GtoI;
  }
};

/**
 * 3D line in Plucker coordinates. v is the unit direction and n the moment
 * p x v for any point p on the line, so |n| is the distance to the origin and
 * n.dot(v) == 0. (n, v) and (-n, -v) denote the same line.
 */
struct PluckerLine {
  Eigen::Vector3d n = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::UnitX();

  double constraint_error() const { return std::abs(n.dot(v)); }

  /// Point on the line closest to the origin.
  Eigen::Vector3d closest_point() const { return v.cross(n) / v.squaredNorm(); }
};

/// Infinite 2D line in homogeneous pixel coordinates: l1*u + l2*v + l3 = 0.
struct Line2D {
  Eigen::Vector3d l = Eigen::Vector3d::Zero();
};

/// Depth below this is treated as behind the camera.
inline constexpr double kMinProjectionDepth = 1e-4;

/// Part of n_C smaller than this makes a line projection degenerate.
inline constexpr double kMinLineNormal = 1e-12;

/// Pinhole projection of a camera-frame point; empty if depth <= threshold.
std::optional<Eigen::Vector2d> project_point(const Eigen::Vector3d &p_C,
                                             const CameraModel &cam);

/// Jacobian of the pinhole projection w.r.t. the camera-frame point (2x3).
Eigen::Matrix<double, 2, 3> project_point_jacobian(const Eigen::Vector3d &p_C,
                                                   const CameraModel &cam);

/// 6x6 matrix form of a Plucker transform for pose T (A->B), acting on [n; v].
Eigen::Matrix<double, 6, 6> plucker_transform_matrix(const Pose &T);

/// Transform a Plucker line by pose T (A->B).
PluckerLine transform_plucker(const Pose &T, const PluckerLine &L);

/// Intrinsic matrix mapping a camera-frame line moment to a pixel line.
Eigen::Matrix3d line_projection_matrix(const CameraModel &cam);

/// Project a camera-frame Plucker line to a pixel line; empty if degenerate.
std::optional<Line2D> project_line(const PluckerLine &L_C, const CameraModel &cam);

} // namespace viwo

#pragma once

#include <Eigen/Core>
#include <vector>

#include "viwo/dataset.hpp"

namespace viwo {

enum class AteStatus { Ok, InsufficientOverlap };

/// Absolute trajectory error after rigid (no-scale) alignment.
struct AteReport {
  double rmse_pos = 0.0;     // m
  double rmse_rot_deg = 0.0; // deg, geodesic angle of the aligned orientation error
  long pairs = 0;            // associated (est, gt) pose pairs
  Eigen::Matrix3d R_align = Eigen::Matrix3d::Identity(); // maps est into gt
  Eigen::Vector3d t_align = Eigen::Vector3d::Zero();
  std::vector<double> errors_pos;     // per pair, m
  std::vector<double> errors_rot_deg; // per pair, deg
};

/**
 * Closed-form least-squares rigid alignment (rotation + translation, no
 * scale) minimizing sum |R*src_i + t - dst_i|^2 over corresponding points.
 * Requires equally sized, non-empty inputs.
 */
void align_umeyama(const std::vector<Eigen::Vector3d> &src,
                   const std::vector<Eigen::Vector3d> &dst, Eigen::Matrix3d &R,
                   Eigen::Vector3d &t);

/**
 * Associate est to gt by nearest timestamp within max_dt, align the
 * associated positions, and report position / orientation RMSE. Fails with
 * InsufficientOverlap when fewer than 10 pairs associate.
 */
AteStatus evaluate_ate(const std::vector<TumPose> &est,
                       const std::vector<TumPose> &gt, AteReport &out,
                       double max_dt = 0.01);

} // namespace viwo

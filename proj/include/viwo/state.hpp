#pragma once

#include <Eigen/Core>
#include <vector>

#include "viwo/geometry.hpp"

namespace viwo {

/**
 * Error-state layout. The attitude error is left-multiplicative and
 * small-angle: R_true ~= (I - skew(dtheta)) * R_est, injected exactly as
 * R <- exp_so3(-dtheta) * R. All other errors are additive.
 *
 * IMU block (15): [dtheta, dp, dv, dbg, dba], then 6 per clone [dtheta, dp],
 * clones ordered oldest to newest.
 */
inline constexpr int kImuErrDim = 15;
inline constexpr int kCloneErrDim = 6;

struct ImuState {
  Rotation R_GtoI;                                  // global -> IMU
  Eigen::Vector3d p_IinG = Eigen::Vector3d::Zero(); // IMU position in global
  Eigen::Vector3d v_IinG = Eigen::Vector3d::Zero(); // IMU velocity in global
  Eigen::Vector3d bg = Eigen::Vector3d::Zero();     // gyroscope bias
  Eigen::Vector3d ba = Eigen::Vector3d::Zero();     // accelerometer bias

  Pose pose() const { return Pose(R_GtoI, p_IinG); }
};

struct Clone {
  double t = 0.0;
  Rotation R_GtoI;
  Eigen::Vector3d p_IinG = Eigen::Vector3d::Zero();

  Pose pose() const { return Pose(R_GtoI, p_IinG); }
};

/// Full filter state: IMU state, sliding window of pose clones, covariance.
struct FilterState {
  double time = 0.0;
  ImuState imu;
  std::vector<Clone> clones; // oldest first
  Eigen::MatrixXd P;         // error-state covariance
  int max_clones = 11;

  FilterState() : P(Eigen::MatrixXd::Zero(kImuErrDim, kImuErrDim)) {}

  int dim() const { return kImuErrDim + kCloneErrDim * static_cast<int>(clones.size()); }
  int clone_index(double t) const; // index into clones, -1 if absent
  int clone_offset(int idx) const { return kImuErrDim + kCloneErrDim * idx; }

  /// Apply an error-state correction (dimension must equal dim()).
  void inject(const Eigen::VectorXd &dx);

  /// Force exact symmetry of the covariance.
  void symmetrize() { P = (0.5 * (P + P.transpose())).eval(); }

  double min_covariance_eigenvalue() const;
};

/// Stacked linearized measurement r ~= H * dx with iid noise sigma^2 I.
struct StackedResidual {
  Eigen::MatrixXd H;
  Eigen::VectorXd r;
  double sigma = 1.0;
};

/// 95% quantile of the chi-square distribution with dof degrees of freedom.
double chi2_quantile_95(int dof);

enum class NullspaceStatus { Ok, RankDeficientNoNull };

/**
 * Project (H_x, r) onto the left nullspace of H_f, removing the dependence on
 * the feature error. Output has rows(H_x) - rank(H_f) rows; the projection is
 * orthonormal so iid measurement noise stays iid.
 */
NullspaceStatus nullspace_project(const Eigen::MatrixXd &H_x,
                                  const Eigen::MatrixXd &H_f,
                                  const Eigen::VectorXd &r,
                                  Eigen::MatrixXd &H_out, Eigen::VectorXd &r_out);

enum class UpdateStatus { Applied, GateRejected, NumericalFailure };

struct UpdateResult {
  UpdateStatus status = UpdateStatus::Applied;
  double gamma = 0.0;     // Mahalanobis distance of the residual
  double threshold = 0.0; // gate threshold actually used (0 when gating is off)
};

/**
 * EKF measurement update with Joseph-form covariance. When chi2_multiplier > 0
 * the update is gated on gamma = r' S^-1 r against chi2_95(rows) *
 * chi2_multiplier and a rejected update leaves the state untouched.
 * chi2_multiplier <= 0 disables the gate (used for batches whose parts were
 * gated individually). Tall systems are QR-compressed before the update.
 */
UpdateResult ekf_update(FilterState &state, const StackedResidual &sr,
                        double chi2_multiplier);

enum class AugmentStatus { Ok, WindowFull, DuplicateTimestamp };

/// Clone the current IMU pose into the window (stochastic cloning).
AugmentStatus augment_clone(FilterState &state, double t);

/// Drop the oldest clone and its covariance rows/columns.
void marginalize_oldest(FilterState &state);

} // namespace viwo

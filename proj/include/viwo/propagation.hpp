#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "viwo/state.hpp"

namespace viwo {

struct ImuSample {
  double t = 0.0;
  Eigen::Vector3d w = Eigen::Vector3d::Zero(); // rad/s, body frame
  Eigen::Vector3d a = Eigen::Vector3d::Zero(); // m/s^2, specific force
};

struct WheelSample {
  double t = 0.0;
  double vx = 0.0; // forward speed in the odometer frame, m/s
  double wz = 0.0; // yaw rate about the odometer z axis, rad/s
};

/// Continuous-time IMU noise densities and bias random-walk intensities.
struct ImuNoise {
  double gyro_nd = 1.7e-4;  // rad/s/sqrt(Hz)
  double accel_nd = 2.0e-3; // m/s^2/sqrt(Hz)
  double gyro_rw = 1.0e-5;  // rad/s^2/sqrt(Hz)
  double accel_rw = 1.0e-4; // m/s^3/sqrt(Hz)
};

struct OdometerExtrinsics {
  Rotation R_ItoO;                                  // IMU frame -> odometer frame
  Eigen::Vector3d p_IinO = Eigen::Vector3d::Zero(); // IMU origin in odometer frame
};

inline Eigen::Vector3d gravity_vector(double g) { return {0.0, 0.0, -g}; }

enum class PropagateStatus { Ok, NonMonotonic, TimestampGap, NotCovered };

/// Largest tolerated gap between consecutive IMU samples, seconds.
inline constexpr double kMaxImuGap = 0.1;

/**
 * Propagate the state (mean + covariance) to t_target using buffered IMU
 * samples that cover [state.time, t_target]. Boundary samples are linearly
 * interpolated to the exact endpoints; each interval uses trapezoidal
 * integration. Clone blocks are untouched.
 */
PropagateStatus propagate(FilterState &state, std::span<const ImuSample> samples,
                          double t_target, const ImuNoise &noise, double g);

/**
 * Discrete error-state transition and noise for one IMU interval, linearized
 * about the current estimate. Exposed for direct verification against
 * numerical differentiation of the mean propagation.
 */
void imu_step_jacobian(const ImuState &x0, const ImuSample &s0, const ImuSample &s1,
                       const ImuNoise &noise, double g,
                       Eigen::Matrix<double, 15, 15> &Phi,
                       Eigen::Matrix<double, 15, 15> &Qd);

/// One trapezoidal mean-propagation step from s0.t to s1.t.
ImuState imu_step_mean(const ImuState &x0, const ImuSample &s0, const ImuSample &s1,
                       double g);

/**
 * Predicted wheel measurement [vx, wz] from the current state: the odometer
 * origin velocity rotated into the odometer frame (including the lever-arm
 * term from body rotation) and the odometer-frame yaw rate. w_imu is the
 * latest gyro reading, bias-corrected internally.
 */
Eigen::Vector2d predict_wheel(const ImuState &x, const OdometerExtrinsics &ext,
                              const Eigen::Vector3d &w_imu);

/// Jacobian of predict_wheel w.r.t. the IMU error block (2x15).
Eigen::Matrix<double, 2, 15> wheel_jacobian(const ImuState &x,
                                            const OdometerExtrinsics &ext,
                                            const Eigen::Vector3d &w_imu);

struct WheelNoise {
  double v_std = 0.02; // m/s
  double w_std = 0.01; // rad/s
};

/**
 * EKF update with one wheel sample. The caller must have propagated the state
 * to (within 5 ms of) the sample time. Gated per sample; wheel slip shows up
 * as GateRejected.
 */
UpdateResult wheel_update(FilterState &state, const WheelSample &ws,
                          const OdometerExtrinsics &ext, const WheelNoise &noise,
                          const Eigen::Vector3d &w_imu, double chi2_multiplier);

} // namespace viwo

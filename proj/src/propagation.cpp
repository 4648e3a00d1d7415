#include "viwo/propagation.hpp"

#include <algorithm>
#include <cmath>

namespace viwo {

namespace {

ImuSample interpolate(const ImuSample &a, const ImuSample &b, double t) {
  if (b.t == a.t) {
    return a;
  }
  const double lam = (t - a.t) / (b.t - a.t);
  ImuSample out;
  out.t = t;
  out.w = (1.0 - lam) * a.w + lam * b.w;
  out.a = (1.0 - lam) * a.a + lam * b.a;
  return out;
}

} // namespace

ImuState imu_step_mean(const ImuState &x0, const ImuSample &s0, const ImuSample &s1,
                       double g) {
  const double dt = s1.t - s0.t;
  const Eigen::Vector3d grav = gravity_vector(g);
  const Eigen::Vector3d w_hat = 0.5 * (s0.w + s1.w) - x0.bg;

  ImuState x1 = x0;
  x1.R_GtoI = Rotation::exp(-w_hat * dt) * x0.R_GtoI;

  const Eigen::Matrix3d R0t = x0.R_GtoI.matrix().transpose();
  const Eigen::Matrix3d R1t = x1.R_GtoI.matrix().transpose();
  const Eigen::Vector3d a_w0 = R0t * (s0.a - x0.ba) + grav;
  const Eigen::Vector3d a_w1 = R1t * (s1.a - x0.ba) + grav;

  x1.v_IinG = x0.v_IinG + 0.5 * (a_w0 + a_w1) * dt;
  x1.p_IinG = x0.p_IinG + 0.5 * (x0.v_IinG + x1.v_IinG) * dt;
  return x1;
}

void imu_step_jacobian(const ImuState &x0, const ImuSample &s0, const ImuSample &s1,
                       const ImuNoise &noise, double g,
                       Eigen::Matrix<double, 15, 15> &Phi,
                       Eigen::Matrix<double, 15, 15> &Qd) {
  const double dt = s1.t - s0.t;
  const Eigen::Vector3d w_hat = 0.5 * (s0.w + s1.w) - x0.bg;
  const Eigen::Matrix3d dR = exp_so3(-w_hat * dt);
  const Eigen::Matrix3d R0t = x0.R_GtoI.matrix().transpose();
  const Eigen::Matrix3d R1t = (dR * x0.R_GtoI.matrix()).transpose();
  const Eigen::Matrix3d A0 = skew(s0.a - x0.ba);
  const Eigen::Matrix3d A1 = skew(s1.a - x0.ba);

  // Exact differential of the trapezoidal mean step w.r.t. the error state.
  const Eigen::Matrix3d Phi_tt = dR;
  const Eigen::Matrix3d Phi_tbg = -right_jacobian_so3(w_hat * dt) * dt;
  const Eigen::Matrix3d Phi_vt = -0.5 * dt * (R0t * A0 + R1t * A1 * Phi_tt);
  const Eigen::Matrix3d Phi_vbg = -0.5 * dt * R1t * A1 * Phi_tbg;
  const Eigen::Matrix3d Phi_vba = -0.5 * dt * (R0t + R1t);

  Phi.setIdentity();
  Phi.block<3, 3>(0, 0) = Phi_tt;
  Phi.block<3, 3>(0, 9) = Phi_tbg;
  Phi.block<3, 3>(6, 0) = Phi_vt;
  Phi.block<3, 3>(6, 9) = Phi_vbg;
  Phi.block<3, 3>(6, 12) = Phi_vba;
  Phi.block<3, 3>(3, 0) = 0.5 * dt * Phi_vt;
  Phi.block<3, 3>(3, 6) = dt * Eigen::Matrix3d::Identity();
  Phi.block<3, 3>(3, 9) = 0.5 * dt * Phi_vbg;
  Phi.block<3, 3>(3, 12) = 0.5 * dt * Phi_vba;

  Eigen::Matrix<double, 15, 12> G = Eigen::Matrix<double, 15, 12>::Zero();
  G.block<3, 3>(0, 0) = -Eigen::Matrix3d::Identity();
  G.block<3, 3>(6, 3) = -R0t;
  G.block<3, 3>(9, 6) = Eigen::Matrix3d::Identity();
  G.block<3, 3>(12, 9) = Eigen::Matrix3d::Identity();

  Eigen::Matrix<double, 12, 12> Qc = Eigen::Matrix<double, 12, 12>::Zero();
  Qc.block<3, 3>(0, 0) = noise.gyro_nd * noise.gyro_nd * Eigen::Matrix3d::Identity();
  Qc.block<3, 3>(3, 3) = noise.accel_nd * noise.accel_nd * Eigen::Matrix3d::Identity();
  Qc.block<3, 3>(6, 6) = noise.gyro_rw * noise.gyro_rw * Eigen::Matrix3d::Identity();
  Qc.block<3, 3>(9, 9) = noise.accel_rw * noise.accel_rw * Eigen::Matrix3d::Identity();

  const Eigen::Matrix<double, 15, 15> GQG = G * Qc * G.transpose();
  Qd = 0.5 * dt * (GQG + Phi * GQG * Phi.transpose());
  (void)g;
}

PropagateStatus propagate(FilterState &state, std::span<const ImuSample> samples,
                          double t_target, const ImuNoise &noise, double g) {
  if (t_target < state.time) {
    return PropagateStatus::NonMonotonic;
  }
  if (t_target == state.time) {
    return PropagateStatus::Ok;
  }
  for (size_t i = 1; i < samples.size(); i++) {
    if (samples[i].t < samples[i - 1].t) {
      return PropagateStatus::NonMonotonic;
    }
  }
  if (samples.empty() || samples.front().t > state.time ||
      samples.back().t < t_target) {
    return PropagateStatus::NotCovered;
  }

  // Build the per-interval sample sequence covering [state.time, t_target],
  // interpolating the two boundary samples to the exact endpoints.
  std::vector<ImuSample> seq;
  for (size_t i = 0; i + 1 < samples.size(); i++) {
    const ImuSample &a = samples[i];
    const ImuSample &b = samples[i + 1];
    if (b.t <= state.time) {
      continue;
    }
    if (a.t >= t_target) {
      break;
    }
    if (b.t - a.t > kMaxImuGap) {
      return PropagateStatus::TimestampGap;
    }
    if (seq.empty()) {
      seq.push_back(a.t < state.time ? interpolate(a, b, state.time) : a);
    }
    seq.push_back(b.t > t_target ? interpolate(a, b, t_target) : b);
  }
  if (seq.size() < 2) {
    return PropagateStatus::NotCovered;
  }

  const int dim = state.dim();
  for (size_t i = 0; i + 1 < seq.size(); i++) {
    if (seq[i + 1].t <= seq[i].t) {
      continue;
    }
    Eigen::Matrix<double, 15, 15> Phi, Qd;
    imu_step_jacobian(state.imu, seq[i], seq[i + 1], noise, g, Phi, Qd);
    state.imu = imu_step_mean(state.imu, seq[i], seq[i + 1], g);

    state.P.topLeftCorner<15, 15>() =
        (Phi * state.P.topLeftCorner<15, 15>() * Phi.transpose() + Qd).eval();
    if (dim > kImuErrDim) {
      state.P.topRightCorner(15, dim - kImuErrDim) =
          (Phi * state.P.topRightCorner(15, dim - kImuErrDim)).eval();
      state.P.bottomLeftCorner(dim - kImuErrDim, 15) =
          state.P.topRightCorner(15, dim - kImuErrDim).transpose();
    }
  }
  state.symmetrize();
  state.time = t_target;
  return PropagateStatus::Ok;
}

Eigen::Vector2d predict_wheel(const ImuState &x, const OdometerExtrinsics &ext,
                              const Eigen::Vector3d &w_imu) {
  const Eigen::Matrix3d R_ItoO = ext.R_ItoO.matrix();
  const Eigen::Vector3d w = w_imu - x.bg;
  const Eigen::Vector3d p_OinI = -(R_ItoO.transpose() * ext.p_IinO);
  const Eigen::Vector3d v_OinI = x.R_GtoI * x.v_IinG + w.cross(p_OinI);
  const Eigen::Vector3d v_O = R_ItoO * v_OinI;
  const Eigen::Vector3d w_O = R_ItoO * w;
  return {v_O.x(), w_O.z()};
}

Eigen::Matrix<double, 2, 15> wheel_jacobian(const ImuState &x,
                                            const OdometerExtrinsics &ext,
                                            const Eigen::Vector3d & /*w_imu*/) {
  const Eigen::Matrix3d R_ItoO = ext.R_ItoO.matrix();
  const Eigen::Matrix3d R = x.R_GtoI.matrix();
  const Eigen::Vector3d p_OinI = -(R_ItoO.transpose() * ext.p_IinO);

  Eigen::Matrix<double, 2, 15> H = Eigen::Matrix<double, 2, 15>::Zero();
  const Eigen::RowVector3d ex_RIO = R_ItoO.row(0);
  const Eigen::RowVector3d ez_RIO = R_ItoO.row(2);
  H.block<1, 3>(0, 0) = ex_RIO * skew(R * x.v_IinG);
  H.block<1, 3>(0, 6) = ex_RIO * R;
  H.block<1, 3>(0, 9) = ex_RIO * skew(p_OinI);
  H.block<1, 3>(1, 9) = -ez_RIO;
  return H;
}

UpdateResult wheel_update(FilterState &state, const WheelSample &ws,
                          const OdometerExtrinsics &ext, const WheelNoise &noise,
                          const Eigen::Vector3d &w_imu, double chi2_multiplier) {
  const Eigen::Vector2d z(ws.vx, ws.wz);
  const Eigen::Vector2d z_hat = predict_wheel(state.imu, ext, w_imu);
  const Eigen::Matrix<double, 2, 15> H_imu = wheel_jacobian(state.imu, ext, w_imu);

  // Whiten so both rows share unit noise.
  StackedResidual sr;
  sr.sigma = 1.0;
  sr.H = Eigen::MatrixXd::Zero(2, state.dim());
  sr.H.block<1, 15>(0, 0) = H_imu.row(0) / noise.v_std;
  sr.H.block<1, 15>(1, 0) = H_imu.row(1) / noise.w_std;
  sr.r = Eigen::Vector2d((z.x() - z_hat.x()) / noise.v_std,
                         (z.y() - z_hat.y()) / noise.w_std);
  return ekf_update(state, sr, chi2_multiplier);
}

} // namespace viwo

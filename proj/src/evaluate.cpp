#include "viwo/evaluate.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace viwo {

void align_umeyama(const std::vector<Eigen::Vector3d> &src,
                   const std::vector<Eigen::Vector3d> &dst, Eigen::Matrix3d &R,
                   Eigen::Vector3d &t) {
  const double n = static_cast<double>(src.size());
  Eigen::Vector3d mu_s = Eigen::Vector3d::Zero();
  Eigen::Vector3d mu_d = Eigen::Vector3d::Zero();
  for (size_t i = 0; i < src.size(); i++) {
    mu_s += src[i];
    mu_d += dst[i];
  }
  mu_s /= n;
  mu_d /= n;

  Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
  for (size_t i = 0; i < src.size(); i++) {
    H += (src[i] - mu_s) * (dst[i] - mu_d).transpose();
  }
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(H, Eigen::ComputeFullU |
                                                     Eigen::ComputeFullV);
  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  Eigen::Vector3d s = Eigen::Vector3d::Ones();
  if ((v * u.transpose()).determinant() < 0.0) {
    s(2) = -1.0;
  }
  R = v * s.asDiagonal() * u.transpose();
  t = mu_d - R * mu_s;
}

AteStatus evaluate_ate(const std::vector<TumPose> &est,
                       const std::vector<TumPose> &gt, AteReport &out,
                       double max_dt) {
  out = AteReport();

  std::vector<Eigen::Vector3d> p_est, p_gt;
  std::vector<Eigen::Quaterniond> q_est, q_gt;
  for (const TumPose &e : est) {
    const auto it = std::lower_bound(
        gt.begin(), gt.end(), e.t,
        [](const TumPose &g, double time) { return g.t < time; });
    const TumPose *best = nullptr;
    if (it != gt.end()) {
      best = &*it;
    }
    if (it != gt.begin()) {
      const TumPose &prev = *(it - 1);
      if (!best || std::abs(prev.t - e.t) < std::abs(best->t - e.t)) {
        best = &prev;
      }
    }
    if (!best || std::abs(best->t - e.t) > max_dt) {
      continue;
    }
    p_est.push_back(e.p);
    p_gt.push_back(best->p);
    q_est.push_back(e.q);
    q_gt.push_back(best->q);
  }

  if (p_est.size() < 10) {
    return AteStatus::InsufficientOverlap;
  }
  out.pairs = static_cast<long>(p_est.size());
  align_umeyama(p_est, p_gt, out.R_align, out.t_align);

  double sum_pos = 0.0;
  double sum_rot = 0.0;
  for (size_t i = 0; i < p_est.size(); i++) {
    const double ep = (out.R_align * p_est[i] + out.t_align - p_gt[i]).norm();
    const Eigen::Matrix3d r_err = out.R_align * q_est[i].toRotationMatrix() *
                                  q_gt[i].toRotationMatrix().transpose();
    const double er = Eigen::AngleAxisd(r_err).angle() * 180.0 / M_PI;
    out.errors_pos.push_back(ep);
    out.errors_rot_deg.push_back(er);
    sum_pos += ep * ep;
    sum_rot += er * er;
  }
  out.rmse_pos = std::sqrt(sum_pos / static_cast<double>(out.pairs));
  out.rmse_rot_deg = std::sqrt(sum_rot / static_cast<double>(out.pairs));
  return AteStatus::Ok;
}

} // namespace viwo

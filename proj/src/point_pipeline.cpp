#include "viwo/point_pipeline.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace viwo {

PointTriStatus triangulate_point(const std::vector<Eigen::Vector2d> &uvs,
                                 const std::vector<Pose> &T_GtoCs,
                                 const CameraModel &cam,
                                 const PointTriangulationConfig &cfg,
                                 TriangulatedPoint &out) {
  const size_t m = uvs.size();
  if (m < 2 || T_GtoCs.size() != m) {
    return PointTriStatus::InsufficientBaseline;
  }

  double max_baseline = 0.0;
  for (size_t i = 0; i < m; i++) {
    for (size_t j = i + 1; j < m; j++) {
      max_baseline = std::max(max_baseline, (T_GtoCs[i].trans - T_GtoCs[j].trans).norm());
    }
  }
  if (max_baseline <= cfg.min_baseline) {
    return PointTriStatus::InsufficientBaseline;
  }

  // Linear seed: each bearing constrains skew(b) * R * (p - c) = 0.
  Eigen::MatrixXd A(3 * m, 3);
  Eigen::VectorXd b(3 * m);
  for (size_t i = 0; i < m; i++) {
    const Eigen::Matrix3d Bx = skew(cam.bearing(uvs[i].x(), uvs[i].y()));
    const Eigen::Matrix3d R = T_GtoCs[i].rot.matrix();
    A.block<3, 3>(3 * i, 0) = Bx * R;
    b.segment<3>(3 * i) = Bx * R * T_GtoCs[i].trans;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double cond = svd.singularValues()(0) / svd.singularValues()(2);
  if (!std::isfinite(cond) || cond > cfg.max_condition) {
    return PointTriStatus::IllConditioned;
  }
  Eigen::Vector3d p = svd.solve(b);
  if (!p.allFinite()) {
    return PointTriStatus::IllConditioned;
  }

  // Gauss-Newton refinement on the pixel reprojection error.
  for (int it = 0; it < cfg.gn_iterations; it++) {
    Eigen::Matrix3d Htp = Eigen::Matrix3d::Zero();
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
    bool ok = true;
    for (size_t i = 0; i < m; i++) {
      const Eigen::Vector3d p_C = T_GtoCs[i].transform(p);
      const auto uv_hat = project_point(p_C, cam);
      if (!uv_hat) {
        ok = false;
        break;
      }
      const Eigen::Matrix<double, 2, 3> J =
          project_point_jacobian(p_C, cam) * T_GtoCs[i].rot.matrix();
      const Eigen::Vector2d r = uvs[i] - *uv_hat;
      Htp += J.transpose() * J;
      g += J.transpose() * r;
    }
    if (!ok) {
      break;
    }
    const Eigen::Vector3d dp = (Htp + 1e-9 * Eigen::Matrix3d::Identity()).ldlt().solve(g);
    if (!dp.allFinite()) {
      break;
    }
    p += dp;
    if (dp.norm() < 1e-10) {
      break;
    }
  }

  double sum_reproj = 0.0;
  for (size_t i = 0; i < m; i++) {
    const Eigen::Vector3d p_C = T_GtoCs[i].transform(p);
    if (p_C.z() <= kMinProjectionDepth) {
      return PointTriStatus::BehindCamera;
    }
    sum_reproj += (uvs[i] - *project_point(p_C, cam)).norm();
  }
  if ((p - T_GtoCs[0].trans).norm() > cfg.max_distance) {
    return PointTriStatus::IllConditioned;
  }

  out.p_G = p;
  out.condition = cond;
  out.mean_reproj = sum_reproj / static_cast<double>(m);
  return PointTriStatus::Ok;
}

double motion_consistency_residual(const Eigen::Vector3d &p_G,
                                   const std::vector<Eigen::Vector2d> &uvs,
                                   const std::vector<Pose> &T_GtoCs,
                                   const CameraModel &cam) {
  double sum = 0.0;
  int n = 0;
  for (size_t i = 0; i < uvs.size(); i++) {
    const auto uv_hat = project_point(T_GtoCs[i].transform(p_G), cam);
    if (!uv_hat) {
      continue;
    }
    sum += (uvs[i] - *uv_hat).norm();
    n++;
  }
  return n > 0 ? sum / n : std::numeric_limits<double>::infinity();
}

void point_measurement_jacobians(const Clone &clone, const CameraModel &cam,
                                 const Eigen::Vector3d &p_G,
                                 Eigen::Matrix<double, 2, 6> &H_clone,
                                 Eigen::Matrix<double, 2, 3> &H_f) {
  const Eigen::Matrix3d R = clone.R_GtoI.matrix();
  const Eigen::Vector3d p_I = R * (p_G - clone.p_IinG);
  const Eigen::Vector3d p_C = cam.R_ItoC * p_I + cam.p_IinC;
  const Eigen::Matrix<double, 2, 3> Jp =
      project_point_jacobian(p_C, cam) * cam.R_ItoC.matrix();
  H_clone.block<2, 3>(0, 0) = Jp * skew(p_I);
  H_clone.block<2, 3>(0, 3) = -Jp * R;
  H_f = Jp * R;
}

namespace {

/// Gather observations that have a matching clone; outputs are index-aligned.
void gather_clone_obs(const FilterState &state, const PointTrack &track,
                      const CameraModel &cam, std::vector<Eigen::Vector2d> &uvs,
                      std::vector<Pose> &T_GtoCs, std::vector<int> &clone_idx) {
  for (const auto &ob : track.obs) {
    const int ci = state.clone_index(ob.t);
    if (ci < 0) {
      continue;
    }
    uvs.push_back(ob.uv);
    T_GtoCs.push_back(cam.camera_pose(state.clones[ci].pose()));
    clone_idx.push_back(ci);
  }
}

} // namespace

PointUpdateSummary point_update(FilterState &state, std::vector<PointTrack *> &tracks,
                                const CameraModel &cam, const PointUpdateConfig &cfg,
                                std::map<long, TriangulatedPoint> &registry) {
  PointUpdateSummary summary;
  const int dim = state.dim();

  std::sort(tracks.begin(), tracks.end(),
            [](const PointTrack *a, const PointTrack *b) { return a->id < b->id; });

  std::vector<Eigen::MatrixXd> H_blocks;
  std::vector<Eigen::VectorXd> r_blocks;
  std::vector<PointTrack *> block_tracks;
  int total_rows = 0;

  for (PointTrack *track : tracks) {
    summary.processed++;

    std::vector<Eigen::Vector2d> uvs;
    std::vector<Pose> T_GtoCs;
    std::vector<int> clone_idx;
    gather_clone_obs(state, *track, cam, uvs, T_GtoCs, clone_idx);
    const int m = static_cast<int>(uvs.size());
    if (m < 2) {
      track->status = PointTrackStatus::RejectedTriangulation;
      summary.too_few_obs++;
      continue;
    }

    TriangulatedPoint tp;
    if (triangulate_point(uvs, T_GtoCs, cam, cfg.tri, tp) != PointTriStatus::Ok) {
      track->status = PointTrackStatus::RejectedTriangulation;
      summary.triangulation_failed++;
      continue;
    }

    track->mcc_residual = motion_consistency_residual(tp.p_G, uvs, T_GtoCs, cam);
    if (cfg.use_mcc && track->mcc_residual > cfg.mcc_threshold) {
      track->status = PointTrackStatus::RejectedMCC;
      summary.mcc_dynamic++;
      summary.dynamic_ids.push_back(track->id);
      continue;
    }
    track->status = PointTrackStatus::Triangulated;
    registry[track->id] = tp;

    Eigen::MatrixXd H_x = Eigen::MatrixXd::Zero(2 * m, dim);
    Eigen::MatrixXd H_f = Eigen::MatrixXd::Zero(2 * m, 3);
    Eigen::VectorXd r(2 * m);
    for (int i = 0; i < m; i++) {
      const Clone &clone = state.clones[clone_idx[i]];
      Eigen::Matrix<double, 2, 6> Hc;
      Eigen::Matrix<double, 2, 3> Hf;
      point_measurement_jacobians(clone, cam, tp.p_G, Hc, Hf);
      H_x.block<2, 6>(2 * i, state.clone_offset(clone_idx[i])) = Hc;
      H_f.block<2, 3>(2 * i, 0) = Hf;
      const Eigen::Vector3d p_C = cam.camera_pose(clone.pose()).transform(tp.p_G);
      const auto uv_hat = project_point(p_C, cam);
      if (!uv_hat) {
        r.segment<2>(2 * i).setZero();
        H_x.block<2, 6>(2 * i, state.clone_offset(clone_idx[i])).setZero();
        H_f.block<2, 3>(2 * i, 0).setZero();
        continue;
      }
      r.segment<2>(2 * i) = uvs[i] - *uv_hat;
    }

    Eigen::MatrixXd H_proj;
    Eigen::VectorXd r_proj;
    if (nullspace_project(H_x, H_f, r, H_proj, r_proj) != NullspaceStatus::Ok) {
      continue;
    }

    // Per-feature gate; the stacked update below is applied ungated.
    const Eigen::MatrixXd S =
        H_proj * state.P * H_proj.transpose() +
        cfg.pixel_std * cfg.pixel_std *
            Eigen::MatrixXd::Identity(H_proj.rows(), H_proj.rows());
    const double gamma = r_proj.dot(S.ldlt().solve(r_proj));
    if (gamma > cfg.chi2_multiplier *
                    chi2_quantile_95(static_cast<int>(r_proj.rows()))) {
      track->gate_rejected = true;
      summary.gate_rejected++;
      continue;
    }

    if (static_cast<int>(block_tracks.size()) >= cfg.max_features) {
      continue;
    }
    H_blocks.push_back(H_proj);
    r_blocks.push_back(r_proj);
    block_tracks.push_back(track);
    total_rows += static_cast<int>(r_proj.rows());
  }

  if (total_rows == 0) {
    return summary;
  }

  StackedResidual sr;
  sr.sigma = cfg.pixel_std;
  sr.H = Eigen::MatrixXd::Zero(total_rows, dim);
  sr.r = Eigen::VectorXd(total_rows);
  int row = 0;
  for (size_t i = 0; i < H_blocks.size(); i++) {
    sr.H.middleRows(row, H_blocks[i].rows()) = H_blocks[i];
    sr.r.segment(row, r_blocks[i].rows()) = r_blocks[i];
    row += static_cast<int>(H_blocks[i].rows());
  }

  const UpdateResult ur = ekf_update(state, sr, -1.0);
  summary.update = ur.status;
  if (ur.status == UpdateStatus::Applied) {
    for (PointTrack *track : block_tracks) {
      track->status = PointTrackStatus::Used;
      summary.used++;
    }
  }
  return summary;
}

} // namespace viwo

#pragma once

#include <Eigen/Core>
#include <map>
#include <vector>

#include "viwo/geometry.hpp"
#include "viwo/state.hpp"

namespace viwo {

struct PointObservation {
  double t = 0.0;
  Eigen::Vector2d uv = Eigen::Vector2d::Zero();
};

enum class PointTrackStatus {
  Active,
  Triangulated,
  RejectedTriangulation,
  RejectedMCC,
  Used
};

struct PointTrack {
  long id = -1;
  std::vector<PointObservation> obs; // time-ordered
  PointTrackStatus status = PointTrackStatus::Active;
  bool gate_rejected = false;
  double mcc_residual = -1.0; // mean reprojection residual, px (-1: not run)
};

struct TriangulatedPoint {
  Eigen::Vector3d p_G = Eigen::Vector3d::Zero();
  double condition = 0.0;    // condition number of the linear system
  double mean_reproj = 0.0;  // mean reprojection residual after refinement, px
};

enum class PointTriStatus { Ok, InsufficientBaseline, BehindCamera, IllConditioned };

struct PointTriangulationConfig {
  double min_baseline = 0.05;  // m, max pairwise camera-center distance
  double max_condition = 1.0e4;
  double max_distance = 200.0; // m, from the first observing camera
  int gn_iterations = 5;
};

/**
 * Triangulate a point from pixel observations and their camera poses (G->C,
 * one per observation, same order). Linear least-squares seed plus a few
 * Gauss-Newton refinements on the reprojection error.
 */
PointTriStatus triangulate_point(const std::vector<Eigen::Vector2d> &uvs,
                                 const std::vector<Pose> &T_GtoCs,
                                 const CameraModel &cam,
                                 const PointTriangulationConfig &cfg,
                                 TriangulatedPoint &out);

/**
 * Motion consistency check: mean reprojection residual of a triangulated
 * point against the historical observations. Static scene points stay near
 * zero; independently moving points grow with the window span.
 */
double motion_consistency_residual(const Eigen::Vector3d &p_G,
                                   const std::vector<Eigen::Vector2d> &uvs,
                                   const std::vector<Pose> &T_GtoCs,
                                   const CameraModel &cam);

/**
 * Jacobians of one pixel observation w.r.t. the observing clone error
 * [dtheta, dp] and the global feature position.
 */
void point_measurement_jacobians(const Clone &clone, const CameraModel &cam,
                                 const Eigen::Vector3d &p_G,
                                 Eigen::Matrix<double, 2, 6> &H_clone,
                                 Eigen::Matrix<double, 2, 3> &H_f);

struct PointUpdateConfig {
  PointTriangulationConfig tri;
  bool use_mcc = true;
  double mcc_threshold = 3.0; // px
  double pixel_std = 1.0;     // px
  double chi2_multiplier = 1.0;
  int max_features = 150;
};

struct PointUpdateSummary {
  int processed = 0;
  int used = 0;
  int mcc_dynamic = 0;
  int triangulation_failed = 0;
  int gate_rejected = 0;
  int too_few_obs = 0;
  UpdateStatus update = UpdateStatus::Applied;
  std::vector<long> dynamic_ids;
};

/**
 * MSCKF point update over mature tracks: triangulate, run the consistency
 * check, build per-feature Jacobians, project out the feature error, gate each
 * feature, stack (sorted by id) and apply one EKF update. Tracks are annotated
 * with their outcome; 3D estimates of all triangulated consistent tracks are
 * written into registry (keyed by id).
 */
PointUpdateSummary point_update(FilterState &state, std::vector<PointTrack *> &tracks,
                                const CameraModel &cam, const PointUpdateConfig &cfg,
                                std::map<long, TriangulatedPoint> &registry);

} // namespace viwo

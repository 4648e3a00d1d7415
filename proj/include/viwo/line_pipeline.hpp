#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "viwo/geometry.hpp"
#include "viwo/point_pipeline.hpp"
#include "viwo/state.hpp"

namespace viwo {

struct LineSegment2D {
  long id = -1; // persistent identity from the tracker / dataset
  double t = 0.0;
  Eigen::Vector2d ps = Eigen::Vector2d::Zero(); // start endpoint, px
  Eigen::Vector2d pe = Eigen::Vector2d::Zero(); // end endpoint, px

  double length() const { return (pe - ps).norm(); }
  Eigen::Vector2d midpoint() const { return 0.5 * (ps + pe); }
};

enum class AxisClass { Unclassified, X, Y, Z };

Eigen::Vector3d axis_unit(AxisClass axis);

/// Homogeneous pixel vanishing points of the three body axes (never
/// dehomogenized here: |z| ~ 0 encodes a direction at infinity).
struct VanishingPoints {
  Eigen::Vector3d vp[3];
};

/**
 * Vanishing points of the three coordinate axes. With R_GtoI absent the axes
 * are the IMU axes (a ground vehicle's natural alignment); with it they are
 * the global axes expressed through the current orientation.
 */
VanishingPoints compute_vanishing_points(const Rotation &R_ItoC,
                                         const CameraModel &cam,
                                         const Rotation *R_GtoI = nullptr);

struct LineClassifyConfig {
  double max_angle_deg = 2.0;
  double max_dist_px = 5.0;
};

struct LineClassification {
  AxisClass axis = AxisClass::Unclassified;
  double e_angle = 0.0; // rad, in [0, pi/2]
  double e_dist = 0.0;  // px
};

/**
 * Classify a segment against the axis vanishing points: the segment direction
 * must align with the direction toward the vanishing point and the endpoints
 * must sit near the midpoint-to-vanishing-point line. Smallest angle error
 * wins when several axes qualify.
 */
LineClassification classify_line(const LineSegment2D &seg, const VanishingPoints &vps,
                                 const LineClassifyConfig &cfg);

struct PointSegmentDistance {
  double dist = 0.0;  // px, distance to the segment (piecewise)
  double cross = 0.0; // projection parameter scaled by length^2
  double len2 = 0.0;  // squared segment length
  bool interior() const { return cross >= 0.0 && cross <= len2; }
};

/// Piecewise point-to-segment distance: perpendicular in the interior,
/// endpoint distance outside.
PointSegmentDistance point_line_distance(const Eigen::Vector2d &p,
                                         const LineSegment2D &seg);

/**
 * Assign frame points to frame segments: a point belongs to a segment when
 * its projection falls between the endpoints and the distance is below
 * max_dist. One point may be assigned to several segments. Returns per-segment
 * sorted id lists, aligned with `segs`.
 */
std::vector<std::vector<long>> assign_points(
    const std::vector<LineSegment2D> &segs,
    const std::vector<std::pair<long, Eigen::Vector2d>> &points, double max_dist);

struct LineMatchConfig {
  double max_midpoint_dist = 30.0;   // px, single-shared-point rule
  double max_direction_diff_deg = 5.0; // single-shared-point rule
};

/**
 * Descriptor-free frame-to-frame segment matching through shared assigned
 * point tracks: two or more shared points match outright; exactly one shared
 * point additionally requires similar midpoint and direction. Conflicts are
 * resolved greedily (more shared points first, then nearer midpoints) and the
 * result is one-to-one. Returns (prev index, cur index) pairs.
 */
std::vector<std::pair<int, int>> match_lines(
    const std::vector<LineSegment2D> &prev,
    const std::vector<std::vector<long>> &prev_ids,
    const std::vector<LineSegment2D> &cur,
    const std::vector<std::vector<long>> &cur_ids, const LineMatchConfig &cfg);

enum class LineTriMethod { None, PlaneIntersection, TwoPoints, PointDirection };

enum class LineTriStatus {
  Ok,
  Degenerate,
  PointsTooClose,
  NoMethodApplicable,
  ResidualTooLarge
};

struct LineTriangulationConfig {
  double plane_min_angle_deg = 1.0;  // below this the plane pair is degenerate
  double min_point_separation = 0.5; // m
  double max_mean_residual = 5.0;     // px, accept threshold for any method
};

/// Triangulate from the two best-separated back-projection planes.
LineTriStatus triangulate_line_planes(const std::vector<LineSegment2D> &segs,
                                      const std::vector<Pose> &T_GtoCs,
                                      const CameraModel &cam, double min_angle_deg,
                                      PluckerLine &out);

/// Line through two 3D points (unit direction, consistent moment).
LineTriStatus triangulate_line_two_points(const Eigen::Vector3d &p1,
                                          const Eigen::Vector3d &p2,
                                          double min_separation, PluckerLine &out);

/// Line through one 3D point with the direction of a classified body axis,
/// rotated into the global frame with the classifying orientation.
PluckerLine triangulate_line_point_direction(const Eigen::Vector3d &p3,
                                             AxisClass axis,
                                             const Rotation &R_GtoI);

struct LineTriangulation {
  LineTriStatus status = LineTriStatus::NoMethodApplicable;
  LineTriMethod method = LineTriMethod::None;
  PluckerLine line;
  double mean_residual = -1.0;
  bool plane_degenerate = false;
};

/**
 * Full cascade: plane intersection when the motion allows it, otherwise two
 * assigned triangulated points (closest admissible pair), otherwise one point
 * plus the classified axis direction. The winning candidate must explain the
 * track's observations to within max_mean_residual.
 */
LineTriangulation triangulate_line(const std::vector<LineSegment2D> &segs,
                                   const std::vector<Pose> &T_GtoCs,
                                   const CameraModel &cam,
                                   const std::vector<Eigen::Vector3d> &points,
                                   AxisClass axis, const Rotation &R_GtoI_at_class,
                                   const LineTriangulationConfig &cfg);

/**
 * Signed distances of the observed endpoints to the projected infinite line
 * (the measurement model; zero when the segment lies on the line). Empty on a
 * degenerate projection. The projected line's sign is canonicalized so that
 * (n, v) and (-n, -v) give identical output.
 */
std::optional<Eigen::Vector2d> line_measurement(const PluckerLine &L_G,
                                                const Pose &T_GtoI,
                                                const CameraModel &cam,
                                                const LineSegment2D &seg);

/**
 * Jacobians of the endpoint-distance measurement w.r.t. the observing clone
 * error [dtheta, dp], the additive 6-dim line coordinates, and the 4-dim
 * orthonormal line tangent used for nullspace projection.
 */
bool line_jacobians(const PluckerLine &L_G, const Clone &clone,
                    const CameraModel &cam, const LineSegment2D &seg,
                    Eigen::Matrix<double, 2, 6> &H_clone,
                    Eigen::Matrix<double, 2, 6> &H_L6,
                    Eigen::Matrix<double, 2, 4> &H_L4);

struct LineObservation {
  double t = 0.0;
  LineSegment2D seg;
  std::vector<long> assigned_ids; // sorted point track ids assigned this frame
};

enum class LineTrackStatus {
  Active,
  Triangulated,
  RejectedTriangulation,
  RejectedDynamic,
  Used
};

struct LineTrack {
  long id = -1;
  std::vector<LineObservation> obs;
  bool classified = false;
  AxisClass axis = AxisClass::Unclassified;
  Rotation R_GtoI_at_class; // orientation estimate at the first classification
  LineTrackStatus status = LineTrackStatus::Active;
  bool gate_rejected = false;
  LineTriMethod method = LineTriMethod::None;

  /// Sorted union of assigned point ids over all observations.
  std::vector<long> assigned_union() const;
};

struct LineUpdateConfig {
  LineTriangulationConfig tri;
  double line_std = 4.0; // px; endpoint jitter plus triangulation model error
  double chi2_multiplier = 1.0;
  int max_lines = 50;
  int min_obs = 3;
};

struct LineUpdateSummary {
  int processed = 0;
  int used = 0;
  int too_few_obs = 0;
  int dynamic_rejected = 0;
  int plane_ok = 0;
  int plane_degenerate = 0;
  int two_points = 0;
  int point_direction = 0;
  int no_method = 0;
  int residual_rejected = 0;
  int gate_rejected = 0;
  int with_point_attempts = 0;
  int with_point_success = 0;
  UpdateStatus update = UpdateStatus::Applied;
};

/**
 * MSCKF line update over mature tracks: reject lines supported only by
 * dynamic points, triangulate through the cascade, project out the 4-dim line
 * error, gate per line, stack and apply one EKF update.
 */
LineUpdateSummary line_update(FilterState &state, std::vector<LineTrack *> &tracks,
                              const std::map<long, TriangulatedPoint> &registry,
                              const std::set<long> &dynamic_ids,
                              const CameraModel &cam, const LineUpdateConfig &cfg);

} // namespace viwo

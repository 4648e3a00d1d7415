#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "viwo/geometry.hpp"
#include "viwo/line_pipeline.hpp"
#include "viwo/propagation.hpp"

namespace viwo {

// ---------------------------------------------------------------------------
// World
// ---------------------------------------------------------------------------

struct WorldConfig {
  int static_points = 2000;  // free-standing points
  int dynamic_points = 0;    // constant-velocity movers
  int points_per_line = 3;   // points sampled exactly on each 3D line
  int lines_x = 0;           // lines with direction exactly +X
  int lines_y = 0;
  int lines_z = 0;
  int lines_generic = 0; // random directions
  Eigen::Vector3d center = Eigen::Vector3d(0.0, 0.0, 1.0);
  Eigen::Vector3d half_extent = Eigen::Vector3d(30.0, 30.0, 3.0);
  double line_min_length = 2.0;
  double line_max_length = 8.0;
  double dynamic_speed_min = 0.3; // m/s, horizontal motion
  double dynamic_speed_max = 1.0;
  std::uint64_t seed = 1;
};

struct WorldPoint {
  long id = -1;
  Eigen::Vector3d p = Eigen::Vector3d::Zero(); // position at t = 0
  bool dynamic = false;
  Eigen::Vector3d vel = Eigen::Vector3d::Zero();

  Eigen::Vector3d at(double t) const { return p + t * vel; }
};

struct WorldLine {
  long id = -1;
  Eigen::Vector3d p1 = Eigen::Vector3d::Zero();
  Eigen::Vector3d p2 = Eigen::Vector3d::Zero();
  AxisClass axis = AxisClass::Unclassified; // exact direction label, if axis-aligned
  std::vector<long> on_ids;                 // ids of points sampled on the line
};

struct World {
  std::vector<WorldPoint> points; // on-line points first, then free, then dynamic
  std::vector<WorldLine> lines;
};

/// Deterministic world sampling inside the configured box. On-line points get
/// the lowest ids so that per-frame caps prefer line-supporting points.
World generate_world(const WorldConfig &cfg);

// ---------------------------------------------------------------------------
// Trajectory
// ---------------------------------------------------------------------------

/// One leg of the motion plan: hold (speed, yaw_rate) for duration seconds.
/// speed 0 is a stop event, yaw_rate != 0 an arc of radius speed / yaw_rate.
struct TrajectorySegment {
  double duration = 0.0; // s
  double speed = 0.0;    // m/s, body forward
  double yaw_rate = 0.0; // rad/s
};

struct TrajectoryConfig {
  std::vector<TrajectorySegment> plan;
  double ramp_time = 1.0; // C2 blend window after each leg boundary, s
  double frame_rate = 10.0;
  double imu_rate = 400.0;
  double wheel_rate = 100.0;
  double start_x = 0.0;
  double start_y = 0.0;
  double start_yaw = 0.0;
  double z = 1.0; // constant height of the planar path

  double duration() const;
};

struct TrajectorySample {
  double t = 0.0;
  Rotation R_GtoI;
  Eigen::Vector3d p_IinG = Eigen::Vector3d::Zero();
  Eigen::Vector3d v_G = Eigen::Vector3d::Zero();
  Eigen::Vector3d a_G = Eigen::Vector3d::Zero();
  Eigen::Vector3d w_I = Eigen::Vector3d::Zero(); // body angular rate
  double yaw = 0.0;
  double yaw_rate = 0.0;

  Pose pose() const { return Pose(R_GtoI, p_IinG); }
};

/**
 * Planar ground-truth trajectory: a uniform cubic B-spline over (x, y, yaw)
 * whose control values come from finely integrating the plan's speed and
 * yaw-rate profiles. The spline itself is the truth, so position, velocity,
 * acceleration and angular rate are mutually consistent by construction, and
 * constant-rate legs are reproduced exactly (linear precision).
 */
class Trajectory {
public:
  double duration() const { return duration_; }

  /// Evaluate pose and derivatives at t (clamped to [0, duration]).
  TrajectorySample sample(double t) const;

  /// Total planar path length, integrated at spline resolution.
  double path_length() const;

private:
  friend class TrajectoryBuilder;
  double knot_dt_ = 0.02;
  double duration_ = 0.0;
  double z_ = 0.0;
  std::vector<Eigen::Vector3d> ctrl_; // (x, y, yaw) control values
};

enum class TrajStatus { Ok, InfeasiblePlan };

/// Build the spline trajectory; InfeasiblePlan for empty plans, non-positive
/// durations, invalid rates, ramp windows longer than a leg, or zero ramp
/// time with unequal adjacent targets (a discontinuous speed jump).
TrajStatus generate_trajectory(const TrajectoryConfig &cfg, Trajectory &out);

// ---------------------------------------------------------------------------
// Sensors
// ---------------------------------------------------------------------------

/// Wheel-speed corruption window: measured forward speed is scaled while
/// t0 <= t < t1 (slipping wheels under-/over-report).
struct SlipEvent {
  double t0 = 0.0;
  double t1 = 0.0;
  double scale = 1.0;
};

struct SimNoise {
  ImuNoise imu;      // continuous-time densities
  WheelNoise wheel;  // white measurement noise
  double pixel_std = 1.0;    // point observation noise (clamped at 3 sigma)
  double endpoint_std = 1.0; // segment endpoint jitter (clamped at 3 sigma)
  Eigen::Vector3d init_bg = Eigen::Vector3d::Zero();
  Eigen::Vector3d init_ba = Eigen::Vector3d::Zero();
  std::vector<SlipEvent> slips;
};

struct SimConfig {
  WorldConfig world;
  TrajectoryConfig traj;
  CameraModel cam;
  OdometerExtrinsics wheel_ext;
  double gravity_mag = 9.81;
  SimNoise noise;
  double min_depth = 0.5;  // m, cull closer points
  double max_depth = 40.0; // m, cull farther points (0 disables)
  double min_segment_px = 10.0;
  int max_visible_points = 0; // per frame, 0 = unlimited, lowest ids kept
  int max_visible_lines = 0;
  std::uint64_t seed = 1;
};

struct FramePoint {
  long id = -1;
  Eigen::Vector2d uv = Eigen::Vector2d::Zero();
};

struct Frame {
  double t = 0.0;
  std::vector<FramePoint> points;
  std::vector<LineSegment2D> segs; // seg.id is the ground-truth world line id
};

struct GroundTruthPose {
  double t = 0.0;
  Rotation R_GtoI;
  Eigen::Vector3d p_IinG = Eigen::Vector3d::Zero();
};

struct SimDataset {
  World world;
  Trajectory traj;
  std::vector<ImuSample> imu;
  std::vector<WheelSample> wheel;
  std::vector<Frame> frames;
  std::vector<GroundTruthPose> gt; // at frame timestamps
};

/// Synthesize all sensor streams from a world and trajectory. Deterministic
/// in (inputs, cfg.seed); visual noise is clamped at three sigma so every
/// observation stays within 3*sigma + eps of its ground-truth projection.
SimDataset simulate_sensors(const World &world, const Trajectory &traj,
                            const SimConfig &cfg);

/// generate_world + generate_trajectory + simulate_sensors. Throws
/// std::invalid_argument on an infeasible plan.
SimDataset simulate(const SimConfig &cfg);

/// Named scene presets: "urban" (circuit with turns, rich world),
/// "straight" (100 m straight run, lines parallel to motion),
/// "lowtexture" (few points per frame, many lines),
/// "dynamic" (20% constant-velocity movers). Unknown name -> empty optional.
std::optional<SimConfig> sim_preset(const std::string &name);

} // namespace viwo

#include "viwo/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace viwo {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kIntegrateDt = 1e-3; // profile integration step, s
constexpr int kStepsPerKnot = 20;     // knot spacing = 20 ms

double smootherstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * u * (u * (6.0 * u - 15.0) + 10.0);
}

/// Piecewise (speed, yaw_rate) plan with C2 blends after each leg boundary.
struct MotionProfile {
  const std::vector<TrajectorySegment> *plan = nullptr;
  std::vector<double> starts; // leg start times, plus total at the back
  double ramp = 0.0;

  Eigen::Vector2d eval(double t) const {
    const auto &p = *plan;
    size_t k = p.size() - 1;
    for (size_t i = 0; i + 1 < starts.size(); i++) {
      if (t < starts[i + 1]) {
        k = i;
        break;
      }
    }
    Eigen::Vector2d out(p[k].speed, p[k].yaw_rate);
    if (k > 0 && ramp > 0.0 && t < starts[k] + ramp) {
      const double s = smootherstep((t - starts[k]) / ramp);
      out.x() = p[k - 1].speed + s * (p[k].speed - p[k - 1].speed);
      out.y() = p[k - 1].yaw_rate + s * (p[k].yaw_rate - p[k - 1].yaw_rate);
    }
    return out;
  }
};

/// Uniform cubic B-spline basis and its derivatives at local parameter u.
void spline_basis(double u, double b[4], double db[4], double ddb[4]) {
  const double u2 = u * u, u3 = u2 * u;
  b[0] = (1.0 - 3.0 * u + 3.0 * u2 - u3) / 6.0;
  b[1] = (3.0 * u3 - 6.0 * u2 + 4.0) / 6.0;
  b[2] = (-3.0 * u3 + 3.0 * u2 + 3.0 * u + 1.0) / 6.0;
  b[3] = u3 / 6.0;
  db[0] = -0.5 * (1.0 - u) * (1.0 - u);
  db[1] = 0.5 * (3.0 * u2 - 4.0 * u);
  db[2] = 0.5 * (-3.0 * u2 + 2.0 * u + 1.0);
  db[3] = 0.5 * u2;
  ddb[0] = 1.0 - u;
  ddb[1] = 3.0 * u - 2.0;
  ddb[2] = -3.0 * u + 1.0;
  ddb[3] = u;
}

/// Clamp a standard-normal draw so visual noise stays within three sigma.
double clamped_gauss(std::mt19937_64 &rng, std::normal_distribution<double> &dist) {
  return std::clamp(dist(rng), -3.0, 3.0);
}

} // namespace

class TrajectoryBuilder {
public:
  static void build(const TrajectoryConfig &cfg, const MotionProfile &profile,
                    Trajectory &out) {
    const double duration = cfg.duration();
    const double knot_dt = kStepsPerKnot * kIntegrateDt;
    const int n_knots = static_cast<int>(std::ceil(duration / knot_dt - 1e-9));

    Eigen::Vector3d y(cfg.start_x, cfg.start_y, cfg.start_yaw);
    const auto deriv = [&profile](double t, const Eigen::Vector3d &s) {
      const Eigen::Vector2d vw = profile.eval(t);
      return Eigen::Vector3d(vw.x() * std::cos(s.z()), vw.x() * std::sin(s.z()),
                             vw.y());
    };

    std::vector<Eigen::Vector3d> knots;
    knots.reserve(n_knots + 1);
    knots.push_back(y);
    for (int i = 0; i < n_knots; i++) {
      for (int s = 0; s < kStepsPerKnot; s++) {
        const double t = (i * kStepsPerKnot + s) * kIntegrateDt;
        const Eigen::Vector3d k1 = deriv(t, y);
        const Eigen::Vector3d k2 = deriv(t + 0.5 * kIntegrateDt, y + 0.5 * kIntegrateDt * k1);
        const Eigen::Vector3d k3 = deriv(t + 0.5 * kIntegrateDt, y + 0.5 * kIntegrateDt * k2);
        const Eigen::Vector3d k4 = deriv(t + kIntegrateDt, y + kIntegrateDt * k3);
        y += kIntegrateDt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      knots.push_back(y);
    }

    out.knot_dt_ = knot_dt;
    out.duration_ = duration;
    out.z_ = cfg.z;
    out.ctrl_.clear();
    out.ctrl_.reserve(knots.size() + 2);
    out.ctrl_.push_back(2.0 * knots.front() - knots[1]); // linear end padding
    out.ctrl_.insert(out.ctrl_.end(), knots.begin(), knots.end());
    out.ctrl_.push_back(2.0 * knots.back() - knots[knots.size() - 2]);
  }
};

double TrajectoryConfig::duration() const {
  double d = 0.0;
  for (const auto &s : plan) {
    d += s.duration;
  }
  return d;
}

TrajectorySample Trajectory::sample(double t) const {
  t = std::clamp(t, 0.0, duration_);
  const int n_seg = static_cast<int>(ctrl_.size()) - 3; // spline spans n_seg knots
  int i = static_cast<int>(std::floor(t / knot_dt_));
  i = std::clamp(i, 0, n_seg - 1);
  const double u = t / knot_dt_ - i;

  double b[4], db[4], ddb[4];
  spline_basis(u, b, db, ddb);
  Eigen::Vector3d pos = Eigen::Vector3d::Zero();
  Eigen::Vector3d vel = Eigen::Vector3d::Zero();
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (int k = 0; k < 4; k++) {
    pos += b[k] * ctrl_[i + k];
    vel += db[k] * ctrl_[i + k];
    acc += ddb[k] * ctrl_[i + k];
  }
  vel /= knot_dt_;
  acc /= knot_dt_ * knot_dt_;

  TrajectorySample s;
  s.t = t;
  s.yaw = pos.z();
  s.yaw_rate = vel.z();
  s.p_IinG = Eigen::Vector3d(pos.x(), pos.y(), z_);
  s.v_G = Eigen::Vector3d(vel.x(), vel.y(), 0.0);
  s.a_G = Eigen::Vector3d(acc.x(), acc.y(), 0.0);
  s.w_I = Eigen::Vector3d(0.0, 0.0, vel.z());
  s.R_GtoI = Rotation(Eigen::Quaterniond(Eigen::AngleAxisd(-pos.z(), Eigen::Vector3d::UnitZ())));
  return s;
}

double Trajectory::path_length() const {
  double len = 0.0;
  Eigen::Vector3d prev = sample(0.0).p_IinG;
  const double h = 0.01;
  for (double t = h; t < duration_ + 0.5 * h; t += h) {
    const Eigen::Vector3d p = sample(std::min(t, duration_)).p_IinG;
    len += (p - prev).norm();
    prev = p;
  }
  return len;
}

TrajStatus generate_trajectory(const TrajectoryConfig &cfg, Trajectory &out) {
  if (cfg.plan.empty() || cfg.ramp_time < 0.0 || cfg.frame_rate <= 0.0 ||
      cfg.imu_rate <= 0.0 || cfg.wheel_rate <= 0.0 || cfg.imu_rate < cfg.frame_rate) {
    return TrajStatus::InfeasiblePlan;
  }
  double min_duration = std::numeric_limits<double>::infinity();
  for (const auto &s : cfg.plan) {
    if (s.duration <= 0.0) {
      return TrajStatus::InfeasiblePlan;
    }
    min_duration = std::min(min_duration, s.duration);
  }
  for (size_t i = 1; i < cfg.plan.size(); i++) {
    const bool jump = cfg.plan[i].speed != cfg.plan[i - 1].speed ||
                      cfg.plan[i].yaw_rate != cfg.plan[i - 1].yaw_rate;
    if (cfg.ramp_time == 0.0 && jump) {
      return TrajStatus::InfeasiblePlan; // discontinuous speed jump
    }
  }
  if (cfg.plan.size() > 1 && cfg.ramp_time > min_duration) {
    return TrajStatus::InfeasiblePlan; // blends would overlap
  }

  MotionProfile profile;
  profile.plan = &cfg.plan;
  profile.ramp = cfg.ramp_time;
  double t = 0.0;
  for (const auto &s : cfg.plan) {
    profile.starts.push_back(t);
    t += s.duration;
  }
  profile.starts.push_back(t);

  TrajectoryBuilder::build(cfg, profile, out);
  return TrajStatus::Ok;
}

World generate_world(const WorldConfig &cfg) {
  World world;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const auto box_sample = [&]() {
    Eigen::Vector3d p;
    for (int i = 0; i < 3; i++) {
      p(i) = cfg.center(i) + (2.0 * unit(rng) - 1.0) * cfg.half_extent(i);
    }
    return p;
  };

  // Lines first so their on-line points take the lowest ids.
  const int axis_counts[3] = {cfg.lines_x, cfg.lines_y, cfg.lines_z};
  long line_id = 0;
  for (int a = 0; a < 4; a++) {
    const int count = a < 3 ? axis_counts[a] : cfg.lines_generic;
    for (int i = 0; i < count; i++) {
      WorldLine line;
      line.id = line_id++;
      line.axis = a < 3 ? static_cast<AxisClass>(a + 1) : AxisClass::Unclassified;
      Eigen::Vector3d dir;
      if (a < 3) {
        dir = Eigen::Vector3d::Unit(a);
      } else {
        do {
          dir = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
        } while (dir.norm() < 1e-6);
        dir.normalize();
      }
      const Eigen::Vector3d c = box_sample();
      const double len =
          cfg.line_min_length + unit(rng) * (cfg.line_max_length - cfg.line_min_length);
      line.p1 = c - 0.5 * len * dir;
      line.p2 = c + 0.5 * len * dir;
      world.lines.push_back(line);
    }
  }

  long point_id = 0;
  for (auto &line : world.lines) {
    for (int i = 0; i < cfg.points_per_line; i++) {
      WorldPoint p;
      p.id = point_id++;
      p.p = line.p1 + unit(rng) * (line.p2 - line.p1);
      line.on_ids.push_back(p.id);
      world.points.push_back(p);
    }
  }
  for (int i = 0; i < cfg.static_points; i++) {
    WorldPoint p;
    p.id = point_id++;
    p.p = box_sample();
    world.points.push_back(p);
  }
  for (int i = 0; i < cfg.dynamic_points; i++) {
    WorldPoint p;
    p.id = point_id++;
    p.p = box_sample();
    p.dynamic = true;
    const double speed = cfg.dynamic_speed_min +
                         unit(rng) * (cfg.dynamic_speed_max - cfg.dynamic_speed_min);
    // Isotropic direction: purely horizontal target motion is nearly
    // indistinguishable from a depth change under planar camera motion, so a
    // vertical component is what makes these targets detectable at all.
    const double heading = 2.0 * kPi * unit(rng);
    const double elevation = 2.0 * unit(rng) - 1.0;
    const double ch = std::sqrt(std::max(0.0, 1.0 - elevation * elevation));
    p.vel = speed * Eigen::Vector3d(ch * std::cos(heading),
                                    ch * std::sin(heading), elevation);
    world.points.push_back(p);
  }
  return world;
}

namespace {

/// Clip segment p(s) = P1 + s (P2 - P1), s in [0, 1], in camera coordinates
/// to the image rectangle and the [min, max] depth band. Every constraint is
/// linear in s, so the visible part is one interval.
bool clip_segment(const Eigen::Vector3d &P1, const Eigen::Vector3d &P2,
                  const CameraModel &cam, double min_depth, double max_depth,
                  double &lo, double &hi) {
  lo = 0.0;
  hi = 1.0;
  const auto clip = [&](double b, double a) {
    // Constraint b + a s >= 0.
    if (std::abs(a) < 1e-15) {
      return b >= 0.0;
    }
    const double root = -b / a;
    if (a > 0.0) {
      lo = std::max(lo, root);
    } else {
      hi = std::min(hi, root);
    }
    return lo < hi;
  };

  const Eigen::Vector3d d = P2 - P1;
  if (!clip(P1.z() - min_depth, d.z())) {
    return false;
  }
  if (max_depth > 0.0 && !clip(max_depth - P1.z(), -d.z())) {
    return false;
  }
  const double w = cam.width - 1.0, h = cam.height - 1.0;
  // u >= 0, u <= w, v >= 0, v <= h, each scaled by depth (positive in band).
  if (!clip(cam.fx * P1.x() + cam.cx * P1.z(), cam.fx * d.x() + cam.cx * d.z())) {
    return false;
  }
  if (!clip((w - cam.cx) * P1.z() - cam.fx * P1.x(),
            (w - cam.cx) * d.z() - cam.fx * d.x())) {
    return false;
  }
  if (!clip(cam.fy * P1.y() + cam.cy * P1.z(), cam.fy * d.y() + cam.cy * d.z())) {
    return false;
  }
  if (!clip((h - cam.cy) * P1.z() - cam.fy * P1.y(),
            (h - cam.cy) * d.z() - cam.fy * d.y())) {
    return false;
  }
  return lo < hi;
}

Eigen::Vector2d project_unchecked(const Eigen::Vector3d &p, const CameraModel &cam) {
  return {cam.fx * p.x() / p.z() + cam.cx, cam.fy * p.y() / p.z() + cam.cy};
}

} // namespace

SimDataset simulate_sensors(const World &world, const Trajectory &traj,
                            const SimConfig &cfg) {
  SimDataset ds;
  ds.world = world;
  ds.traj = traj;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::Vector3d g_vec = gravity_vector(cfg.gravity_mag);
  const double duration = traj.duration();

  // IMU: true rates plus slowly walking biases plus white noise.
  {
    const double dt = 1.0 / cfg.traj.imu_rate;
    const double sqrt_dt = std::sqrt(dt);
    const int n = static_cast<int>(std::floor(duration / dt + 1e-9));
    Eigen::Vector3d bg = cfg.noise.init_bg;
    Eigen::Vector3d ba = cfg.noise.init_ba;
    ds.imu.reserve(n + 1);
    for (int k = 0; k <= n; k++) {
      const double t = k * dt;
      const TrajectorySample s = traj.sample(t);
      ImuSample m;
      m.t = t;
      m.w = s.w_I + bg;
      m.a = s.R_GtoI * (s.a_G - g_vec) + ba;
      for (int i = 0; i < 3; i++) {
        m.w(i) += cfg.noise.imu.gyro_nd / sqrt_dt * gauss(rng);
        m.a(i) += cfg.noise.imu.accel_nd / sqrt_dt * gauss(rng);
      }
      ds.imu.push_back(m);
      for (int i = 0; i < 3; i++) {
        bg(i) += cfg.noise.imu.gyro_rw * sqrt_dt * gauss(rng);
        ba(i) += cfg.noise.imu.accel_rw * sqrt_dt * gauss(rng);
      }
    }
  }

  // Wheel: odometer-frame forward speed and yaw rate, with slip windows.
  {
    const double dt = 1.0 / cfg.traj.wheel_rate;
    const int n = static_cast<int>(std::floor(duration / dt + 1e-9));
    const Eigen::Matrix3d R_ItoO = cfg.wheel_ext.R_ItoO.matrix();
    const Eigen::Vector3d p_OinI = -(R_ItoO.transpose() * cfg.wheel_ext.p_IinO);
    ds.wheel.reserve(n + 1);
    for (int k = 0; k <= n; k++) {
      const double t = k * dt;
      const TrajectorySample s = traj.sample(t);
      const Eigen::Vector3d v_O = R_ItoO * (s.R_GtoI * s.v_G + s.w_I.cross(p_OinI));
      WheelSample m;
      m.t = t;
      m.vx = v_O.x();
      m.wz = (R_ItoO * s.w_I).z();
      for (const auto &slip : cfg.noise.slips) {
        if (t >= slip.t0 && t < slip.t1) {
          m.vx *= slip.scale;
        }
      }
      m.vx += cfg.noise.wheel.v_std * gauss(rng);
      m.wz += cfg.noise.wheel.w_std * gauss(rng);
      ds.wheel.push_back(m);
    }
  }

  // Camera frames: culled projections of (advanced) points and clipped lines.
  {
    const double dt = 1.0 / cfg.traj.frame_rate;
    const int n = static_cast<int>(std::floor(duration / dt + 1e-9));
    // Trackers hold onto a locked feature past the detection range, so a
    // point seen last frame stays visible out to a slightly deeper cutoff
    // instead of vanishing the instant it crosses max_depth.
    std::set<long> tracked;
    for (int k = 0; k <= n; k++) {
      const double t = k * dt;
      const TrajectorySample s = traj.sample(t);
      ds.gt.push_back({t, s.R_GtoI, s.p_IinG});

      Frame frame;
      frame.t = t;
      const Pose T_GtoC = cfg.cam.camera_pose(s.pose());

      for (const auto &wp : world.points) {
        const Eigen::Vector3d p_C = T_GtoC.transform(wp.at(t));
        const double depth_cap =
            cfg.max_depth > 0.0
                ? (tracked.count(wp.id) ? 1.3 * cfg.max_depth : cfg.max_depth)
                : 0.0;
        if (p_C.z() < cfg.min_depth ||
            (depth_cap > 0.0 && p_C.z() > depth_cap)) {
          continue;
        }
        const Eigen::Vector2d uv = project_unchecked(p_C, cfg.cam);
        if (!cfg.cam.in_image(uv)) {
          continue;
        }
        frame.points.push_back({wp.id, uv});
        if (cfg.max_visible_points > 0 &&
            static_cast<int>(frame.points.size()) >= cfg.max_visible_points) {
          break;
        }
      }
      for (auto &fp : frame.points) {
        fp.uv.x() += cfg.noise.pixel_std * clamped_gauss(rng, gauss);
        fp.uv.y() += cfg.noise.pixel_std * clamped_gauss(rng, gauss);
      }
      frame.points.erase(std::remove_if(frame.points.begin(), frame.points.end(),
                                        [&](const FramePoint &fp) {
                                          return !cfg.cam.in_image(fp.uv);
                                        }),
                         frame.points.end());
      tracked.clear();
      for (const auto &fp : frame.points) {
        tracked.insert(fp.id);
      }

      for (const auto &wl : world.lines) {
        const Eigen::Vector3d P1 = T_GtoC.transform(wl.p1);
        const Eigen::Vector3d P2 = T_GtoC.transform(wl.p2);
        double lo, hi;
        if (!clip_segment(P1, P2, cfg.cam, cfg.min_depth, cfg.max_depth, lo, hi)) {
          continue;
        }
        const Eigen::Vector3d d = P2 - P1;
        LineSegment2D seg;
        seg.id = wl.id;
        seg.t = t;
        seg.ps = project_unchecked(P1 + lo * d, cfg.cam);
        seg.pe = project_unchecked(P1 + hi * d, cfg.cam);
        if (seg.length() < cfg.min_segment_px) {
          continue;
        }
        frame.segs.push_back(seg);
        if (cfg.max_visible_lines > 0 &&
            static_cast<int>(frame.segs.size()) >= cfg.max_visible_lines) {
          break;
        }
      }
      for (auto &seg : frame.segs) {
        const Eigen::Vector2d dir = (seg.pe - seg.ps).normalized();
        const Eigen::Vector2d perp(-dir.y(), dir.x());
        for (Eigen::Vector2d *ep : {&seg.ps, &seg.pe}) {
          *ep += cfg.noise.endpoint_std * clamped_gauss(rng, gauss) * dir +
                 cfg.noise.endpoint_std * clamped_gauss(rng, gauss) * perp;
          ep->x() = std::clamp(ep->x(), 0.0, cfg.cam.width - 1.0);
          ep->y() = std::clamp(ep->y(), 0.0, cfg.cam.height - 1.0);
        }
      }

      ds.frames.push_back(std::move(frame));
    }
  }

  return ds;
}

SimDataset simulate(const SimConfig &cfg) {
  const World world = generate_world(cfg.world);
  Trajectory traj;
  if (generate_trajectory(cfg.traj, traj) != TrajStatus::Ok) {
    throw std::invalid_argument("infeasible trajectory plan");
  }
  return simulate_sensors(world, traj, cfg);
}

std::optional<SimConfig> sim_preset(const std::string &name) {
  SimConfig cfg;
  cfg.cam.fx = 460.0;
  cfg.cam.fy = 460.0;
  cfg.cam.cx = 320.0;
  cfg.cam.cy = 240.0;
  cfg.cam.width = 640;
  cfg.cam.height = 480;
  Eigen::Matrix3d R_ItoC;
  R_ItoC << 0, -1, 0, 0, 0, -1, 1, 0, 0; // camera looks along body +x
  cfg.cam.R_ItoC = Rotation(R_ItoC);
  cfg.cam.p_IinC = Eigen::Vector3d(0.02, -0.01, 0.05);
  cfg.wheel_ext.R_ItoO = Rotation();
  cfg.wheel_ext.p_IinO = Eigen::Vector3d(0.3, 0.0, 0.4);

  const double turn = kPi / 10.0; // 90 degrees over 5 s

  if (name == "urban") {
    cfg.traj.plan = {{1.0, 0.0, 0.0}};
    for (int lap = 0; lap < 4; lap++) {
      cfg.traj.plan.push_back({25.0, 2.0, 0.0});
      cfg.traj.plan.push_back({5.0, 1.5, turn});
    }
    cfg.world.center = Eigen::Vector3d(25.0, 30.0, 1.0);
    cfg.world.half_extent = Eigen::Vector3d(42.0, 45.0, 2.5);
    cfg.world.static_points = 2600;
    cfg.world.lines_x = 40;
    cfg.world.lines_y = 40;
    cfg.world.lines_z = 40;
    cfg.world.lines_generic = 30;
    cfg.world.points_per_line = 3;
    cfg.max_depth = 30.0;
    cfg.max_visible_points = 200;
    return cfg;
  }
  if (name == "straight") {
    cfg.traj.plan = {{1.0, 0.0, 0.0}, {50.0, 2.0, 0.0}};
    cfg.world.center = Eigen::Vector3d(50.0, 0.0, 1.0);
    cfg.world.half_extent = Eigen::Vector3d(62.0, 10.0, 2.2);
    cfg.world.static_points = 1200;
    cfg.world.lines_x = 60;
    cfg.world.lines_y = 0;
    cfg.world.lines_z = 0;
    cfg.world.lines_generic = 0;
    cfg.world.points_per_line = 3;
    cfg.world.line_min_length = 3.0;
    cfg.world.line_max_length = 10.0;
    cfg.max_depth = 35.0;
    cfg.max_visible_points = 200;
    // Long, low-noise segments keep the measured plane angles dominated by
    // geometry, which is what this scene is designed to exercise.
    cfg.min_segment_px = 30.0;
    cfg.noise.pixel_std = 0.5;
    cfg.noise.endpoint_std = 0.1;
    return cfg;
  }
  if (name == "lowtexture") {
    cfg.traj.plan = {{1.0, 0.0, 0.0}};
    for (int lap = 0; lap < 4; lap++) {
      cfg.traj.plan.push_back({10.0, 1.5, 0.0});
      cfg.traj.plan.push_back({5.0, 1.2, turn});
    }
    cfg.world.center = Eigen::Vector3d(7.5, 11.3, 1.0);
    cfg.max_depth = 25.0;
    cfg.world.half_extent = Eigen::Vector3d(16.0, 16.0, 2.2);
    cfg.world.static_points = 700;
    cfg.world.lines_x = 30;
    cfg.world.lines_y = 30;
    cfg.world.lines_z = 30;
    cfg.world.lines_generic = 20;
    cfg.world.points_per_line = 2;
    cfg.max_visible_points = 15;
    cfg.noise.pixel_std = 2.0; // sparse, poor point tracks; lines carry the scene
    return cfg;
  }
  if (name == "dynamic") {
    // A moving point is separable from a static one only through the mismatch
    // between its pixel drift and the parallax a fixed point would show, so
    // this scene maximizes that mismatch: a high-resolution camera turns slow
    // metric drift into many pixels, and stop-and-go driving puts a speed kink
    // inside every track's window, which a static-point fit cannot follow.
    cfg.cam.fx = 2800.0;
    cfg.cam.fy = 2800.0;
    cfg.cam.cx = 1280.0;
    cfg.cam.cy = 720.0;
    cfg.cam.width = 2560;
    cfg.cam.height = 1440;
    cfg.traj.plan = {{1.0, 0.0, 0.0}};
    for (double t = 1.0; t < 54.0; t += 1.2) {
      cfg.traj.plan.push_back({0.8, 2.0, 0.0});
      cfg.traj.plan.push_back({0.4, 0.0, 0.0});
    }
    cfg.traj.ramp_time = 0.3;
    cfg.world.center = Eigen::Vector3d(36.0, 0.0, 1.0);
    cfg.world.half_extent = Eigen::Vector3d(40.0, 18.0, 2.5);
    cfg.world.static_points = 3100;
    cfg.world.dynamic_points = 775;
    cfg.world.lines_x = 10;
    cfg.world.lines_y = 10;
    cfg.world.lines_z = 10;
    cfg.world.lines_generic = 10;
    cfg.world.points_per_line = 2;
    cfg.max_depth = 12.0;
    cfg.max_visible_points = 200;
    return cfg;
  }
  return std::nullopt;
}

} // namespace viwo

#include "viwo/config.hpp"

#include <json.hpp>

namespace viwo {

namespace {

using json = nlohmann::ordered_json;

/// Tracks which keys of an object were consumed and rejects leftovers, so
/// typos and stale keys fail loudly instead of being silently ignored.
class Reader {
public:
  Reader(const json &j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw ConfigError(path_ + ": expected an object");
    }
  }

  template <typename T> void get(const char *key, T &out) {
    seen_.push_back(key);
    const auto it = j_.find(key);
    if (it == j_.end()) {
      return;
    }
    try {
      out = it->get<T>();
    } catch (const json::exception &) {
      throw ConfigError(path_ + "." + key + ": wrong type");
    }
  }

  bool has(const char *key) {
    seen_.push_back(key);
    return j_.find(key) != j_.end();
  }

  const json &at(const char *key) const { return j_.at(key); }

  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) {
      return;
    }
    for (const auto &[key, value] : j_.items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        throw ConfigError(path_ + ": unknown key '" + key + "'");
      }
    }
  }

private:
  const json &j_;
  std::string path_;
  std::vector<std::string> seen_;
};

json vec3_json(const Eigen::Vector3d &v) {
  return json::array({v.x(), v.y(), v.z()});
}

Eigen::Vector3d vec3_parse(const json &j, const std::string &path) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(path + ": expected an array of 3 numbers");
  }
  Eigen::Vector3d v;
  for (int i = 0; i < 3; i++) {
    if (!j[i].is_number()) {
      throw ConfigError(path + ": expected an array of 3 numbers");
    }
    v(i) = j[i].get<double>();
  }
  return v;
}

json mat3_json(const Eigen::Matrix3d &m) {
  json a = json::array();
  for (int r = 0; r < 3; r++) {
    for (int c = 0; c < 3; c++) {
      a.push_back(m(r, c));
    }
  }
  return a;
}

Eigen::Matrix3d mat3_parse(const json &j, const std::string &path) {
  if (!j.is_array() || j.size() != 9) {
    throw ConfigError(path + ": expected an array of 9 numbers (row major)");
  }
  Eigen::Matrix3d m;
  for (int i = 0; i < 9; i++) {
    if (!j[i].is_number()) {
      throw ConfigError(path + ": expected an array of 9 numbers (row major)");
    }
    m(i / 3, i % 3) = j[i].get<double>();
  }
  return m;
}

json parse_text(const std::string &text) {
  try {
    return json::parse(text);
  } catch (const json::exception &e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

} // namespace

std::string serialize_run_config(const RunConfig &cfg) {
  json j;
  j["dataset"] = cfg.dataset;
  j["out"] = cfg.out;
  j["seed"] = cfg.seed;
  j["use_lines"] = cfg.use_lines;
  j["use_mcc"] = cfg.use_mcc;
  j["use_wheel"] = cfg.use_wheel;
  j["rematch_lines"] = cfg.rematch_lines;
  j["check_psd"] = cfg.check_psd;
  j["max_clones"] = cfg.max_clones;
  j["gravity"] = cfg.gravity;
  j["imu_noise"] = {{"gyro_nd", cfg.imu_noise.gyro_nd},
                    {"accel_nd", cfg.imu_noise.accel_nd},
                    {"gyro_rw", cfg.imu_noise.gyro_rw},
                    {"accel_rw", cfg.imu_noise.accel_rw}};
  j["wheel"] = {{"v_std", cfg.wheel_noise.v_std},
                {"w_std", cfg.wheel_noise.w_std},
                {"chi2_multiplier", cfg.wheel_chi2_multiplier}};
  j["init_std"] = {{"att", cfg.init_std.att},
                   {"pos", cfg.init_std.pos},
                   {"vel", cfg.init_std.vel},
                   {"bg", cfg.init_std.bg},
                   {"ba", cfg.init_std.ba}};
  j["points"] = {{"pixel_std", cfg.points.pixel_std},
                 {"chi2_multiplier", cfg.points.chi2_multiplier},
                 {"max_features", cfg.points.max_features},
                 {"mcc_threshold", cfg.points.mcc_threshold},
                 {"min_baseline", cfg.points.tri.min_baseline},
                 {"max_condition", cfg.points.tri.max_condition},
                 {"max_distance", cfg.points.tri.max_distance},
                 {"gn_iterations", cfg.points.tri.gn_iterations}};
  j["lines"] = {{"line_std", cfg.lines.line_std},
                {"chi2_multiplier", cfg.lines.chi2_multiplier},
                {"max_lines", cfg.lines.max_lines},
                {"min_obs", cfg.lines.min_obs},
                {"plane_min_angle_deg", cfg.lines.tri.plane_min_angle_deg},
                {"min_point_separation", cfg.lines.tri.min_point_separation},
                {"max_mean_residual", cfg.lines.tri.max_mean_residual},
                {"assign_max_dist", cfg.assign_max_dist},
                {"classify_max_angle_deg", cfg.classify.max_angle_deg},
                {"classify_max_dist_px", cfg.classify.max_dist_px},
                {"match_max_midpoint_dist", cfg.match.max_midpoint_dist},
                {"match_max_direction_deg", cfg.match.max_direction_diff_deg}};
  return j.dump(2) + "\n";
}

RunConfig parse_run_config(const std::string &text) {
  const json j = parse_text(text);
  RunConfig cfg;
  Reader root(j, "config");
  root.get("dataset", cfg.dataset);
  root.get("out", cfg.out);
  root.get("seed", cfg.seed);
  root.get("use_lines", cfg.use_lines);
  root.get("use_mcc", cfg.use_mcc);
  root.get("use_wheel", cfg.use_wheel);
  root.get("rematch_lines", cfg.rematch_lines);
  root.get("check_psd", cfg.check_psd);
  root.get("max_clones", cfg.max_clones);
  root.get("gravity", cfg.gravity);
  if (root.has("imu_noise")) {
    Reader r(root.at("imu_noise"), "config.imu_noise");
    r.get("gyro_nd", cfg.imu_noise.gyro_nd);
    r.get("accel_nd", cfg.imu_noise.accel_nd);
    r.get("gyro_rw", cfg.imu_noise.gyro_rw);
    r.get("accel_rw", cfg.imu_noise.accel_rw);
  }
  if (root.has("wheel")) {
    Reader r(root.at("wheel"), "config.wheel");
    r.get("v_std", cfg.wheel_noise.v_std);
    r.get("w_std", cfg.wheel_noise.w_std);
    r.get("chi2_multiplier", cfg.wheel_chi2_multiplier);
  }
  if (root.has("init_std")) {
    Reader r(root.at("init_std"), "config.init_std");
    r.get("att", cfg.init_std.att);
    r.get("pos", cfg.init_std.pos);
    r.get("vel", cfg.init_std.vel);
    r.get("bg", cfg.init_std.bg);
    r.get("ba", cfg.init_std.ba);
  }
  if (root.has("points")) {
    Reader r(root.at("points"), "config.points");
    r.get("pixel_std", cfg.points.pixel_std);
    r.get("chi2_multiplier", cfg.points.chi2_multiplier);
    r.get("max_features", cfg.points.max_features);
    r.get("mcc_threshold", cfg.points.mcc_threshold);
    r.get("min_baseline", cfg.points.tri.min_baseline);
    r.get("max_condition", cfg.points.tri.max_condition);
    r.get("max_distance", cfg.points.tri.max_distance);
    r.get("gn_iterations", cfg.points.tri.gn_iterations);
  }
  if (root.has("lines")) {
    Reader r(root.at("lines"), "config.lines");
    r.get("line_std", cfg.lines.line_std);
    r.get("chi2_multiplier", cfg.lines.chi2_multiplier);
    r.get("max_lines", cfg.lines.max_lines);
    r.get("min_obs", cfg.lines.min_obs);
    r.get("plane_min_angle_deg", cfg.lines.tri.plane_min_angle_deg);
    r.get("min_point_separation", cfg.lines.tri.min_point_separation);
    r.get("max_mean_residual", cfg.lines.tri.max_mean_residual);
    r.get("assign_max_dist", cfg.assign_max_dist);
    r.get("classify_max_angle_deg", cfg.classify.max_angle_deg);
    r.get("classify_max_dist_px", cfg.classify.max_dist_px);
    r.get("match_max_midpoint_dist", cfg.match.max_midpoint_dist);
    r.get("match_max_direction_deg", cfg.match.max_direction_diff_deg);
  }

  if (cfg.max_clones < 3) {
    throw ConfigError("config.max_clones: must be at least 3");
  }
  if (cfg.gravity <= 0.0) {
    throw ConfigError("config.gravity: must be positive");
  }
  cfg.points.use_mcc = cfg.use_mcc;
  return cfg;
}

std::string serialize_sim_config(const SimConfig &cfg) {
  json j;
  j["world"] = {{"static_points", cfg.world.static_points},
                {"dynamic_points", cfg.world.dynamic_points},
                {"points_per_line", cfg.world.points_per_line},
                {"lines_x", cfg.world.lines_x},
                {"lines_y", cfg.world.lines_y},
                {"lines_z", cfg.world.lines_z},
                {"lines_generic", cfg.world.lines_generic},
                {"center", vec3_json(cfg.world.center)},
                {"half_extent", vec3_json(cfg.world.half_extent)},
                {"line_min_length", cfg.world.line_min_length},
                {"line_max_length", cfg.world.line_max_length},
                {"dynamic_speed_min", cfg.world.dynamic_speed_min},
                {"dynamic_speed_max", cfg.world.dynamic_speed_max},
                {"seed", cfg.world.seed}};
  json plan = json::array();
  for (const auto &s : cfg.traj.plan) {
    plan.push_back({{"duration", s.duration}, {"speed", s.speed}, {"yaw_rate", s.yaw_rate}});
  }
  j["trajectory"] = {{"plan", plan},
                     {"ramp_time", cfg.traj.ramp_time},
                     {"frame_rate", cfg.traj.frame_rate},
                     {"imu_rate", cfg.traj.imu_rate},
                     {"wheel_rate", cfg.traj.wheel_rate},
                     {"start_x", cfg.traj.start_x},
                     {"start_y", cfg.traj.start_y},
                     {"start_yaw", cfg.traj.start_yaw},
                     {"z", cfg.traj.z}};
  j["camera"] = {{"fx", cfg.cam.fx},
                 {"fy", cfg.cam.fy},
                 {"cx", cfg.cam.cx},
                 {"cy", cfg.cam.cy},
                 {"width", cfg.cam.width},
                 {"height", cfg.cam.height},
                 {"R_ItoC", mat3_json(cfg.cam.R_ItoC.matrix())},
                 {"p_IinC", vec3_json(cfg.cam.p_IinC)}};
  j["wheel_extrinsics"] = {{"R_ItoO", mat3_json(cfg.wheel_ext.R_ItoO.matrix())},
                           {"p_IinO", vec3_json(cfg.wheel_ext.p_IinO)}};
  j["gravity"] = cfg.gravity_mag;
  json slips = json::array();
  for (const auto &s : cfg.noise.slips) {
    slips.push_back({{"t0", s.t0}, {"t1", s.t1}, {"scale", s.scale}});
  }
  j["noise"] = {{"gyro_nd", cfg.noise.imu.gyro_nd},
                {"accel_nd", cfg.noise.imu.accel_nd},
                {"gyro_rw", cfg.noise.imu.gyro_rw},
                {"accel_rw", cfg.noise.imu.accel_rw},
                {"wheel_v_std", cfg.noise.wheel.v_std},
                {"wheel_w_std", cfg.noise.wheel.w_std},
                {"pixel_std", cfg.noise.pixel_std},
                {"endpoint_std", cfg.noise.endpoint_std},
                {"init_bg", vec3_json(cfg.noise.init_bg)},
                {"init_ba", vec3_json(cfg.noise.init_ba)},
                {"slips", slips}};
  j["min_depth"] = cfg.min_depth;
  j["max_depth"] = cfg.max_depth;
  j["min_segment_px"] = cfg.min_segment_px;
  j["max_visible_points"] = cfg.max_visible_points;
  j["max_visible_lines"] = cfg.max_visible_lines;
  j["seed"] = cfg.seed;
  return j.dump(2) + "\n";
}

SimConfig parse_sim_config(const std::string &text) {
  const json j = parse_text(text);
  SimConfig cfg;
  Reader root(j, "sim");
  if (root.has("world")) {
    Reader r(root.at("world"), "sim.world");
    r.get("static_points", cfg.world.static_points);
    r.get("dynamic_points", cfg.world.dynamic_points);
    r.get("points_per_line", cfg.world.points_per_line);
    r.get("lines_x", cfg.world.lines_x);
    r.get("lines_y", cfg.world.lines_y);
    r.get("lines_z", cfg.world.lines_z);
    r.get("lines_generic", cfg.world.lines_generic);
    if (r.has("center")) {
      cfg.world.center = vec3_parse(r.at("center"), "sim.world.center");
    }
    if (r.has("half_extent")) {
      cfg.world.half_extent = vec3_parse(r.at("half_extent"), "sim.world.half_extent");
    }
    r.get("line_min_length", cfg.world.line_min_length);
    r.get("line_max_length", cfg.world.line_max_length);
    r.get("dynamic_speed_min", cfg.world.dynamic_speed_min);
    r.get("dynamic_speed_max", cfg.world.dynamic_speed_max);
    r.get("seed", cfg.world.seed);
  }
  if (root.has("trajectory")) {
    Reader r(root.at("trajectory"), "sim.trajectory");
    if (r.has("plan")) {
      const json &plan = r.at("plan");
      if (!plan.is_array()) {
        throw ConfigError("sim.trajectory.plan: expected an array");
      }
      cfg.traj.plan.clear();
      for (size_t i = 0; i < plan.size(); i++) {
        Reader rs(plan[i], "sim.trajectory.plan[" + std::to_string(i) + "]");
        TrajectorySegment seg;
        rs.get("duration", seg.duration);
        rs.get("speed", seg.speed);
        rs.get("yaw_rate", seg.yaw_rate);
        cfg.traj.plan.push_back(seg);
      }
    }
    r.get("ramp_time", cfg.traj.ramp_time);
    r.get("frame_rate", cfg.traj.frame_rate);
    r.get("imu_rate", cfg.traj.imu_rate);
    r.get("wheel_rate", cfg.traj.wheel_rate);
    r.get("start_x", cfg.traj.start_x);
    r.get("start_y", cfg.traj.start_y);
    r.get("start_yaw", cfg.traj.start_yaw);
    r.get("z", cfg.traj.z);
  }
  if (root.has("camera")) {
    Reader r(root.at("camera"), "sim.camera");
    r.get("fx", cfg.cam.fx);
    r.get("fy", cfg.cam.fy);
    r.get("cx", cfg.cam.cx);
    r.get("cy", cfg.cam.cy);
    r.get("width", cfg.cam.width);
    r.get("height", cfg.cam.height);
    if (r.has("R_ItoC")) {
      cfg.cam.R_ItoC = Rotation(mat3_parse(r.at("R_ItoC"), "sim.camera.R_ItoC"));
    }
    if (r.has("p_IinC")) {
      cfg.cam.p_IinC = vec3_parse(r.at("p_IinC"), "sim.camera.p_IinC");
    }
  }
  if (root.has("wheel_extrinsics")) {
    Reader r(root.at("wheel_extrinsics"), "sim.wheel_extrinsics");
    if (r.has("R_ItoO")) {
      cfg.wheel_ext.R_ItoO =
          Rotation(mat3_parse(r.at("R_ItoO"), "sim.wheel_extrinsics.R_ItoO"));
    }
    if (r.has("p_IinO")) {
      cfg.wheel_ext.p_IinO = vec3_parse(r.at("p_IinO"), "sim.wheel_extrinsics.p_IinO");
    }
  }
  root.get("gravity", cfg.gravity_mag);
  if (root.has("noise")) {
    Reader r(root.at("noise"), "sim.noise");
    r.get("gyro_nd", cfg.noise.imu.gyro_nd);
    r.get("accel_nd", cfg.noise.imu.accel_nd);
    r.get("gyro_rw", cfg.noise.imu.gyro_rw);
    r.get("accel_rw", cfg.noise.imu.accel_rw);
    r.get("wheel_v_std", cfg.noise.wheel.v_std);
    r.get("wheel_w_std", cfg.noise.wheel.w_std);
    r.get("pixel_std", cfg.noise.pixel_std);
    r.get("endpoint_std", cfg.noise.endpoint_std);
    if (r.has("init_bg")) {
      cfg.noise.init_bg = vec3_parse(r.at("init_bg"), "sim.noise.init_bg");
    }
    if (r.has("init_ba")) {
      cfg.noise.init_ba = vec3_parse(r.at("init_ba"), "sim.noise.init_ba");
    }
    if (r.has("slips")) {
      const json &slips = r.at("slips");
      if (!slips.is_array()) {
        throw ConfigError("sim.noise.slips: expected an array");
      }
      cfg.noise.slips.clear();
      for (size_t i = 0; i < slips.size(); i++) {
        Reader rs(slips[i], "sim.noise.slips[" + std::to_string(i) + "]");
        SlipEvent ev;
        rs.get("t0", ev.t0);
        rs.get("t1", ev.t1);
        rs.get("scale", ev.scale);
        cfg.noise.slips.push_back(ev);
      }
    }
  }
  root.get("min_depth", cfg.min_depth);
  root.get("max_depth", cfg.max_depth);
  root.get("min_segment_px", cfg.min_segment_px);
  root.get("max_visible_points", cfg.max_visible_points);
  root.get("max_visible_lines", cfg.max_visible_lines);
  root.get("seed", cfg.seed);
  return cfg;
}

std::string serialize_calib(const CalibConfig &calib) {
  json j;
  j["camera"] = {{"fx", calib.cam.fx},
                 {"fy", calib.cam.fy},
                 {"cx", calib.cam.cx},
                 {"cy", calib.cam.cy},
                 {"width", calib.cam.width},
                 {"height", calib.cam.height},
                 {"R_ItoC", mat3_json(calib.cam.R_ItoC.matrix())},
                 {"p_IinC", vec3_json(calib.cam.p_IinC)}};
  j["wheel_extrinsics"] = {{"R_ItoO", mat3_json(calib.wheel_ext.R_ItoO.matrix())},
                           {"p_IinO", vec3_json(calib.wheel_ext.p_IinO)}};
  j["gravity"] = calib.gravity;
  return j.dump(2) + "\n";
}

CalibConfig parse_calib(const std::string &text) {
  const json j = parse_text(text);
  CalibConfig calib;
  Reader root(j, "calib");
  if (root.has("camera")) {
    Reader r(root.at("camera"), "calib.camera");
    r.get("fx", calib.cam.fx);
    r.get("fy", calib.cam.fy);
    r.get("cx", calib.cam.cx);
    r.get("cy", calib.cam.cy);
    r.get("width", calib.cam.width);
    r.get("height", calib.cam.height);
    if (r.has("R_ItoC")) {
      calib.cam.R_ItoC = Rotation(mat3_parse(r.at("R_ItoC"), "calib.camera.R_ItoC"));
    }
    if (r.has("p_IinC")) {
      calib.cam.p_IinC = vec3_parse(r.at("p_IinC"), "calib.camera.p_IinC");
    }
  }
  if (root.has("wheel_extrinsics")) {
    Reader r(root.at("wheel_extrinsics"), "calib.wheel_extrinsics");
    if (r.has("R_ItoO")) {
      calib.wheel_ext.R_ItoO =
          Rotation(mat3_parse(r.at("R_ItoO"), "calib.wheel_extrinsics.R_ItoO"));
    }
    if (r.has("p_IinO")) {
      calib.wheel_ext.p_IinO =
          vec3_parse(r.at("p_IinO"), "calib.wheel_extrinsics.p_IinO");
    }
  }
  root.get("gravity", calib.gravity);
  return calib;
}

void set_sim_seed(SimConfig &cfg, std::uint64_t seed) {
  cfg.world.seed = seed;
  cfg.seed = seed + 0x9E3779B97F4A7C15ULL; // decorrelate the two streams
}

} // namespace viwo

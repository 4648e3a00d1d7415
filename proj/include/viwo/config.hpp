#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "viwo/line_pipeline.hpp"
#include "viwo/point_pipeline.hpp"
#include "viwo/propagation.hpp"
#include "viwo/simulator.hpp"

namespace viwo {

/// Invalid, unknown, or ill-typed configuration content.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Initial error standard deviations for the filter covariance.
struct InitStd {
  double att = 1.0e-3; // rad
  double pos = 1.0e-3; // m
  double vel = 1.0e-2; // m/s
  double bg = 1.0e-3;  // rad/s
  double ba = 1.0e-2;  // m/s^2
};

/// Everything a replay run needs besides the dataset itself.
struct RunConfig {
  std::string dataset;
  std::string out;
  std::uint64_t seed = 1;

  bool use_lines = true;
  bool use_mcc = true;
  bool use_wheel = true;
  bool rematch_lines = false;
  bool check_psd = false; // track the covariance spectrum while running

  int max_clones = 11;
  double gravity = 9.81;
  ImuNoise imu_noise;
  WheelNoise wheel_noise;
  double wheel_chi2_multiplier = 1.0;
  InitStd init_std;

  PointUpdateConfig points;
  LineUpdateConfig lines;
  LineClassifyConfig classify;
  LineMatchConfig match;
  double assign_max_dist = 3.0; // px, point-to-segment assignment
};

/// Serialize with a fixed key order and shortest-round-trip numbers, so
/// serialize(parse(serialize(c))) == serialize(c) byte for byte.
std::string serialize_run_config(const RunConfig &cfg);

/// Parse JSON text; missing keys keep defaults, unknown keys are a ConfigError.
RunConfig parse_run_config(const std::string &text);

std::string serialize_sim_config(const SimConfig &cfg);
SimConfig parse_sim_config(const std::string &text);

/// Sensor calibration stored alongside a dataset.
struct CalibConfig {
  CameraModel cam;
  OdometerExtrinsics wheel_ext;
  double gravity = 9.81;
};

std::string serialize_calib(const CalibConfig &calib);
CalibConfig parse_calib(const std::string &text);

/// Reseed both the world generator and the sensor synthesis from one value.
void set_sim_seed(SimConfig &cfg, std::uint64_t seed);

} // namespace viwo

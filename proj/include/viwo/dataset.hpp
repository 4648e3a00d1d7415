#pragma once

#include <Eigen/Geometry>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "viwo/config.hpp"
#include "viwo/simulator.hpp"

namespace viwo {

/// Dataset ingestion failure. `kind` distinguishes a missing file, malformed
/// content (message names file and line), and unsorted timestamps.
struct DatasetError : std::runtime_error {
  enum class Kind { MissingFile, Parse, NonMonotonic };
  Kind kind;
  DatasetError(Kind k, const std::string &msg) : std::runtime_error(msg), kind(k) {}
};

/// One pose row of a TUM trajectory file: q rotates body vectors into the
/// world frame (R_ItoG), p is the body position in the world.
struct TumPose {
  double t = 0.0;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
};

/// A replayable dataset: calibration plus time-sorted sensor streams.
struct Dataset {
  CameraModel cam;
  OdometerExtrinsics wheel_ext;
  double gravity = 9.81;
  std::vector<ImuSample> imu;
  std::vector<WheelSample> wheel;
  std::vector<Frame> frames;
  std::vector<TumPose> gt;
};

/// Ground-truth world tables written next to the sensor files.
struct SimPointInfo {
  bool dynamic = false;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Vector3d vel = Eigen::Vector3d::Zero();
};

struct SimLineInfo {
  AxisClass axis = AxisClass::Unclassified;
  Eigen::Vector3d p1 = Eigen::Vector3d::Zero();
  Eigen::Vector3d p2 = Eigen::Vector3d::Zero();
};

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

/// Write all dataset files (CSV streams, TUM ground truth, calib.json, and
/// the sim_points/sim_lines ground-truth tables) into dir, creating it.
void write_dataset(const std::string &dir, const SimDataset &sim, const SimConfig &cfg);

/// In-memory equivalent of write_dataset + load_dataset (numbers are written
/// shortest-round-trip, so the two paths agree bit for bit).
Dataset make_dataset(const SimDataset &sim, const SimConfig &cfg);

/// Load and validate a dataset directory; throws DatasetError.
Dataset load_dataset(const std::string &dir);

std::map<long, SimPointInfo> load_sim_points(const std::string &dir);
std::map<long, SimLineInfo> load_sim_lines(const std::string &dir);

void write_tum(const std::string &path, const std::vector<TumPose> &poses);
std::vector<TumPose> load_tum(const std::string &path);

} // namespace viwo

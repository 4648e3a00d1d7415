#pragma once

#include <string>
#include <vector>

#include "viwo/dataset.hpp"

namespace viwo {

/// Aggregate counters over one replay, written to stats.txt.
struct ReplayStats {
  long frames = 0;
  long wheel_updates = 0;
  long wheel_gate_rejected = 0;

  long point_tracks = 0;
  long point_used = 0;
  long point_mcc_rejected = 0;
  long point_tri_failed = 0;
  long point_gate_rejected = 0;

  long line_tracks = 0;
  long line_used = 0;
  long line_dynamic_rejected = 0;
  long line_gate_rejected = 0;
  long line_no_method = 0;
  long line_residual_rejected = 0;
  long plane_ok = 0;
  long plane_degenerate = 0;
  long two_points = 0;
  long point_direction = 0;
  long with_point_attempts = 0;
  long with_point_success = 0;

  long match_tp = 0; // matcher agreed with ground-truth ids (rematch mode)
  long match_fp = 0;
  long match_fn = 0;

  double cov_min_eig = 0.0; // smallest covariance eigenvalue seen (check_psd)
  bool psd_checked = false;
  bool psd_ok = true;
};

/// Per-track outcome rows for features.csv / lines.csv. `instance` counts
/// re-openings of the same external id after consumption.
struct FeatureRecord {
  long id = -1;
  int instance = 0;
  int obs = 0;
  PointTrackStatus status = PointTrackStatus::Active;
  double mcc_residual = -1.0;
  bool gate_rejected = false;
};

struct LineRecord {
  long id = -1;
  int instance = 0;
  int obs = 0;
  LineTrackStatus status = LineTrackStatus::Active;
  LineTriMethod method = LineTriMethod::None;
  bool gate_rejected = false;
};

struct ReplayResult {
  std::vector<TumPose> est; // one pose per frame, after all updates
  ReplayStats stats;
  std::vector<FeatureRecord> features;
  std::vector<LineRecord> lines;
};

enum class ReplayStatus { Ok, NumericalFailure };

/**
 * Replay a dataset through the filter: per frame, propagate, apply pending
 * wheel updates, clone, ingest observations (classify, assign, match),
 * run the point and line updates, then marginalize down to max_clones - 1.
 * Deterministic for fixed inputs.
 */
ReplayStatus run_replay(const Dataset &ds, const RunConfig &cfg, ReplayResult &out);

/// Write est.txt, stats.txt, features.csv, lines.csv, and config.json.
void write_replay_outputs(const std::string &dir, const RunConfig &cfg,
                          const ReplayResult &result);

} // namespace viwo

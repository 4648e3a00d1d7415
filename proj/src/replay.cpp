#include "viwo/replay.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>

namespace viwo {

namespace {

Eigen::Vector3d gyro_at(const std::vector<ImuSample> &imu, double t) {
  const auto it = std::lower_bound(
      imu.begin(), imu.end(), t,
      [](const ImuSample &s, double time) { return s.t < time; });
  if (it == imu.begin()) {
    return it->w;
  }
  if (it == imu.end()) {
    return imu.back().w;
  }
  const ImuSample &s0 = *(it - 1);
  const ImuSample &s1 = *it;
  if (s1.t <= s0.t) {
    return s1.w;
  }
  const double a = (t - s0.t) / (s1.t - s0.t);
  return (1.0 - a) * s0.w + a * s1.w;
}

FilterState initial_state(const Dataset &ds, const RunConfig &cfg) {
  FilterState state;
  state.max_clones = cfg.max_clones;
  state.time = ds.gt.front().t;
  state.imu.R_GtoI = Rotation(ds.gt.front().q.conjugate());
  state.imu.p_IinG = ds.gt.front().p;
  if (ds.gt.size() >= 2 && ds.gt[1].t > ds.gt[0].t) {
    state.imu.v_IinG = (ds.gt[1].p - ds.gt[0].p) / (ds.gt[1].t - ds.gt[0].t);
  }

  state.P = Eigen::MatrixXd::Zero(kImuErrDim, kImuErrDim);
  const auto block = [&](int off, double std) {
    state.P.block<3, 3>(off, off) = std * std * Eigen::Matrix3d::Identity();
  };
  block(0, cfg.init_std.att);
  block(3, cfg.init_std.pos);
  block(6, cfg.init_std.vel);
  block(9, cfg.init_std.bg);
  block(12, cfg.init_std.ba);
  return state;
}

const char *point_status_name(PointTrackStatus s) {
  switch (s) {
  case PointTrackStatus::Active:
    return "active";
  case PointTrackStatus::Triangulated:
    return "triangulated";
  case PointTrackStatus::RejectedTriangulation:
    return "rejected_triangulation";
  case PointTrackStatus::RejectedMCC:
    return "rejected_mcc";
  case PointTrackStatus::Used:
    return "used";
  }
  return "?";
}

const char *line_status_name(LineTrackStatus s) {
  switch (s) {
  case LineTrackStatus::Active:
    return "active";
  case LineTrackStatus::Triangulated:
    return "triangulated";
  case LineTrackStatus::RejectedTriangulation:
    return "rejected_triangulation";
  case LineTrackStatus::RejectedDynamic:
    return "rejected_dynamic";
  case LineTrackStatus::Used:
    return "used";
  }
  return "?";
}

const char *method_name(LineTriMethod m) {
  switch (m) {
  case LineTriMethod::None:
    return "none";
  case LineTriMethod::PlaneIntersection:
    return "planes";
  case LineTriMethod::TwoPoints:
    return "two_points";
  case LineTriMethod::PointDirection:
    return "point_direction";
  }
  return "?";
}

} // namespace

ReplayStatus run_replay(const Dataset &ds, const RunConfig &cfg, ReplayResult &out) {
  out = ReplayResult();
  if (ds.gt.empty() || ds.frames.empty() || ds.imu.size() < 2) {
    return ReplayStatus::NumericalFailure;
  }

  FilterState state = initial_state(ds, cfg);
  PointUpdateConfig point_cfg = cfg.points;
  point_cfg.use_mcc = cfg.use_mcc;

  std::map<long, PointTrack> active_points;
  std::map<long, LineTrack> active_lines;
  std::map<long, int> point_instances;
  std::map<long, int> line_instances;
  std::map<long, TriangulatedPoint> registry;
  std::set<long> dynamic_ids;

  // Previous-frame segments for descriptor-free rematching.
  std::vector<LineSegment2D> prev_segs;
  std::vector<std::vector<long>> prev_assigned;
  std::vector<long> prev_internal;
  long next_internal = 0;

  const VanishingPoints vps = compute_vanishing_points(ds.cam.R_ItoC, ds.cam);
  size_t wheel_idx = 0;
  out.stats.cov_min_eig = std::numeric_limits<double>::infinity();

  for (const Frame &frame : ds.frames) {
    const double t_f = frame.t;
    if (t_f < state.time) {
      return ReplayStatus::NumericalFailure;
    }

    // Interoceptive updates up to the frame time.
    while (wheel_idx < ds.wheel.size() && ds.wheel[wheel_idx].t <= t_f) {
      const WheelSample &ws = ds.wheel[wheel_idx++];
      if (ws.t < state.time) {
        continue; // before the initial state
      }
      if (propagate(state, ds.imu, ws.t, cfg.imu_noise, cfg.gravity) !=
          PropagateStatus::Ok) {
        return ReplayStatus::NumericalFailure;
      }
      if (cfg.use_wheel) {
        const UpdateResult ur =
            wheel_update(state, ws, ds.wheel_ext, cfg.wheel_noise,
                         gyro_at(ds.imu, ws.t), cfg.wheel_chi2_multiplier);
        if (ur.status == UpdateStatus::NumericalFailure) {
          return ReplayStatus::NumericalFailure;
        }
        out.stats.wheel_updates++;
        if (ur.status == UpdateStatus::GateRejected) {
          out.stats.wheel_gate_rejected++;
        }
      }
    }

    if (propagate(state, ds.imu, t_f, cfg.imu_noise, cfg.gravity) !=
        PropagateStatus::Ok) {
      return ReplayStatus::NumericalFailure;
    }
    if (augment_clone(state, t_f) != AugmentStatus::Ok) {
      return ReplayStatus::NumericalFailure;
    }

    // --- Ingest point observations.
    std::set<long> seen_points;
    for (const FramePoint &fp : frame.points) {
      seen_points.insert(fp.id);
      auto it = active_points.find(fp.id);
      if (it == active_points.end()) {
        PointTrack track;
        track.id = fp.id;
        it = active_points.emplace(fp.id, std::move(track)).first;
      }
      it->second.obs.push_back({t_f, fp.uv});
    }

    // --- Ingest line observations.
    std::set<long> seen_lines;
    if (cfg.use_lines) {
      const std::vector<LineSegment2D> &segs = frame.segs;
      std::vector<std::pair<long, Eigen::Vector2d>> frame_pts;
      frame_pts.reserve(frame.points.size());
      for (const FramePoint &fp : frame.points) {
        frame_pts.emplace_back(fp.id, fp.uv);
      }
      const std::vector<std::vector<long>> assigned =
          assign_points(segs, frame_pts, cfg.assign_max_dist);

      std::vector<long> internal(segs.size(), -1);
      if (cfg.rematch_lines) {
        const auto matches =
            match_lines(prev_segs, prev_assigned, segs, assigned, cfg.match);
        std::set<long> gt_prev, gt_cur;
        for (const auto &s : prev_segs) {
          gt_prev.insert(s.id);
        }
        for (const auto &s : segs) {
          gt_cur.insert(s.id);
        }
        long possible = 0;
        for (long id : gt_cur) {
          if (gt_prev.count(id)) {
            possible++;
          }
        }
        long tp = 0;
        for (const auto &[pi, ci] : matches) {
          internal[ci] = prev_internal[pi];
          if (prev_segs[pi].id == segs[ci].id) {
            tp++;
          } else {
            out.stats.match_fp++;
          }
        }
        out.stats.match_tp += tp;
        out.stats.match_fn += possible - tp;
        for (size_t i = 0; i < segs.size(); i++) {
          if (internal[i] < 0) {
            internal[i] = next_internal++;
          }
        }
      } else {
        for (size_t i = 0; i < segs.size(); i++) {
          internal[i] = segs[i].id;
        }
      }

      for (size_t i = 0; i < segs.size(); i++) {
        const long id = internal[i];
        seen_lines.insert(id);
        auto it = active_lines.find(id);
        if (it == active_lines.end()) {
          LineTrack track;
          track.id = id;
          it = active_lines.emplace(id, std::move(track)).first;
        }
        LineTrack &track = it->second;
        LineObservation ob;
        ob.t = t_f;
        ob.seg = segs[i];
        ob.assigned_ids = assigned[i];
        track.obs.push_back(std::move(ob));
        if (!track.classified) {
          const LineClassification cls =
              classify_line(segs[i], vps, cfg.classify);
          if (cls.axis != AxisClass::Unclassified) {
            track.classified = true;
            track.axis = cls.axis;
            track.R_GtoI_at_class = state.imu.R_GtoI;
          }
        }
      }

      prev_segs = segs;
      prev_assigned = assigned;
      prev_internal = internal;
    }

    // --- Mature point tracks: lost, or spanning the full window.
    std::vector<long> mature_point_ids;
    for (const auto &[id, track] : active_points) {
      const bool lost = !seen_points.count(id);
      if (lost || static_cast<int>(track.obs.size()) >= cfg.max_clones) {
        mature_point_ids.push_back(id);
      }
    }
    std::vector<PointTrack *> mature_points;
    for (long id : mature_point_ids) {
      PointTrack &track = active_points.at(id);
      if (track.obs.size() >= 2) {
        mature_points.push_back(&track);
      } else {
        active_points.erase(id); // nothing to estimate from
      }
    }

    if (!mature_points.empty()) {
      const PointUpdateSummary ps =
          point_update(state, mature_points, ds.cam, point_cfg, registry);
      if (ps.update == UpdateStatus::NumericalFailure) {
        return ReplayStatus::NumericalFailure;
      }
      out.stats.point_tracks += ps.processed;
      out.stats.point_used += ps.used;
      out.stats.point_mcc_rejected += ps.mcc_dynamic;
      out.stats.point_tri_failed += ps.triangulation_failed + ps.too_few_obs;
      out.stats.point_gate_rejected += ps.gate_rejected;
      dynamic_ids.insert(ps.dynamic_ids.begin(), ps.dynamic_ids.end());

      for (PointTrack *track : mature_points) {
        FeatureRecord rec;
        rec.id = track->id;
        rec.instance = point_instances[track->id]++;
        rec.obs = static_cast<int>(track->obs.size());
        rec.status = track->status;
        rec.mcc_residual = track->mcc_residual;
        rec.gate_rejected = track->gate_rejected;
        out.features.push_back(rec);
        active_points.erase(track->id);
      }
    }

    // --- Mature line tracks.
    if (cfg.use_lines) {
      std::vector<long> mature_line_ids;
      for (const auto &[id, track] : active_lines) {
        const bool lost = !seen_lines.count(id);
        if (lost || static_cast<int>(track.obs.size()) >= cfg.max_clones) {
          mature_line_ids.push_back(id);
        }
      }
      std::vector<LineTrack *> mature_lines;
      for (long id : mature_line_ids) {
        LineTrack &track = active_lines.at(id);
        if (static_cast<int>(track.obs.size()) >= cfg.lines.min_obs) {
          mature_lines.push_back(&track);
        } else {
          active_lines.erase(id);
        }
      }

      // Give maturing lines access to 3D estimates of their assigned points,
      // triangulating still-active tracks on demand (consistency-checked).
      for (LineTrack *track : mature_lines) {
        for (long pid : track->assigned_union()) {
          if (registry.count(pid) || dynamic_ids.count(pid)) {
            continue;
          }
          const auto it = active_points.find(pid);
          if (it == active_points.end()) {
            continue;
          }
          std::vector<Eigen::Vector2d> uvs;
          std::vector<Pose> cams;
          for (const auto &ob : it->second.obs) {
            const int ci = state.clone_index(ob.t);
            if (ci < 0) {
              continue;
            }
            uvs.push_back(ob.uv);
            cams.push_back(ds.cam.camera_pose(state.clones[ci].pose()));
          }
          if (uvs.size() < 2) {
            continue;
          }
          TriangulatedPoint tp;
          if (triangulate_point(uvs, cams, ds.cam, point_cfg.tri, tp) !=
              PointTriStatus::Ok) {
            continue;
          }
          if (point_cfg.use_mcc) {
            const double res =
                motion_consistency_residual(tp.p_G, uvs, cams, ds.cam);
            if (res > point_cfg.mcc_threshold) {
              dynamic_ids.insert(pid);
              continue;
            }
          }
          registry[pid] = tp;
        }
      }

      if (!mature_lines.empty()) {
        const LineUpdateSummary ls = line_update(state, mature_lines, registry,
                                                 dynamic_ids, ds.cam, cfg.lines);
        if (ls.update == UpdateStatus::NumericalFailure) {
          return ReplayStatus::NumericalFailure;
        }
        out.stats.line_tracks += ls.processed;
        out.stats.line_used += ls.used;
        out.stats.line_dynamic_rejected += ls.dynamic_rejected;
        out.stats.line_gate_rejected += ls.gate_rejected;
        out.stats.line_no_method += ls.no_method;
        out.stats.line_residual_rejected += ls.residual_rejected;
        out.stats.plane_ok += ls.plane_ok;
        out.stats.plane_degenerate += ls.plane_degenerate;
        out.stats.two_points += ls.two_points;
        out.stats.point_direction += ls.point_direction;
        out.stats.with_point_attempts += ls.with_point_attempts;
        out.stats.with_point_success += ls.with_point_success;

        for (LineTrack *track : mature_lines) {
          LineRecord rec;
          rec.id = track->id;
          rec.instance = line_instances[track->id]++;
          rec.obs = static_cast<int>(track->obs.size());
          rec.status = track->status;
          rec.method = track->method;
          rec.gate_rejected = track->gate_rejected;
          out.lines.push_back(rec);
          active_lines.erase(track->id);
        }
      }
    }

    // --- Shrink the window for the next clone.
    while (static_cast<int>(state.clones.size()) > cfg.max_clones - 1) {
      marginalize_oldest(state);
    }

    if (!state.imu.p_IinG.allFinite() || !state.P.allFinite()) {
      return ReplayStatus::NumericalFailure;
    }
    if (cfg.check_psd) {
      const double eig = state.min_covariance_eigenvalue();
      out.stats.cov_min_eig = std::min(out.stats.cov_min_eig, eig);
      if (eig < -1e-9) {
        out.stats.psd_ok = false;
      }
      out.stats.psd_checked = true;
    }

    TumPose pose;
    pose.t = t_f;
    pose.p = state.imu.p_IinG;
    pose.q = state.imu.R_GtoI.inverse().quat();
    out.est.push_back(pose);
    out.stats.frames++;
  }

  if (!out.stats.psd_checked) {
    out.stats.cov_min_eig = 0.0;
  }
  return ReplayStatus::Ok;
}

void write_replay_outputs(const std::string &dir, const RunConfig &cfg,
                          const ReplayResult &result) {
  std::filesystem::create_directories(dir);
  write_tum(dir + "/est.txt", result.est);

  {
    const ReplayStats &s = result.stats;
    std::string out;
    const auto put = [&out](const char *key, auto value) {
      if constexpr (std::is_same_v<decltype(value), double>) {
        out += std::string(key) + " " + format_double(value) + "\n";
      } else {
        out += std::string(key) + " " + std::to_string(value) + "\n";
      }
    };
    put("frames", s.frames);
    put("wheel_updates", s.wheel_updates);
    put("wheel_gate_rejected", s.wheel_gate_rejected);
    put("point_tracks", s.point_tracks);
    put("point_used", s.point_used);
    put("point_mcc_rejected", s.point_mcc_rejected);
    put("point_tri_failed", s.point_tri_failed);
    put("point_gate_rejected", s.point_gate_rejected);
    put("line_tracks", s.line_tracks);
    put("line_used", s.line_used);
    put("line_dynamic_rejected", s.line_dynamic_rejected);
    put("line_gate_rejected", s.line_gate_rejected);
    put("line_no_method", s.line_no_method);
    put("line_residual_rejected", s.line_residual_rejected);
    put("plane_ok", s.plane_ok);
    put("plane_degenerate", s.plane_degenerate);
    put("two_points", s.two_points);
    put("point_direction", s.point_direction);
    put("with_point_attempts", s.with_point_attempts);
    put("with_point_success", s.with_point_success);
    put("match_tp", s.match_tp);
    put("match_fp", s.match_fp);
    put("match_fn", s.match_fn);
    put("cov_min_eig", s.cov_min_eig);
    put("psd_checked", static_cast<long>(s.psd_checked));
    put("psd_ok", static_cast<long>(s.psd_ok));
    std::ofstream f(dir + "/stats.txt", std::ios::binary);
    f << out;
  }
  {
    std::string out = "# id,instance,obs,status,mcc_residual,gate_rejected\n";
    for (const auto &rec : result.features) {
      out += std::to_string(rec.id) + "," + std::to_string(rec.instance) + "," +
             std::to_string(rec.obs) + "," + point_status_name(rec.status) + "," +
             format_double(rec.mcc_residual) + "," +
             (rec.gate_rejected ? "1" : "0") + "\n";
    }
    std::ofstream f(dir + "/features.csv", std::ios::binary);
    f << out;
  }
  {
    std::string out = "# id,instance,obs,status,method,gate_rejected\n";
    for (const auto &rec : result.lines) {
      out += std::to_string(rec.id) + "," + std::to_string(rec.instance) + "," +
             std::to_string(rec.obs) + "," + line_status_name(rec.status) + "," +
             method_name(rec.method) + "," + (rec.gate_rejected ? "1" : "0") + "\n";
    }
    std::ofstream f(dir + "/lines.csv", std::ios::binary);
    f << out;
  }
  {
    std::ofstream f(dir + "/config.json", std::ios::binary);
    f << serialize_run_config(cfg);
  }
}

} // namespace viwo

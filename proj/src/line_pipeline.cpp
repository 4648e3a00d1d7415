#include "viwo/line_pipeline.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace viwo {

namespace {

constexpr double kPi = 3.14159265358979323846;

double deg2rad(double d) { return d * kPi / 180.0; }

/// Fold an angle difference into [0, pi/2] (undirected line directions).
double fold_angle(double a) {
  a = std::fmod(std::abs(a), kPi);
  return a > 0.5 * kPi ? kPi - a : a;
}

/// Canonical sign for a homogeneous 2D line so that +-l compare equal.
Eigen::Vector3d canonicalize(const Eigen::Vector3d &l) {
  if (l.x() < 0.0 || (l.x() == 0.0 && l.y() < 0.0)) {
    return -l;
  }
  return l;
}

} // namespace

Eigen::Vector3d axis_unit(AxisClass axis) {
  switch (axis) {
  case AxisClass::X:
    return Eigen::Vector3d::UnitX();
  case AxisClass::Y:
    return Eigen::Vector3d::UnitY();
  case AxisClass::Z:
    return Eigen::Vector3d::UnitZ();
  default:
    return Eigen::Vector3d::Zero();
  }
}

VanishingPoints compute_vanishing_points(const Rotation &R_ItoC,
                                         const CameraModel &cam,
                                         const Rotation *R_GtoI) {
  VanishingPoints vps;
  const Eigen::Matrix3d K = cam.K();
  for (int a = 0; a < 3; a++) {
    Eigen::Vector3d u = Eigen::Vector3d::Unit(a);
    if (R_GtoI != nullptr) {
      u = *R_GtoI * u;
    }
    vps.vp[a] = K * (R_ItoC * u);
  }
  return vps;
}

LineClassification classify_line(const LineSegment2D &seg, const VanishingPoints &vps,
                                 const LineClassifyConfig &cfg) {
  LineClassification best;
  best.axis = AxisClass::Unclassified;
  const double max_angle = deg2rad(cfg.max_angle_deg);
  const Eigen::Vector2d pm = seg.midpoint();
  const Eigen::Vector3d pm_h(pm.x(), pm.y(), 1.0);
  const double seg_angle = std::atan2(seg.ps.y() - seg.pe.y(), seg.ps.x() - seg.pe.x());

  for (int a = 0; a < 3; a++) {
    const Eigen::Vector3d &vp = vps.vp[a];

    Eigen::Vector2d dir;
    if (std::abs(vp.z()) < 1e-8) {
      dir = Eigen::Vector2d(vp.x(), vp.y()); // vanishing point at infinity
    } else {
      dir = Eigen::Vector2d(vp.x() / vp.z() - pm.x(), vp.y() / vp.z() - pm.y());
    }
    if (dir.norm() < 1e-9) {
      continue; // midpoint coincides with the vanishing point
    }
    const double e_angle = fold_angle(seg_angle - std::atan2(dir.y(), dir.x()));

    // Line through the midpoint and the vanishing point (homogeneous cross).
    const Eigen::Vector3d n = pm_h.cross(vp);
    const double nn = std::hypot(n.x(), n.y());
    if (nn < 1e-9) {
      continue;
    }
    const Eigen::Vector3d ps_h(seg.ps.x(), seg.ps.y(), 1.0);
    const Eigen::Vector3d pe_h(seg.pe.x(), seg.pe.y(), 1.0);
    // Mean absolute endpoint offset from that line. The signed offsets cancel
    // by construction (the line passes through the midpoint), so the useful
    // quantity is the unsigned mean: half_length * sin(e_angle), a length-
    // scaled alignment error that tightens the gate for long segments.
    const double e_dist =
        (std::abs(n.dot(ps_h)) + std::abs(n.dot(pe_h))) / (2.0 * nn);

    if (e_angle <= max_angle && e_dist <= cfg.max_dist_px &&
        (best.axis == AxisClass::Unclassified || e_angle < best.e_angle)) {
      best.axis = static_cast<AxisClass>(a + 1);
      best.e_angle = e_angle;
      best.e_dist = e_dist;
    }
  }
  return best;
}

PointSegmentDistance point_line_distance(const Eigen::Vector2d &p,
                                         const LineSegment2D &seg) {
  PointSegmentDistance out;
  const double us = seg.ps.x(), vs = seg.ps.y();
  const double ue = seg.pe.x(), ve = seg.pe.y();
  out.len2 = (seg.ps - seg.pe).squaredNorm();
  out.cross = (ue - us) * (p.x() - us) + (ve - vs) * (p.y() - vs);
  if (out.cross <= 0.0) {
    out.dist = (p - seg.ps).norm();
  } else if (out.cross > out.len2) {
    out.dist = (p - seg.pe).norm();
  } else {
    const double len = std::sqrt(out.len2);
    out.dist = std::abs((ve - vs) * p.x() + (us - ue) * p.y() + ue * vs - us * ve) / len;
  }
  return out;
}

std::vector<std::vector<long>> assign_points(
    const std::vector<LineSegment2D> &segs,
    const std::vector<std::pair<long, Eigen::Vector2d>> &points, double max_dist) {
  std::vector<std::vector<long>> assigned(segs.size());
  for (size_t s = 0; s < segs.size(); s++) {
    for (const auto &[id, uv] : points) {
      const PointSegmentDistance d = point_line_distance(uv, segs[s]);
      if (d.interior() && d.dist < max_dist) {
        assigned[s].push_back(id);
      }
    }
    std::sort(assigned[s].begin(), assigned[s].end());
  }
  return assigned;
}

std::vector<std::pair<int, int>> match_lines(
    const std::vector<LineSegment2D> &prev,
    const std::vector<std::vector<long>> &prev_ids,
    const std::vector<LineSegment2D> &cur,
    const std::vector<std::vector<long>> &cur_ids, const LineMatchConfig &cfg) {
  struct Candidate {
    int i, j;
    int shared;
    double mid_dist;
  };
  std::vector<Candidate> candidates;
  const double max_dir = deg2rad(cfg.max_direction_diff_deg);

  for (size_t i = 0; i < prev.size(); i++) {
    for (size_t j = 0; j < cur.size(); j++) {
      std::vector<long> shared;
      std::set_intersection(prev_ids[i].begin(), prev_ids[i].end(),
                            cur_ids[j].begin(), cur_ids[j].end(),
                            std::back_inserter(shared));
      if (shared.empty()) {
        continue;
      }
      const double mid_dist = (prev[i].midpoint() - cur[j].midpoint()).norm();
      if (shared.size() == 1) {
        const double a_prev = std::atan2(prev[i].pe.y() - prev[i].ps.y(),
                                         prev[i].pe.x() - prev[i].ps.x());
        const double a_cur =
            std::atan2(cur[j].pe.y() - cur[j].ps.y(), cur[j].pe.x() - cur[j].ps.x());
        if (mid_dist > cfg.max_midpoint_dist || fold_angle(a_prev - a_cur) > max_dir) {
          continue;
        }
      }
      candidates.push_back({static_cast<int>(i), static_cast<int>(j),
                            static_cast<int>(shared.size()), mid_dist});
    }
  }

  std::sort(candidates.begin(), candidates.end(), [](const Candidate &a, const Candidate &b) {
    if (a.shared != b.shared) {
      return a.shared > b.shared;
    }
    if (a.mid_dist != b.mid_dist) {
      return a.mid_dist < b.mid_dist;
    }
    if (a.i != b.i) {
      return a.i < b.i;
    }
    return a.j < b.j;
  });

  std::vector<std::pair<int, int>> matches;
  std::vector<bool> prev_used(prev.size(), false), cur_used(cur.size(), false);
  for (const Candidate &c : candidates) {
    if (prev_used[c.i] || cur_used[c.j]) {
      continue;
    }
    prev_used[c.i] = true;
    cur_used[c.j] = true;
    matches.emplace_back(c.i, c.j);
  }
  return matches;
}

LineTriStatus triangulate_line_planes(const std::vector<LineSegment2D> &segs,
                                      const std::vector<Pose> &T_GtoCs,
                                      const CameraModel &cam, double min_angle_deg,
                                      PluckerLine &out) {
  const size_t m = segs.size();
  if (m < 2 || T_GtoCs.size() != m) {
    return LineTriStatus::Degenerate;
  }

  // Back-projection plane of each observation, in the global frame.
  std::vector<Eigen::Vector3d> normals(m);
  std::vector<double> offsets(m);
  for (size_t i = 0; i < m; i++) {
    const Eigen::Vector3d bs = cam.bearing(segs[i].ps.x(), segs[i].ps.y());
    const Eigen::Vector3d be = cam.bearing(segs[i].pe.x(), segs[i].pe.y());
    Eigen::Vector3d n_C = bs.cross(be);
    if (n_C.norm() < 1e-12) {
      normals[i].setZero();
      continue;
    }
    const Eigen::Matrix3d R = T_GtoCs[i].rot.matrix();
    normals[i] = (R.transpose() * n_C).normalized();
    offsets[i] = normals[i].dot(T_GtoCs[i].trans);
  }

  double best_sin = -1.0;
  size_t bi = 0, bj = 0;
  for (size_t i = 0; i < m; i++) {
    if (normals[i].isZero()) {
      continue;
    }
    for (size_t j = i + 1; j < m; j++) {
      if (normals[j].isZero()) {
        continue;
      }
      const double s = normals[i].cross(normals[j]).norm();
      if (s > best_sin) {
        best_sin = s;
        bi = i;
        bj = j;
      }
    }
  }
  if (best_sin < std::sin(deg2rad(min_angle_deg))) {
    return LineTriStatus::Degenerate;
  }

  const Eigen::Vector3d v = normals[bi].cross(normals[bj]).normalized();
  Eigen::Matrix3d A;
  A.row(0) = normals[bi].transpose();
  A.row(1) = normals[bj].transpose();
  A.row(2) = v.transpose();
  const Eigen::Vector3d rhs(offsets[bi], offsets[bj], 0.0);
  const Eigen::Vector3d p0 = A.fullPivLu().solve(rhs);
  if (!p0.allFinite()) {
    return LineTriStatus::Degenerate;
  }
  out.v = v;
  out.n = p0.cross(v);
  return LineTriStatus::Ok;
}

LineTriStatus triangulate_line_two_points(const Eigen::Vector3d &p1,
                                          const Eigen::Vector3d &p2,
                                          double min_separation, PluckerLine &out) {
  const double d = (p1 - p2).norm();
  if (d <= min_separation) {
    return LineTriStatus::PointsTooClose;
  }
  out.v = (p2 - p1) / d;
  out.n = p1.cross(p2) / d; // equals p1 x v: moment consistent with unit v
  return LineTriStatus::Ok;
}

PluckerLine triangulate_line_point_direction(const Eigen::Vector3d &p3,
                                             AxisClass axis,
                                             const Rotation &R_GtoI) {
  PluckerLine out;
  out.v = R_GtoI.inverse() * axis_unit(axis);
  out.n = p3.cross(out.v);
  return out;
}

LineTriangulation triangulate_line(const std::vector<LineSegment2D> &segs,
                                   const std::vector<Pose> &T_GtoCs,
                                   const CameraModel &cam,
                                   const std::vector<Eigen::Vector3d> &points,
                                   AxisClass axis, const Rotation &R_GtoI_at_class,
                                   const LineTriangulationConfig &cfg) {
  LineTriangulation out;

  if (triangulate_line_planes(segs, T_GtoCs, cam, cfg.plane_min_angle_deg, out.line) ==
      LineTriStatus::Ok) {
    out.method = LineTriMethod::PlaneIntersection;
  } else {
    out.plane_degenerate = true;
  }

  if (out.method == LineTriMethod::None && points.size() >= 2) {
    // Closest admissible pair of assigned triangulated points.
    double best = std::numeric_limits<double>::infinity();
    size_t bi = 0, bj = 0;
    for (size_t i = 0; i < points.size(); i++) {
      for (size_t j = i + 1; j < points.size(); j++) {
        const double d = (points[i] - points[j]).norm();
        if (d > cfg.min_point_separation && d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    if (std::isfinite(best) &&
        triangulate_line_two_points(points[bi], points[bj], cfg.min_point_separation,
                                    out.line) == LineTriStatus::Ok) {
      out.method = LineTriMethod::TwoPoints;
    }
  }

  if (out.method == LineTriMethod::None && !points.empty() &&
      axis != AxisClass::Unclassified) {
    out.line = triangulate_line_point_direction(points.front(), axis, R_GtoI_at_class);
    out.method = LineTriMethod::PointDirection;
  }

  if (out.method == LineTriMethod::None) {
    out.status = LineTriStatus::NoMethodApplicable;
    return out;
  }

  // Accept only if the candidate explains the observed segments.
  double sum = 0.0;
  int n = 0;
  for (size_t i = 0; i < segs.size(); i++) {
    const PluckerLine L_C = transform_plucker(T_GtoCs[i], out.line);
    const auto line2d = project_line(L_C, cam);
    if (!line2d) {
      continue;
    }
    const Eigen::Vector3d l = canonicalize(line2d->l);
    const double sn = std::hypot(l.x(), l.y());
    if (sn < 1e-12) {
      continue;
    }
    const Eigen::Vector3d ps_h(segs[i].ps.x(), segs[i].ps.y(), 1.0);
    const Eigen::Vector3d pe_h(segs[i].pe.x(), segs[i].pe.y(), 1.0);
    sum += 0.5 * (std::abs(ps_h.dot(l)) + std::abs(pe_h.dot(l))) / sn;
    n++;
  }
  out.mean_residual = n > 0 ? sum / n : std::numeric_limits<double>::infinity();
  if (out.mean_residual > cfg.max_mean_residual) {
    out.status = LineTriStatus::ResidualTooLarge;
    return out;
  }
  out.status = LineTriStatus::Ok;
  return out;
}

std::optional<Eigen::Vector2d> line_measurement(const PluckerLine &L_G,
                                                const Pose &T_GtoI,
                                                const CameraModel &cam,
                                                const LineSegment2D &seg) {
  const Pose T_GtoC = cam.camera_pose(T_GtoI);
  const PluckerLine L_C = transform_plucker(T_GtoC, L_G);
  const auto line2d = project_line(L_C, cam);
  if (!line2d) {
    return std::nullopt;
  }
  const Eigen::Vector3d l = canonicalize(line2d->l);
  const double sn = std::hypot(l.x(), l.y());
  if (sn < 1e-12) {
    return std::nullopt;
  }
  const Eigen::Vector3d ps_h(seg.ps.x(), seg.ps.y(), 1.0);
  const Eigen::Vector3d pe_h(seg.pe.x(), seg.pe.y(), 1.0);
  return Eigen::Vector2d(ps_h.dot(l) / sn, pe_h.dot(l) / sn);
}

bool line_jacobians(const PluckerLine &L_G, const Clone &clone,
                    const CameraModel &cam, const LineSegment2D &seg,
                    Eigen::Matrix<double, 2, 6> &H_clone,
                    Eigen::Matrix<double, 2, 6> &H_L6,
                    Eigen::Matrix<double, 2, 4> &H_L4) {
  // Work at unit joint scale: the measurement is scale-invariant and the
  // orthonormal tangent is defined on the normalized coordinates.
  const double s = std::sqrt(L_G.n.squaredNorm() + L_G.v.squaredNorm());
  if (s < 1e-12) {
    return false;
  }
  const Eigen::Vector3d n_bar = L_G.n / s;
  const Eigen::Vector3d v_bar = L_G.v / s;

  const Eigen::Matrix3d R = clone.R_GtoI.matrix();
  const Eigen::Vector3d n_I = R * (n_bar - clone.p_IinG.cross(v_bar));
  const Eigen::Vector3d v_I = R * v_bar;

  const Pose T_ItoC(cam.R_ItoC, -(cam.R_ItoC.inverse() * cam.p_IinC));
  const Eigen::Matrix<double, 6, 6> M_IC = plucker_transform_matrix(T_ItoC);

  Eigen::Matrix<double, 6, 1> L_I;
  L_I << n_I, v_I;
  const Eigen::Matrix<double, 6, 1> L_C = M_IC * L_I;
  const Eigen::Vector3d n_C = L_C.head<3>();
  if (n_C.norm() < kMinLineNormal) {
    return false;
  }

  Eigen::Vector3d l = line_projection_matrix(cam) * n_C;
  double sign = 1.0;
  if (l.x() < 0.0 || (l.x() == 0.0 && l.y() < 0.0)) {
    sign = -1.0;
    l = -l;
  }
  const double sn = std::hypot(l.x(), l.y());
  if (sn < 1e-12) {
    return false;
  }

  const Eigen::Vector3d ps_h(seg.ps.x(), seg.ps.y(), 1.0);
  const Eigen::Vector3d pe_h(seg.pe.x(), seg.pe.y(), 1.0);
  const double ds = ps_h.dot(l) / sn;
  const double de = pe_h.dot(l) / sn;

  Eigen::Matrix<double, 2, 3> J_dl;
  J_dl.row(0) << ps_h.x() / sn - ds * l.x() / (sn * sn),
      ps_h.y() / sn - ds * l.y() / (sn * sn), 1.0 / sn;
  J_dl.row(1) << pe_h.x() / sn - de * l.x() / (sn * sn),
      pe_h.y() / sn - de * l.y() / (sn * sn), 1.0 / sn;

  Eigen::Matrix<double, 3, 6> J_lLc = Eigen::Matrix<double, 3, 6>::Zero();
  J_lLc.leftCols<3>() = sign * line_projection_matrix(cam);

  const Eigen::Matrix<double, 2, 6> J_dLc = J_dl * J_lLc;

  // Clone pose: an attitude error rotates the whole line rigidly; a position
  // error enters only through the moment.
  Eigen::Matrix<double, 6, 6> J_LI_pose = Eigen::Matrix<double, 6, 6>::Zero();
  J_LI_pose.block<3, 3>(0, 0) = skew(n_I);
  J_LI_pose.block<3, 3>(0, 3) = skew(v_I) * R;
  J_LI_pose.block<3, 3>(3, 0) = skew(v_I);
  H_clone = J_dLc * M_IC * J_LI_pose;

  const Eigen::Matrix<double, 6, 6> T_GtoI6 = plucker_transform_matrix(clone.pose());
  const Eigen::Matrix<double, 2, 6> J_dLbar = J_dLc * M_IC * T_GtoI6;
  H_L6 = J_dLbar / s;

  // Orthonormal 4-dim tangent of the normalized line coordinates.
  const double w1 = n_bar.norm();
  const double w2 = v_bar.norm();
  Eigen::Vector3d u1;
  if (w1 > 1e-12) {
    u1 = n_bar / w1;
  } else {
    u1 = v_bar.unitOrthogonal();
  }
  const Eigen::Vector3d u2 = v_bar / w2;
  const Eigen::Vector3d u3 = u1.cross(u2);

  Eigen::Matrix<double, 6, 4> J_orth = Eigen::Matrix<double, 6, 4>::Zero();
  J_orth.block<3, 1>(3, 0) = w2 * u3;
  J_orth.block<3, 1>(0, 1) = -w1 * u3;
  J_orth.block<3, 1>(0, 2) = w1 * u2;
  J_orth.block<3, 1>(3, 2) = -w2 * u1;
  J_orth.block<3, 1>(0, 3) = -w2 * u1;
  J_orth.block<3, 1>(3, 3) = w1 * u2;

  H_L4 = J_dLbar * J_orth;
  return true;
}

std::vector<long> LineTrack::assigned_union() const {
  std::set<long> ids;
  for (const auto &ob : obs) {
    ids.insert(ob.assigned_ids.begin(), ob.assigned_ids.end());
  }
  return std::vector<long>(ids.begin(), ids.end());
}

LineUpdateSummary line_update(FilterState &state, std::vector<LineTrack *> &tracks,
                              const std::map<long, TriangulatedPoint> &registry,
                              const std::set<long> &dynamic_ids,
                              const CameraModel &cam, const LineUpdateConfig &cfg) {
  LineUpdateSummary summary;
  const int dim = state.dim();

  std::sort(tracks.begin(), tracks.end(),
            [](const LineTrack *a, const LineTrack *b) { return a->id < b->id; });

  std::vector<Eigen::MatrixXd> H_blocks;
  std::vector<Eigen::VectorXd> r_blocks;
  std::vector<LineTrack *> block_tracks;
  int total_rows = 0;

  for (LineTrack *track : tracks) {
    summary.processed++;

    std::vector<LineSegment2D> segs;
    std::vector<Pose> T_GtoCs;
    std::vector<int> clone_idx;
    for (const auto &ob : track->obs) {
      const int ci = state.clone_index(ob.t);
      if (ci < 0) {
        continue;
      }
      segs.push_back(ob.seg);
      T_GtoCs.push_back(cam.camera_pose(state.clones[ci].pose()));
      clone_idx.push_back(ci);
    }
    const int m = static_cast<int>(segs.size());
    if (m < cfg.min_obs) {
      track->status = LineTrackStatus::RejectedTriangulation;
      summary.too_few_obs++;
      continue;
    }

    const std::vector<long> assigned = track->assigned_union();
    if (!assigned.empty()) {
      const bool all_dynamic =
          std::all_of(assigned.begin(), assigned.end(),
                      [&](long id) { return dynamic_ids.count(id) > 0; });
      if (all_dynamic) {
        track->status = LineTrackStatus::RejectedDynamic;
        summary.dynamic_rejected++;
        continue;
      }
    }

    std::vector<Eigen::Vector3d> points;
    for (long id : assigned) {
      const auto it = registry.find(id);
      if (it != registry.end()) {
        points.push_back(it->second.p_G);
      }
    }

    const LineTriangulation tri = triangulate_line(
        segs, T_GtoCs, cam, points, track->axis, track->R_GtoI_at_class, cfg.tri);
    if (tri.plane_degenerate) {
      summary.plane_degenerate++;
    } else {
      summary.plane_ok++;
    }
    if (!points.empty()) {
      summary.with_point_attempts++;
    }
    if (tri.status != LineTriStatus::Ok) {
      track->status = LineTrackStatus::RejectedTriangulation;
      if (tri.status == LineTriStatus::ResidualTooLarge) {
        summary.residual_rejected++;
      } else {
        summary.no_method++;
      }
      continue;
    }
    if (!points.empty()) {
      summary.with_point_success++;
    }
    switch (tri.method) {
    case LineTriMethod::TwoPoints:
      summary.two_points++;
      break;
    case LineTriMethod::PointDirection:
      summary.point_direction++;
      break;
    default:
      break;
    }
    track->status = LineTrackStatus::Triangulated;
    track->method = tri.method;

    Eigen::MatrixXd H_x = Eigen::MatrixXd::Zero(2 * m, dim);
    Eigen::MatrixXd H_L = Eigen::MatrixXd::Zero(2 * m, 4);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(2 * m);
    int rows = 0;
    for (int i = 0; i < m; i++) {
      const Clone &clone = state.clones[clone_idx[i]];
      const auto d = line_measurement(tri.line, clone.pose(), cam, segs[i]);
      Eigen::Matrix<double, 2, 6> Hc, HL6;
      Eigen::Matrix<double, 2, 4> HL4;
      if (!d || !line_jacobians(tri.line, clone, cam, segs[i], Hc, HL6, HL4)) {
        continue;
      }
      H_x.block<2, 6>(rows, state.clone_offset(clone_idx[i])) = Hc;
      H_L.block<2, 4>(rows, 0) = HL4;
      r.segment<2>(rows) = -*d; // measured distances are zero by construction
      rows += 2;
    }
    if (rows <= 4) {
      track->status = LineTrackStatus::RejectedTriangulation;
      summary.too_few_obs++;
      continue;
    }
    H_x.conservativeResize(rows, Eigen::NoChange);
    H_L.conservativeResize(rows, Eigen::NoChange);
    r.conservativeResize(rows);

    Eigen::MatrixXd H_proj;
    Eigen::VectorXd r_proj;
    if (nullspace_project(H_x, H_L, r, H_proj, r_proj) != NullspaceStatus::Ok) {
      track->status = LineTrackStatus::RejectedTriangulation;
      summary.too_few_obs++;
      continue;
    }

    const Eigen::MatrixXd S =
        H_proj * state.P * H_proj.transpose() +
        cfg.line_std * cfg.line_std *
            Eigen::MatrixXd::Identity(H_proj.rows(), H_proj.rows());
    const double gamma = r_proj.dot(S.ldlt().solve(r_proj));
    if (gamma >
        cfg.chi2_multiplier * chi2_quantile_95(static_cast<int>(r_proj.rows()))) {
      track->gate_rejected = true;
      summary.gate_rejected++;
      continue;
    }

    if (static_cast<int>(block_tracks.size()) >= cfg.max_lines) {
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
  sr.sigma = cfg.line_std;
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
    for (LineTrack *track : block_tracks) {
      track->status = LineTrackStatus::Used;
      summary.used++;
    }
  }
  return summary;
}

} // namespace viwo

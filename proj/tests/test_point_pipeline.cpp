#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "test_util.hpp"
#include "viwo/point_pipeline.hpp"

using namespace viwo;
namespace tu = viwo::testutil;

namespace {

CameraModel test_camera() {
  CameraModel cam;
  cam.fx = 460.0;
  cam.fy = 455.0;
  cam.cx = 320.0;
  cam.cy = 240.0;
  cam.width = 640;
  cam.height = 480;
  return cam; // camera frame == IMU frame, looking down global +z
}

Eigen::Vector2d pixel_of(const CameraModel &cam, const Pose &T_GtoI,
                         const Eigen::Vector3d &p_G) {
  const auto uv = project_point(cam.camera_pose(T_GtoI).transform(p_G), cam);
  REQUIRE(uv.has_value());
  return *uv;
}

/// Filter with clones sweeping along +x at 10 Hz, camera staring down +z.
FilterState sweep_state(int n_clones, double spacing = 0.1) {
  FilterState s;
  s.time = 0.1 * (n_clones - 1);
  for (int i = 0; i < n_clones; i++) {
    Clone c;
    c.t = 0.1 * i;
    c.p_IinG = Eigen::Vector3d(spacing * i, 0.0, 0.0);
    s.clones.push_back(c);
  }
  s.imu.p_IinG = s.clones.back().p_IinG;
  s.P = 1e-4 * Eigen::MatrixXd::Identity(s.dim(), s.dim());
  return s;
}

/// Track of a (possibly moving) world point observed by every clone.
PointTrack make_track(long id, const FilterState &s, const CameraModel &cam,
                      const Eigen::Vector3d &p0, const Eigen::Vector3d &vel) {
  PointTrack t;
  t.id = id;
  for (const auto &c : s.clones) {
    PointObservation ob;
    ob.t = c.t;
    ob.uv = pixel_of(cam, c.pose(), p0 + c.t * vel);
    t.obs.push_back(ob);
  }
  return t;
}

Clone clone_inject(const Clone &c, const Eigen::VectorXd &dx) {
  Clone out = c;
  out.R_GtoI = Rotation::exp(-dx.segment<3>(0)) * c.R_GtoI;
  out.p_IinG = c.p_IinG + dx.segment<3>(3);
  return out;
}

} // namespace

TEST_CASE("triangulation recovers noise-free points exactly") {
  auto rng = tu::rng_for(41);
  const CameraModel cam = test_camera();
  const PointTriangulationConfig cfg;
  for (int it = 0; it < 50; it++) {
    const Eigen::Vector3d p_G(tu::uniform(rng, -3.0, 3.0),
                              tu::uniform(rng, -2.0, 2.0),
                              tu::uniform(rng, 6.0, 15.0));
    std::vector<Eigen::Vector2d> uvs;
    std::vector<Pose> T_GtoCs;
    for (int i = 0; i < 8; i++) {
      Pose T_GtoI;
      T_GtoI.trans = Eigen::Vector3d(0.15 * i, tu::uniform(rng, -0.05, 0.05), 0.0);
      const Pose T_GtoC = cam.camera_pose(T_GtoI);
      uvs.push_back(*project_point(T_GtoC.transform(p_G), cam));
      T_GtoCs.push_back(T_GtoC);
    }
    TriangulatedPoint tp;
    REQUIRE(triangulate_point(uvs, T_GtoCs, cam, cfg, tp) == PointTriStatus::Ok);
    CHECK((tp.p_G - p_G).norm() < 1e-6);
    CHECK(tp.mean_reproj < 1e-8);
    CHECK(tp.condition < cfg.max_condition);
  }
}

TEST_CASE("triangulation failure modes") {
  const CameraModel cam = test_camera();
  PointTriangulationConfig cfg;
  const Eigen::Vector3d p_G(0.5, 0.2, 10.0);

  SUBCASE("no baseline between the views") {
    std::vector<Eigen::Vector2d> uvs;
    std::vector<Pose> T_GtoCs;
    for (int i = 0; i < 4; i++) {
      Pose T; // all four views from the same spot
      uvs.push_back(pixel_of(cam, T, p_G));
      T_GtoCs.push_back(cam.camera_pose(T));
    }
    TriangulatedPoint tp;
    CHECK(triangulate_point(uvs, T_GtoCs, cam, cfg, tp) ==
          PointTriStatus::InsufficientBaseline);
  }

  SUBCASE("fewer than two views") {
    std::vector<Eigen::Vector2d> uvs = {Eigen::Vector2d(320, 240)};
    std::vector<Pose> T_GtoCs = {Pose()};
    TriangulatedPoint tp;
    CHECK(triangulate_point(uvs, T_GtoCs, cam, cfg, tp) ==
          PointTriStatus::InsufficientBaseline);
  }

  SUBCASE("motion along the line of sight") {
    // Bearings to an on-axis point never change: rank-deficient system.
    const Eigen::Vector3d p(0.0, 0.0, 30.0);
    std::vector<Eigen::Vector2d> uvs;
    std::vector<Pose> T_GtoCs;
    for (int i = 0; i < 5; i++) {
      Pose T;
      T.trans = Eigen::Vector3d(0.0, 0.0, 0.4 * i);
      uvs.push_back(pixel_of(cam, T, p));
      T_GtoCs.push_back(cam.camera_pose(T));
    }
    TriangulatedPoint tp;
    CHECK(triangulate_point(uvs, T_GtoCs, cam, cfg, tp) ==
          PointTriStatus::IllConditioned);
  }

  SUBCASE("solution farther than the distance cap") {
    cfg.max_distance = 5.0;
    std::vector<Eigen::Vector2d> uvs;
    std::vector<Pose> T_GtoCs;
    for (int i = 0; i < 4; i++) {
      Pose T;
      T.trans = Eigen::Vector3d(0.3 * i, 0.0, 0.0);
      uvs.push_back(pixel_of(cam, T, p_G)); // 10 m away > 5 m cap
      T_GtoCs.push_back(cam.camera_pose(T));
    }
    TriangulatedPoint tp;
    CHECK(triangulate_point(uvs, T_GtoCs, cam, cfg, tp) ==
          PointTriStatus::IllConditioned);
  }

  SUBCASE("point behind the cameras") {
    // Pixels consistent with a point at z = -5: the linear stage lands on it
    // and the depth check fires.
    const Eigen::Vector3d pb(0.1, 0.0, -5.0);
    std::vector<Eigen::Vector2d> uvs;
    std::vector<Pose> T_GtoCs;
    for (int i = 0; i < 2; i++) {
      Pose T;
      T.trans = Eigen::Vector3d(0.0, 0.0, 0.5 * i);
      const Eigen::Vector3d d = pb - T.trans; // negative depth direction
      uvs.push_back(Eigen::Vector2d(cam.fx * d.x() / d.z() + cam.cx,
                                    cam.fy * d.y() / d.z() + cam.cy));
      T_GtoCs.push_back(cam.camera_pose(T));
    }
    TriangulatedPoint tp;
    CHECK(triangulate_point(uvs, T_GtoCs, cam, cfg, tp) ==
          PointTriStatus::BehindCamera);
  }
}

TEST_CASE("motion consistency residual separates moving points from static ones") {
  const CameraModel cam = test_camera();
  const FilterState s = sweep_state(11);
  const PointTriangulationConfig tri;

  auto residual_for = [&](const Eigen::Vector3d &vel) {
    const Eigen::Vector3d p0(0.5, 0.3, 10.0);
    std::vector<Eigen::Vector2d> uvs;
    std::vector<Pose> T_GtoCs;
    for (const auto &c : s.clones) {
      T_GtoCs.push_back(cam.camera_pose(c.pose()));
      uvs.push_back(pixel_of(cam, c.pose(), p0 + c.t * vel));
    }
    TriangulatedPoint tp;
    REQUIRE(triangulate_point(uvs, T_GtoCs, cam, tri, tp) == PointTriStatus::Ok);
    return motion_consistency_residual(tp.p_G, uvs, T_GtoCs, cam);
  };

  // Static point: the fit explains every pixel.
  CHECK(residual_for(Eigen::Vector3d::Zero()) < 1e-8);

  // The cameras sweep along +x, so cross-track motion is the observable part:
  // the residual grows monotonically with speed there.
  for (const Eigen::Vector3d &d : {Eigen::Vector3d(0, 1, 0), Eigen::Vector3d(0, -1, 0)}) {
    double prev = 0.0;
    for (double speed = 0.1; speed <= 1.01; speed += 0.1) {
      const double res = residual_for(speed * d);
      CHECK(res >= prev - 1e-9);
      prev = res;
    }
  }

  // Any direction with a solid cross-track component clears the usual gate.
  const Eigen::Vector3d dirs[] = {
      {0, 1, 0}, {0, -1, 0}, {0.6, 0.8, 0.0}, {-0.6, 0.8, 0.0}, {0.6, -0.8, 0.0}};
  for (const auto &d : dirs) {
    CHECK(residual_for(0.8 * d.normalized()) > 3.0);
  }

  // Blind spot: motion parallel to the camera's own translation aliases to a
  // static point at rescaled depth, so the residual stays near zero.
  CHECK(residual_for(Eigen::Vector3d(0.5, 0.0, 0.0)) < 1e-2);

  // At exactly the camera velocity the bearings freeze and triangulation
  // fails outright instead.
  {
    const Eigen::Vector3d p0(0.5, 0.3, 10.0);
    std::vector<Eigen::Vector2d> uvs;
    std::vector<Pose> T_GtoCs;
    for (const auto &c : s.clones) {
      T_GtoCs.push_back(cam.camera_pose(c.pose()));
      uvs.push_back(pixel_of(cam, c.pose(), p0 + c.t * Eigen::Vector3d(1, 0, 0)));
    }
    TriangulatedPoint tp;
    CHECK(triangulate_point(uvs, T_GtoCs, cam, tri, tp) != PointTriStatus::Ok);
  }

  // Second blind spot: motion along the line of sight barely moves the
  // pixels, so it reads far smaller than the same speed across the track.
  const double radial = residual_for(Eigen::Vector3d(0.0, 0.0, 0.8));
  const double lateral = residual_for(Eigen::Vector3d(0.0, 0.8, 0.0));
  CHECK(radial < lateral / 5.0);
}

TEST_CASE("point measurement Jacobians match finite differences") {
  auto rng = tu::rng_for(42);
  const CameraModel cam = test_camera();
  for (int it = 0; it < 50; it++) {
    Clone c;
    c.t = 0.0;
    c.R_GtoI = tu::random_rotation(rng, 0.4);
    c.p_IinG = tu::random_vec(rng, 1.0);
    const Eigen::Vector3d p_G =
        c.pose().inverse().transform(Eigen::Vector3d(tu::uniform(rng, -2.0, 2.0),
                                                     tu::uniform(rng, -2.0, 2.0),
                                                     tu::uniform(rng, 5.0, 15.0)));

    Eigen::Matrix<double, 2, 6> H_clone;
    Eigen::Matrix<double, 2, 3> H_f;
    point_measurement_jacobians(c, cam, p_G, H_clone, H_f);

    auto h_clone = [&](const Eigen::VectorXd &dx) {
      const Clone cp = clone_inject(c, dx);
      return Eigen::VectorXd(pixel_of(cam, cp.pose(), p_G));
    };
    const Eigen::MatrixXd Hc_fd =
        tu::numeric_jacobian(h_clone, Eigen::VectorXd::Zero(6), 1e-6);
    CHECK(tu::rel_err(Eigen::MatrixXd(H_clone), Hc_fd) < 1e-4);

    auto h_point = [&](const Eigen::VectorXd &dp) {
      return Eigen::VectorXd(
          pixel_of(cam, c.pose(), p_G + Eigen::Vector3d(dp)));
    };
    const Eigen::MatrixXd Hf_fd =
        tu::numeric_jacobian(h_point, Eigen::VectorXd::Zero(3), 1e-6);
    CHECK(tu::rel_err(Eigen::MatrixXd(H_f), Hf_fd) < 1e-4);
  }
}

TEST_CASE("point update uses static tracks and flags moving ones") {
  const CameraModel cam = test_camera();
  FilterState s = sweep_state(11);
  PointUpdateConfig cfg;

  PointTrack a = make_track(1, s, cam, {0.5, 0.3, 10.0}, Eigen::Vector3d::Zero());
  PointTrack b = make_track(2, s, cam, {-1.0, 0.8, 8.0}, Eigen::Vector3d::Zero());
  PointTrack dyn = make_track(3, s, cam, {1.0, -0.5, 9.0}, {0.0, 0.6, 0.0});
  PointTrack stub;
  stub.id = 4;
  stub.obs.push_back({s.clones[0].t, Eigen::Vector2d(100, 100)});

  std::vector<PointTrack *> tracks = {&dyn, &b, &stub, &a};
  std::map<long, TriangulatedPoint> registry;
  const double tr0 = s.P.trace();
  const PointUpdateSummary sum = point_update(s, tracks, cam, cfg, registry);

  CHECK(sum.processed == 4);
  CHECK(sum.used == 2);
  CHECK(sum.mcc_dynamic == 1);
  CHECK(sum.too_few_obs == 1);
  CHECK(sum.update == UpdateStatus::Applied);
  REQUIRE(sum.dynamic_ids.size() == 1);
  CHECK(sum.dynamic_ids[0] == 3);

  CHECK(a.status == PointTrackStatus::Used);
  CHECK(b.status == PointTrackStatus::Used);
  CHECK(dyn.status == PointTrackStatus::RejectedMCC);
  CHECK(stub.status == PointTrackStatus::RejectedTriangulation);
  CHECK(dyn.mcc_residual > cfg.mcc_threshold);
  CHECK(a.mcc_residual >= 0.0);
  CHECK(stub.mcc_residual == -1.0);

  CHECK(s.P.trace() < tr0);
  CHECK(s.min_covariance_eigenvalue() > -1e-12);

  REQUIRE(registry.count(1) == 1);
  CHECK((registry[1].p_G - Eigen::Vector3d(0.5, 0.3, 10.0)).norm() < 1e-6);
  CHECK(registry.count(3) == 0); // moving point never enters the map
}

TEST_CASE("rejected tracks leave the update bit-identical") {
  const CameraModel cam = test_camera();
  PointUpdateConfig cfg;

  FilterState s1 = sweep_state(11);
  FilterState s2 = sweep_state(11);
  PointTrack a1 = make_track(1, s1, cam, {0.5, 0.3, 10.0}, Eigen::Vector3d::Zero());
  PointTrack b1 = make_track(2, s1, cam, {-1.0, 0.8, 8.0}, Eigen::Vector3d::Zero());
  PointTrack dyn = make_track(3, s1, cam, {1.0, -0.5, 9.0}, {0.0, 0.7, 0.0});
  PointTrack a2 = a1, b2 = b1;

  std::vector<PointTrack *> with_dyn = {&a1, &b1, &dyn};
  std::vector<PointTrack *> without = {&a2, &b2};
  std::map<long, TriangulatedPoint> reg1, reg2;
  point_update(s1, with_dyn, cam, cfg, reg1);
  point_update(s2, without, cam, cfg, reg2);

  CHECK(s1.P == s2.P);
  CHECK(s1.imu.p_IinG == s2.imu.p_IinG);
  for (size_t i = 0; i < s1.clones.size(); i++) {
    CHECK(s1.clones[i].p_IinG == s2.clones[i].p_IinG);
  }
}

TEST_CASE("point update is order-invariant") {
  const CameraModel cam = test_camera();
  PointUpdateConfig cfg;
  FilterState s1 = sweep_state(11);
  FilterState s2 = sweep_state(11);

  auto build = [&](const FilterState &s) {
    std::vector<PointTrack> ts;
    ts.push_back(make_track(7, s, cam, {0.5, 0.3, 10.0}, Eigen::Vector3d::Zero()));
    ts.push_back(make_track(3, s, cam, {-1.0, 0.8, 8.0}, Eigen::Vector3d::Zero()));
    ts.push_back(make_track(5, s, cam, {1.5, -0.6, 12.0}, Eigen::Vector3d::Zero()));
    return ts;
  };
  auto t1 = build(s1);
  auto t2 = build(s2);
  std::vector<PointTrack *> fwd = {&t1[0], &t1[1], &t1[2]};
  std::vector<PointTrack *> rev = {&t2[2], &t2[0], &t2[1]};
  std::map<long, TriangulatedPoint> reg1, reg2;
  point_update(s1, fwd, cam, cfg, reg1);
  point_update(s2, rev, cam, cfg, reg2);
  CHECK(s1.P == s2.P);
  CHECK(s1.imu.p_IinG == s2.imu.p_IinG);
}

TEST_CASE("feature cap of zero turns the visual update off") {
  const CameraModel cam = test_camera();
  PointUpdateConfig cfg;
  cfg.max_features = 0;
  FilterState s = sweep_state(11);
  const Eigen::MatrixXd P0 = s.P;
  PointTrack a = make_track(1, s, cam, {0.5, 0.3, 10.0}, Eigen::Vector3d::Zero());
  std::vector<PointTrack *> tracks = {&a};
  std::map<long, TriangulatedPoint> reg;
  const PointUpdateSummary sum = point_update(s, tracks, cam, cfg, reg);
  CHECK(sum.processed == 1);
  CHECK(sum.used == 0);
  CHECK(s.P == P0);
}

TEST_CASE("consistency check can be switched off") {
  const CameraModel cam = test_camera();
  FilterState s = sweep_state(11);
  PointUpdateConfig cfg;
  cfg.use_mcc = false;
  cfg.chi2_multiplier = 1e6; // keep the gate out of the way
  PointTrack dyn = make_track(3, s, cam, {1.0, -0.5, 9.0}, {0.0, 0.6, 0.0});
  std::vector<PointTrack *> tracks = {&dyn};
  std::map<long, TriangulatedPoint> reg;
  const PointUpdateSummary sum = point_update(s, tracks, cam, cfg, reg);
  CHECK(sum.mcc_dynamic == 0);
  CHECK(dyn.status == PointTrackStatus::Used); // contaminates the filter
  CHECK(dyn.mcc_residual > 3.0);               // ...but the residual is recorded
}

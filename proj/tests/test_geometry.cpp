#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "test_util.hpp"
#include "viwo/geometry.hpp"

using namespace viwo;
namespace tu = viwo::testutil;

TEST_CASE("skew matches the cross product") {
  auto rng = tu::rng_for(11);
  for (int i = 0; i < 20; i++) {
    const Eigen::Vector3d a = tu::random_vec(rng, 5.0);
    const Eigen::Vector3d b = tu::random_vec(rng, 5.0);
    CHECK((skew(a) * b - a.cross(b)).norm() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK((skew(a) + skew(a).transpose()).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("exp and log of SO(3) are mutual inverses") {
  auto rng = tu::rng_for(12);
  for (int i = 0; i < 50; i++) {
    const Eigen::Vector3d w = tu::uniform(rng, 0.0, 3.0) * tu::random_unit(rng);
    const Eigen::Matrix3d R = exp_so3(w);
    CHECK((R * R.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-12);
    CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((log_so3(R) - w).norm() < 1e-9);
  }
  // small-angle and zero cases
  CHECK((exp_so3(Eigen::Vector3d::Zero()) - Eigen::Matrix3d::Identity()).norm() ==
        doctest::Approx(0.0));
  const Eigen::Vector3d tiny(1e-12, -2e-12, 5e-13);
  CHECK((log_so3(exp_so3(tiny)) - tiny).norm() < 1e-15);
}

TEST_CASE("right Jacobian matches finite differences of exp") {
  auto rng = tu::rng_for(13);
  for (int i = 0; i < 20; i++) {
    const Eigen::Vector3d w = tu::uniform(rng, 0.01, 2.5) * tu::random_unit(rng);
    const Eigen::Matrix3d Jr = right_jacobian_so3(w);
    // exp(w + dw) ~= exp(w) * exp(Jr * dw)
    for (int k = 0; k < 3; k++) {
      const double eps = 1e-6;
      Eigen::Vector3d dw = Eigen::Vector3d::Zero();
      dw(k) = eps;
      const Eigen::Matrix3d lhs = exp_so3(w + dw);
      const Eigen::Matrix3d rhs = exp_so3(w) * exp_so3(Jr * dw);
      CHECK((lhs - rhs).norm() < 1e-10);
    }
  }
}

TEST_CASE("rotation composition and inverse") {
  auto rng = tu::rng_for(14);
  for (int i = 0; i < 20; i++) {
    const Rotation A = tu::random_rotation(rng);
    const Rotation B = tu::random_rotation(rng);
    const Eigen::Vector3d p = tu::random_vec(rng, 3.0);
    CHECK(((A * B) * p - A * (B * p)).norm() < 1e-12);
    CHECK((A.inverse() * (A * p) - p).norm() < 1e-12);
    CHECK((Rotation::exp(A.log()).matrix() - A.matrix()).norm() < 1e-9);
  }
}

TEST_CASE("pose transform, inverse, and composition") {
  auto rng = tu::rng_for(15);
  for (int i = 0; i < 20; i++) {
    const Pose T_AtoB = tu::random_pose(rng);
    const Pose T_BtoC = tu::random_pose(rng);
    const Eigen::Vector3d p_A = tu::random_vec(rng, 4.0);

    const Eigen::Vector3d p_B = T_AtoB.transform(p_A);
    CHECK((T_AtoB.inverse().transform(p_B) - p_A).norm() < 1e-12);

    const Pose T_AtoC = T_BtoC * T_AtoB;
    CHECK((T_AtoC.transform(p_A) - T_BtoC.transform(p_B)).norm() < 1e-12);

    const Pose I = T_AtoB.inverse() * T_AtoB;
    CHECK((I.transform(p_A) - p_A).norm() < 1e-12);
  }
}

TEST_CASE("pinhole projection and its Jacobian") {
  CameraModel cam;
  cam.fx = 460.0;
  cam.fy = 455.0;
  cam.cx = 320.0;
  cam.cy = 240.0;
  cam.width = 640;
  cam.height = 480;

  const Eigen::Vector3d p_C(0.3, -0.2, 4.0);
  const auto uv = project_point(p_C, cam);
  REQUIRE(uv.has_value());
  CHECK(uv->x() == doctest::Approx(320.0 + 460.0 * 0.3 / 4.0));
  CHECK(uv->y() == doctest::Approx(240.0 + 455.0 * -0.2 / 4.0));

  CHECK_FALSE(project_point(Eigen::Vector3d(0.1, 0.1, 0.0), cam).has_value());
  CHECK_FALSE(project_point(Eigen::Vector3d(0.1, 0.1, -2.0), cam).has_value());

  auto rng = tu::rng_for(16);
  for (int i = 0; i < 30; i++) {
    const Eigen::Vector3d p(tu::uniform(rng, -2.0, 2.0), tu::uniform(rng, -2.0, 2.0),
                            tu::uniform(rng, 0.5, 10.0));
    const Eigen::Matrix<double, 2, 3> J = project_point_jacobian(p, cam);
    auto f = [&](const Eigen::VectorXd &x) -> Eigen::VectorXd {
      return *project_point(Eigen::Vector3d(x), cam);
    };
    const Eigen::MatrixXd Jn = tu::numeric_jacobian(f, p, 1e-7);
    CHECK(tu::rel_err(J, Jn) < 1e-6);
  }
}

TEST_CASE("Plucker transform matrix agrees with point-wise line transport") {
  auto rng = tu::rng_for(17);
  for (int i = 0; i < 30; i++) {
    // Build a line from two random points in frame A.
    const Eigen::Vector3d a = tu::random_vec(rng, 5.0);
    const Eigen::Vector3d b = a + 3.0 * tu::random_unit(rng);
    PluckerLine L_A;
    L_A.v = (b - a).normalized();
    L_A.n = a.cross(L_A.v);
    CHECK(L_A.constraint_error() < 1e-12);

    const Pose T = tu::random_pose(rng);
    const PluckerLine L_B = transform_plucker(T, L_A);
    CHECK(L_B.constraint_error() < 1e-10);

    // The transformed line must contain the transformed points.
    for (const Eigen::Vector3d &p : {a, b}) {
      const Eigen::Vector3d p_B = T.transform(p);
      CHECK((p_B.cross(L_B.v) - L_B.n).norm() < 1e-9);
    }

    // Matrix form acts identically.
    Eigen::Matrix<double, 6, 1> L6;
    L6 << L_A.n, L_A.v;
    const Eigen::Matrix<double, 6, 1> M6 = plucker_transform_matrix(T) * L6;
    CHECK((M6.head<3>() - L_B.n).norm() < 1e-10);
    CHECK((M6.tail<3>() - L_B.v).norm() < 1e-10);
  }
}

TEST_CASE("Plucker transform composes") {
  auto rng = tu::rng_for(18);
  for (int i = 0; i < 20; i++) {
    const Pose T1 = tu::random_pose(rng); // A -> B
    const Pose T2 = tu::random_pose(rng); // B -> C
    const Pose T21 = T2 * T1;             // A -> C
    const Eigen::Matrix<double, 6, 6> M =
        plucker_transform_matrix(T2) * plucker_transform_matrix(T1);
    CHECK((M - plucker_transform_matrix(T21)).norm() < 1e-9);
  }
}

TEST_CASE("line projection puts the image of on-line points on the 2D line") {
  CameraModel cam;
  cam.fx = 400.0;
  cam.fy = 400.0;
  cam.cx = 320.0;
  cam.cy = 240.0;
  cam.width = 640;
  cam.height = 480;

  auto rng = tu::rng_for(19);
  int checked = 0;
  for (int i = 0; i < 50; i++) {
    const Eigen::Vector3d a(tu::uniform(rng, -2.0, 2.0), tu::uniform(rng, -2.0, 2.0),
                            tu::uniform(rng, 2.0, 8.0));
    const Eigen::Vector3d dir = tu::random_unit(rng);
    const Eigen::Vector3d b = a + 2.0 * dir;
    if (b.z() < 0.5) {
      continue;
    }
    PluckerLine L_C;
    L_C.v = dir;
    L_C.n = a.cross(dir);
    const auto l = project_line(L_C, cam);
    if (!l.has_value()) {
      continue;
    }
    for (double s : {0.0, 0.35, 1.0}) {
      const Eigen::Vector3d p = a + s * 2.0 * dir;
      if (p.z() < 1e-3) {
        continue;
      }
      const auto uv = project_point(p, cam);
      REQUIRE(uv.has_value());
      const Eigen::Vector3d h(uv->x(), uv->y(), 1.0);
      const double d = h.dot(l->l) / std::hypot(l->l.x(), l->l.y());
      CHECK(std::abs(d) < 1e-8);
      checked++;
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("closest point of a Plucker line") {
  PluckerLine L;
  L.v = Eigen::Vector3d::UnitX();
  L.n = Eigen::Vector3d(0, 0, 2).cross(L.v); // line through (0,0,2) along x
  const Eigen::Vector3d c = L.closest_point();
  CHECK((c - Eigen::Vector3d(0, 0, 2)).norm() < 1e-12);
}

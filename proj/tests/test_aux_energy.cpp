#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "ropejump/aux_controllers.hpp"
#include "ropejump/energy.hpp"
#include "ropejump/errors.hpp"
#include "ropejump/fwp.hpp"

using namespace ropejump;

namespace {
Mat3 rot_z(double a) { return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(); }
}  // namespace

TEST_CASE("yaw extraction from Z-Y-X rotations") {
  for (double yaw : {-3.0, -1.0, 0.0, 0.4, 2.5, std::numbers::pi}) {
    const Mat3 R = rot_z(yaw) * Eigen::AngleAxisd(0.3, Vec3::UnitY()).toRotationMatrix() *
                   Eigen::AngleAxisd(-0.2, Vec3::UnitX()).toRotationMatrix();
    CHECK(yaw_from_rotation(R) == doctest::Approx(yaw));
  }
  CHECK(yaw_from_rotation(rot_z(-std::numbers::pi)) == doctest::Approx(std::numbers::pi));
}

TEST_CASE("rigid body pose rejects non-rotations") {
  CHECK_NOTHROW(RigidBodyPose(rot_z(0.3)));
  Mat3 reflect = Mat3::Identity();
  reflect(0, 0) = -1.0;
  CHECK_THROWS_AS(RigidBodyPose{reflect}, DomainError);
  CHECK_THROWS_AS(RigidBodyPose{2.0 * Mat3::Identity()}, DomainError);
}

TEST_CASE("reorientation shifts both legs by the yaw error") {
  const LegSetpoints s = reorientation_setpoints(0.1, -0.1, 0.5, 0.2);
  CHECK(s.left == doctest::Approx(0.4));
  CHECK(s.right == doctest::Approx(0.2));
  CHECK_FALSE(s.out_of_range);
  CHECK(reorientation_setpoints(0.0, 0.0, 1.0, 0.0).out_of_range);
}

TEST_CASE("hip alignment points the leg along the force") {
  const auto [roll, pitch] = hip_alignment(Vec3(1.0, 0.0, 0.0));
  CHECK(roll == doctest::Approx(0.0));
  CHECK(pitch == doctest::Approx(-std::numbers::pi));
  const auto [r2, p2] = hip_alignment(Vec3(1.0, 1.0, 1.0));
  CHECK(r2 == doctest::Approx(std::numbers::pi / 4));
  CHECK(p2 == doctest::Approx(-std::numbers::pi + std::numbers::pi / 4));
  CHECK_THROWS_AS(hip_alignment(Vec3::Zero()), DomainError);
}

TEST_CASE("landing impedance torque is affine with the stated gains") {
  CHECK(landing_torque(0.0, 0.0, 0.1, 60.0, 10.0) == doctest::Approx(6.0));
  // Superposition in (q, q_dot).
  const double a = landing_torque(0.2, 0.5, 0.1, 60.0, 10.0);
  const double b = landing_torque(0.0, 0.0, 0.1, 60.0, 10.0) + landing_torque(0.2, 0.0, 0.0, 60.0, 10.0) +
                   landing_torque(0.0, 0.5, 0.0, 60.0, 10.0);
  CHECK(a == doctest::Approx(b));
}

TEST_CASE("critical damping gives a double real pole") {
  const double K = 60.0, m = 15.0;
  const double D = critically_damped_gain(K, m);
  CHECK(D * D - 4.0 * K * m == doctest::Approx(0.0));
  CHECK_THROWS_AS(critically_damped_gain(0.0, m), DomainError);
}

TEST_CASE("contact force maps to leg torques through J^T") {
  Mat3 J;
  J << 1, 2, 0, 0, 1, 0, 0, 0, 3;
  const Vec3 h(1, 1, 1), f(1, -1, 2);
  CHECK((force_to_leg_torques(J, h, f) - (h - J.transpose() * f)).norm() == 0.0);
  CHECK((force_to_leg_torques(J, h, Vec3::Zero()) - h).norm() == 0.0);
}

TEST_CASE("lateral Jacobian rope rows match finite-difference rope-length rates") {
  Scenario sc;
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  const Vec3 anchors[2] = {sc.anchor_left, sc.anchor_right};
  for (int t = 0; t < 50; ++t) {
    const Vec3 p(1.5 + 0.2 * g(rng), 2.5 + g(rng), -6.0 + g(rng));
    const Mat3 R = Eigen::AngleAxisd(0.3 * g(rng), Vec3(g(rng), g(rng), g(rng)).normalized()).toRotationMatrix();
    const RigidBodyPose pose(R);
    const ContactSet c = contact_geometry(p, sc);
    const Vec3 hl = R * c.hoist_left, hr = R * c.hoist_right;
    const Vec3 al = (p + hl - anchors[0]).normalized(), ar = (p + hr - anchors[1]).normalized();
    const Mat46 J = lateral_jacobian(pose, R * c.wheel_left, R * c.wheel_right, hl, hr, al, ar);
    Vec3 v(g(rng), g(rng), g(rng)), w(g(rng), g(rng), g(rng));
    Eigen::Matrix<double, 6, 1> twist;
    twist << v, w;
    const Vec4 rates = J * twist;
    const double h = 1e-6;
    auto lengths = [&](double s) {
      const Mat3 Rs = Eigen::AngleAxisd(s * w.norm(), w.normalized()).toRotationMatrix() * R;
      const Vec3 ps = p + s * v;
      return Eigen::Vector2d((ps + Rs * c.hoist_left - anchors[0]).norm(), (ps + Rs * c.hoist_right - anchors[1]).norm());
    };
    const Eigen::Vector2d fd = (lengths(h) - lengths(-h)) / (2 * h);
    CHECK(std::abs(rates[2] - fd[0]) <= 1e-4 * std::max(1.0, std::abs(fd[0])));
    CHECK(std::abs(rates[3] - fd[1]) <= 1e-4 * std::max(1.0, std::abs(fd[1])));
  }
}

TEST_CASE("lateral wheel rows give the wheel-centre speed along the base Y axis") {
  const RigidBodyPose pose(rot_z(0.0));
  const Vec3 wl(-0.4, -0.4, 0.0), wr(-0.4, 0.4, 0.0);
  const Mat46 J = lateral_jacobian(pose, wl, wr, Vec3(0, -0.15, 0), Vec3(0, 0.15, 0), Vec3::UnitX(), Vec3::UnitX());
  // Pure yaw rate: each wheel moves with omega x r.
  const Vec3 omega(0, 0, 1.0);
  const LateralSetpoints s = lateral_setpoints(Vec3::Zero(), omega, J, 0.1);
  CHECK(s.wheel_left == doctest::Approx(omega.cross(wl).y() / 0.1));
  CHECK(s.wheel_right == doctest::Approx(omega.cross(wr).y() / 0.1));
  const LateralSetpoints t = lateral_setpoints(Vec3(0, -0.7, 0), Vec3::Zero(), J, 0.1);
  CHECK(t.wheel_left == doctest::Approx(-7.0));
  CHECK(t.rope_left == doctest::Approx(0.0));
  CHECK_THROWS_AS(lateral_setpoints(Vec3::Zero(), omega, J, 0.0), DomainError);
}

TEST_CASE("skew matrix reproduces the cross product") {
  const Vec3 a(1, -2, 3), b(0.5, 4, -1);
  CHECK((skew(a) * b - a.cross(b)).norm() <= 1e-15);
}

TEST_CASE("hoist work: trapezoidal rule on piecewise linear power") {
  // |f l_dot| = 10 t on [0, 1] for the left rope, right rope idle: integral 5 J.
  std::vector<double> t, fl, l1d, fr, l2d;
  for (int i = 0; i <= 10; ++i) {
    t.push_back(0.1 * i);
    fl.push_back(-10.0);
    l1d.push_back(-0.1 * i);
    fr.push_back(-50.0);
    l2d.push_back(0.0);
  }
  CHECK(hoist_work(t, fl, l1d, fr, l2d) == doctest::Approx(5.0));
  std::vector<double> shorter(3, 0.0);
  CHECK_THROWS_AS(hoist_work(t, shorter, l1d, fr, l2d), DomainError);
}

TEST_CASE("jump energy needs a lift-off event") {
  Scenario sc;
  SimTrace tr;
  CHECK_THROWS_AS(jump_energy(tr, sc), DomainError);
}

#include <cmath>
#include <random>

#include "doctest.h"
#include "ropejump/errors.hpp"
#include "ropejump/reduced_model.hpp"
#include "support.hpp"

using namespace ropejump;
using rjtest::random_state;
using rjtest::with_coords;

TEST_CASE("forward kinematics honours both rope lengths") {
  Scenario sc;
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const ReducedState q = random_state(rng, sc);
    const Vec3 p = forward_kinematics(q, sc);
    CHECK((p - sc.anchor_left).norm() == doctest::Approx(q.l1).epsilon(1e-12));
    CHECK((p - sc.anchor_right).norm() == doctest::Approx(q.l2).epsilon(1e-12));
    // psi is the angle of the ropes plane from the downward vertical.
    CHECK(std::atan2(p.x(), -p.z()) == doctest::Approx(q.psi).epsilon(1e-12));
  }
}

TEST_CASE("FK/IK round trip within 1e-9 m") {
  Scenario sc;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> x(0.01, 3.0), y(-1.0, 6.0), z(-12.0, -0.5);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p(x(rng), y(rng), z(rng));
    worst = std::max(worst, (forward_kinematics(inverse_kinematics(p, sc), sc) - p).norm());
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("inconsistent rope lengths and points on the anchor line are rejected") {
  Scenario sc;
  ReducedState q;
  q.psi = 0.5;
  q.l1 = 1.0;
  q.l2 = 7.0;  // |l1 - l2| > d_a = 5
  CHECK_THROWS_AS(forward_kinematics(q, sc), DomainError);
  CHECK_THROWS_AS(inverse_kinematics(Vec3(0.0, 2.0, 0.0), sc), DomainError);
  q.l1 = -1.0;
  CHECK_THROWS_AS(forward_kinematics(q, sc), DomainError);
}

TEST_CASE("A_d matches finite differences of FK on 1000 random states") {
  Scenario sc;
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const ReducedState q = random_state(rng, sc);
    const Mat3 A = mass_matrix_terms(q, sc).A;
    Mat3 fd;
    for (int j = 0; j < 3; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(q.coords()[j]));
      Vec3 cp = q.coords(), cm = q.coords();
      cp[j] += h;
      cm[j] -= h;
      fd.col(j) = (forward_kinematics(with_coords(q, cp), sc) - forward_kinematics(with_coords(q, cm), sc)) / (2 * h);
    }
    worst = std::max(worst, (A - fd).norm() / std::max(1.0, fd.norm()));
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("b_d is the time derivative of A_d along qdot") {
  Scenario sc;
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const ReducedState q = random_state(rng, sc);
    const double h = 1e-6;
    const Vec3 qd = q.rates();
    const Mat3 Ap = mass_matrix_terms(with_coords(q, q.coords() + h * qd), sc).A;
    const Mat3 Am = mass_matrix_terms(with_coords(q, q.coords() - h * qd), sc).A;
    const Vec3 b_fd = (Ap - Am) / (2 * h) * qd;
    const Vec3 b = mass_matrix_terms(q, sc).b;
    CHECK((b - b_fd).norm() <= 1e-5 * std::max(1.0, b_fd.norm()));
  }
}

TEST_CASE("dynamics reproduce Newton's law in Cartesian space") {
  Scenario sc;
  std::mt19937_64 rng(5);
  ControlInput u{-30.0, -45.0, Vec3(10.0, -5.0, 20.0), 7.0};
  const Vec3 dist(1.0, 2.0, -3.0);
  for (int i = 0; i < 50; ++i) {
    const ReducedState q = random_state(rng, sc);
    const MassMatrixTerms t = mass_matrix_terms(q, sc);
    const Vec3 pdd = t.A * dynamics(q, u, sc, dist) + t.b;
    const Vec3 p = forward_kinematics(q, sc);
    const RopeAxes a = rope_axes(p, sc);
    const Vec3 f = sc.mass * sc.gravity + u.f_r_left * a.left + u.f_r_right * a.right + u.f_leg +
                   u.f_p * propeller_axis(q) + dist;
    CHECK((sc.mass * pdd - f).norm() <= 1e-8 * f.norm());
  }
}

TEST_CASE("the propeller axis is normal to the ropes plane") {
  Scenario sc;
  std::mt19937_64 rng(6);
  for (int i = 0; i < 20; ++i) {
    const ReducedState q = random_state(rng, sc);
    const Vec3 p = forward_kinematics(q, sc);
    const RopeAxes a = rope_axes(p, sc);
    CHECK(std::abs(propeller_axis(q).dot(a.left)) <= 1e-12);
    CHECK(std::abs(propeller_axis(q).dot(a.right)) <= 1e-12);
  }
}

TEST_CASE("singular ropes plane raises SingularityError") {
  Scenario sc;
  ReducedState q = inverse_kinematics(Vec3(1.0, 2.5, -5.0), sc);
  q.psi = 0.0;
  CHECK_THROWS_AS(mass_matrix_terms(q, sc), SingularityError);
  CHECK_THROWS_AS(dynamics(q, ControlInput{}, sc), SingularityError);
  q.psi = 1e-7;
  CHECK_THROWS_AS(dynamics(q, ControlInput{}, sc), SingularityError);
  CHECK_NOTHROW(dynamics(q, ControlInput{}, sc, Vec3::Zero(), 1e-8));
}

TEST_CASE("contact frame is right-handed with t1 along world Y") {
  for (const Vec3& n : {Vec3(1, 0, 0), Vec3(std::cos(0.2), 0, std::sin(0.2)), Vec3(0, 1, 0)}) {
    const ContactFrame f = contact_frame(n);
    const Mat3 R = f.rotation();
    CHECK((R.transpose() * R - Mat3::Identity()).norm() <= 1e-12);
    CHECK(R.determinant() == doctest::Approx(1.0));
    CHECK((f.n - n).norm() <= 1e-12);
  }
  CHECK((contact_frame(Vec3(1, 0, 0)).t1 - Vec3(0, 1, 0)).norm() <= 1e-12);
}

TEST_CASE("ControlInput::checked enforces pulling ropes") {
  CHECK_NOTHROW(ControlInput::checked(-1.0, 0.0));
  CHECK_THROWS_AS(ControlInput::checked(1.0, -1.0), DomainError);
  CHECK_THROWS_AS(ControlInput::checked(-1.0, 0.5), DomainError);
}

TEST_CASE("scenario validation lists every problem") {
  Scenario sc;
  sc.mass = -1.0;
  sc.mu = 0.0;
  sc.wall_normal = Vec3(1, 1, 0);
  try {
    sc.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.issues().size() == 3);
  }
}

#pragma once

#include <optional>

#include <Eigen/Dense>

namespace ropejump {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Axis-aligned ellipsoidal obstacle protruding from the wall.
struct Ellipsoid {
  Vec3 center{Vec3::Zero()};
  Vec3 semi_axes{Vec3::Ones()};  // R_x, R_y, R_z (m), all > 0
};

/// Physical description of the wall, anchors and robot. Units: SI throughout.
///
/// The inertial frame sits at the left anchor; the right anchor lies on +Y.
/// Wall and contact normals point out of the rock, towards the robot.
struct Scenario {
  Vec3 anchor_left{Vec3::Zero()};
  Vec3 anchor_right{0.0, 5.0, 0.0};
  double mass = 5.0;                      // kg
  Vec3 gravity{0.0, 0.0, -9.81};          // m/s^2
  Vec3 wall_normal{1.0, 0.0, 0.0};        // unit
  double wall_offset = 0.0;               // m, wall is {p : n.p = wall_offset}
  Vec3 contact_normal{1.0, 0.0, 0.0};     // unit
  double mu = 0.8;
  double f_leg_max = 300.0;               // N
  double f_r_max = 90.0;                  // N
  double f_p_max = 20.0;                  // N
  double t_th = 0.05;                     // s
  double d_b = 0.8;                       // m, landing wheel spacing
  double d_w = 0.4;                       // m, wall clearance of the wheels
  double d_h = 0.3;                       // m, hoist (rope attachment) spacing
  double wheel_z_offset = 0.0;            // m, vertical wheel offset w.r.t. the CoM
  std::optional<Ellipsoid> obstacle;

  double anchor_distance() const { return (anchor_right - anchor_left).norm(); }

  /// Throws ConfigError listing every violated invariant.
  void validate() const;
};

/// Minimal coordinates of the point mass hanging from two ropes, with rates.
struct ReducedState {
  double psi = 0.0;  // rad, ropes plane w.r.t. vertical
  double l1 = 0.0;   // m, left rope
  double l2 = 0.0;   // m, right rope
  double psi_dot = 0.0;
  double l1_dot = 0.0;
  double l2_dot = 0.0;

  Vec3 coords() const { return {psi, l1, l2}; }
  Vec3 rates() const { return {psi_dot, l1_dot, l2_dot}; }
  static ReducedState from(const Vec3& q, const Vec3& qd) {
    return {q[0], q[1], q[2], qd[0], qd[1], qd[2]};
  }
  bool finite() const { return coords().allFinite() && rates().allFinite(); }
};

/// Actuation applied to the point mass.
///
/// Rope magnitudes act along the rope axis a = (p - anchor)/|p - anchor|, so a
/// pulling rope has a magnitude <= 0.
struct ControlInput {
  double f_r_left = 0.0;   // N, <= 0
  double f_r_right = 0.0;  // N, <= 0
  Vec3 f_leg{Vec3::Zero()};
  double f_p = 0.0;  // N, along the propeller axis

  /// Builds an input after checking the rope unilaterality; throws DomainError otherwise.
  static ControlInput checked(double f_r_left, double f_r_right, const Vec3& f_leg = Vec3::Zero(),
                              double f_p = 0.0);
};

}  // namespace ropejump

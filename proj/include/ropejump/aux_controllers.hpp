#pragma once

#include <utility>

#include <Eigen/Dense>

#include "ropejump/types.hpp"

namespace ropejump {

using Mat46 = Eigen::Matrix<double, 4, 6>;
using Vec4 = Eigen::Vector4d;

/// Base orientation. Throws DomainError unless R is orthonormal with det +1 (to 1e-9).
struct RigidBodyPose {
  Mat3 R{Mat3::Identity()};

  explicit RigidBodyPose(const Mat3& rotation);
  Vec3 x_axis() const { return R.col(0); }
  Vec3 y_axis() const { return R.col(1); }
};

/// Yaw of a Z-Y-X Euler decomposition, atan2(R21, R11), in (-pi, pi].
double yaw_from_rotation(const Mat3& R);

/// Landing-joint set-points shifted by the yaw error (same offset on both legs).
struct LegSetpoints {
  double left = 0.0;
  double right = 0.0;
  bool out_of_range = false;  // |phi_d - phi| > 0.6 rad, beyond the mechanism opening
};
LegSetpoints reorientation_setpoints(double q_left0, double q_right0, double phi_d, double phi);

/// Hip roll and pitch aligning the prismatic leg with f_leg. Throws DomainError for f_leg = 0.
std::pair<double, double> hip_alignment(const Vec3& f_leg);

/// Joint impedance torque K (q_d - q) - D q_dot.
double landing_torque(double q, double q_dot, double q_d, double K, double D);

/// Damping for a critically damped second-order system: 2 sqrt(K m).
double critically_damped_gain(double K, double m_reflected);

/// Leg torques h - J^T f_c.
Vec3 force_to_leg_torques(const Mat3& J_leg, const Vec3& h_leg, const Vec3& f_c);

/// Maps the base twist (p_dot, omega) to wheel lateral speeds and rope-length rates.
///
/// Positions are relative to the CoM, rope axes are unit vectors from the anchors.
Mat46 lateral_jacobian(const RigidBodyPose& pose, const Vec3& p_wheel_left, const Vec3& p_wheel_right,
                       const Vec3& p_hoist_left, const Vec3& p_hoist_right, const Vec3& a_left,
                       const Vec3& a_right);

/// Wheel angular speeds (rad/s) and rope speeds (m/s) for a desired twist.
struct LateralSetpoints {
  double wheel_left = 0.0;
  double wheel_right = 0.0;
  double rope_left = 0.0;
  double rope_right = 0.0;
};
LateralSetpoints lateral_setpoints(const Vec3& p_dot, const Vec3& omega, const Mat46& J_lm, double R_w);

Mat3 skew(const Vec3& v);

}  // namespace ropejump

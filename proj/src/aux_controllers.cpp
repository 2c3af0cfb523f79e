#include "ropejump/aux_controllers.hpp"

#include <cmath>
#include <numbers>

#include "ropejump/errors.hpp"

namespace ropejump {

RigidBodyPose::RigidBodyPose(const Mat3& rotation) : R(rotation) {
  if (!R.allFinite() || (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      std::abs(R.determinant() - 1.0) > 1e-9)
    throw DomainError("rotation matrix must be orthonormal with det +1");
}

Mat3 skew(const Vec3& v) {
  Mat3 S;
  S << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return S;
}

double yaw_from_rotation(const Mat3& R) {
  const double phi = std::atan2(R(1, 0), R(0, 0));
  return phi <= -std::numbers::pi ? phi + 2.0 * std::numbers::pi : phi;
}

LegSetpoints reorientation_setpoints(double q_left0, double q_right0, double phi_d, double phi) {
  const double e = phi_d - phi;
  return {q_left0 + e, q_right0 + e, std::abs(e) > 0.6};
}

std::pair<double, double> hip_alignment(const Vec3& f) {
  if (!(f.norm() > 0.0)) throw DomainError("hip_alignment: leg force must be non-zero");
  return {std::atan2(f.y(), f.x()), -std::numbers::pi + std::atan2(f.z(), f.x())};
}

double landing_torque(double q, double q_dot, double q_d, double K, double D) {
  return K * (q_d - q) - D * q_dot;
}

double critically_damped_gain(double K, double m) {
  if (!(K > 0.0) || !(m > 0.0)) throw DomainError("critical damping needs K > 0 and m > 0");
  return 2.0 * std::sqrt(K * m);
}

Vec3 force_to_leg_torques(const Mat3& J, const Vec3& h, const Vec3& f_c) { return h - J.transpose() * f_c; }

Mat46 lateral_jacobian(const RigidBodyPose& pose, const Vec3& p_ll, const Vec3& p_lr, const Vec3& p_hl,
                       const Vec3& p_hr, const Vec3& a_l, const Vec3& a_r) {
  // A point at offset r moves with p_dot + omega x r = p_dot + [-r]x omega.
  auto row = [](const Vec3& axis, const Vec3& r) {
    Eigen::Matrix<double, 1, 6> out;
    out << axis.transpose(), axis.transpose() * skew(-r);
    return out;
  };
  const Vec3 y = pose.y_axis();
  Mat46 J;
  J.row(0) = row(y, p_ll);
  J.row(1) = row(y, p_lr);
  J.row(2) = row(a_l, p_hl);
  J.row(3) = row(a_r, p_hr);
  return J;
}

LateralSetpoints lateral_setpoints(const Vec3& p_dot, const Vec3& omega, const Mat46& J, double R_w) {
  if (!(R_w > 0.0)) throw DomainError("wheel radius must be > 0");
  Eigen::Matrix<double, 6, 1> twist;
  twist << p_dot, omega;
  const Vec4 v = J * twist;
  return {v[0] / R_w, v[1] / R_w, v[2], v[3]};
}

}  // namespace ropejump

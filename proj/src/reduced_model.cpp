#include "ropejump/reduced_model.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "ropejump/errors.hpp"

namespace ropejump {

namespace {

// Geometry of the circle swept by the mass around the anchor line: the mass sits at
// height y along the anchor line and at distance r from it.
//   y = (d^2 + l1^2 - l2^2) / (2 d),  r = sqrt(l1^2 - y^2)
// First and second partials of y and r w.r.t. (l1, l2) are needed for A_d and b_d.
struct CircleGeometry {
  double y, r;
  double y1, y2;         // dy/dl1, dy/dl2
  double r1, r2;         // dr/dl1, dr/dl2
  double r11, r12, r22;  // second partials of r
};

CircleGeometry circle_geometry(double l1, double l2, double d, bool need_derivatives) {
  if (!(l1 > 0.0) || !(l2 > 0.0)) {
    std::ostringstream os;
    os << "rope lengths must be positive (l1=" << l1 << ", l2=" << l2 << ")";
    throw DomainError(os.str());
  }
  CircleGeometry g{};
  g.y = (d * d + l1 * l1 - l2 * l2) / (2.0 * d);
  double r_sq = l1 * l1 - g.y * g.y;
  if (r_sq < -1e-12 * l1 * l1) {
    std::ostringstream os;
    os << "rope lengths l1=" << l1 << ", l2=" << l2 << " inconsistent with anchor distance " << d;
    throw DomainError(os.str());
  }
  g.r = std::sqrt(std::max(r_sq, 0.0));
  if (!need_derivatives) return g;
  if (g.r <= 1e-12 * l1) throw DomainError("mass on the anchor line: reduced model undefined");

  g.y1 = l1 / d;
  g.y2 = -l2 / d;
  const double y11 = 1.0 / d;
  const double y22 = -1.0 / d;
  // r^2 = l1^2 - y^2, differentiated once and twice.
  g.r1 = (l1 - g.y * g.y1) / g.r;
  g.r2 = (-g.y * g.y2) / g.r;
  g.r11 = (1.0 - g.y1 * g.y1 - g.y * y11 - g.r1 * g.r1) / g.r;
  g.r12 = (-g.y1 * g.y2 - g.r1 * g.r2) / g.r;
  g.r22 = (-g.y2 * g.y2 - g.y * y22 - g.r2 * g.r2) / g.r;
  return g;
}

}  // namespace

void Scenario::validate() const {
  std::vector<std::string> issues;
  auto unit = [&](const Vec3& v, const char* name) {
    if (!v.allFinite() || std::abs(v.norm() - 1.0) > 1e-9) issues.push_back(std::string(name) + " must be a unit vector");
  };
  if (!anchor_left.allFinite() || !anchor_right.allFinite()) issues.push_back("anchors must be finite (m)");
  if (!(anchor_distance() > 0.0)) issues.push_back("anchors must be distinct (m)");
  if (!(mass > 0.0)) issues.push_back("mass must be > 0 (kg)");
  if (!gravity.allFinite()) issues.push_back("gravity must be finite (m/s^2)");
  unit(wall_normal, "wall_normal");
  unit(contact_normal, "contact_normal");
  if (!std::isfinite(wall_offset)) issues.push_back("wall_offset must be finite (m)");
  if (!(mu > 0.0)) issues.push_back("mu must be > 0");
  if (!(f_leg_max > 0.0)) issues.push_back("f_leg_max must be > 0 (N)");
  if (!(f_r_max > 0.0)) issues.push_back("f_r_max must be > 0 (N)");
  if (!(f_p_max >= 0.0)) issues.push_back("f_p_max must be >= 0 (N)");
  if (!(t_th > 0.0)) issues.push_back("t_th must be > 0 (s)");
  if (!(d_b >= 0.0)) issues.push_back("d_b must be >= 0 (m)");
  if (!(d_w >= 0.0)) issues.push_back("d_w must be >= 0 (m)");
  if (!(d_h >= 0.0)) issues.push_back("d_h must be >= 0 (m)");
  if (!std::isfinite(wheel_z_offset)) issues.push_back("wheel_z_offset must be finite (m)");
  if (obstacle && !(obstacle->semi_axes.minCoeff() > 0.0)) issues.push_back("obstacle semi_axes must be > 0 (m)");
  if (!issues.empty()) throw ConfigError(issues);
}

Vec3 forward_kinematics(const ReducedState& q, const Scenario& scenario) {
  const auto g = circle_geometry(q.l1, q.l2, scenario.anchor_distance(), false);
  return scenario.anchor_left + Vec3(g.r * std::sin(q.psi), g.y, -g.r * std::cos(q.psi));
}

ReducedState inverse_kinematics(const Vec3& p, const Scenario& scenario) {
  const Vec3 rel = p - scenario.anchor_left;
  const double radial = std::hypot(rel.x(), rel.z());
  if (radial < 1e-12) throw DomainError("point lies on the anchor line: psi undefined");
  ReducedState q;
  q.psi = std::atan2(rel.x(), -rel.z());
  q.l1 = rel.norm();
  q.l2 = (p - scenario.anchor_right).norm();
  return q;
}

Vec3 propeller_axis(const ReducedState& q) { return {std::cos(q.psi), 0.0, std::sin(q.psi)}; }

RopeAxes rope_axes(const Vec3& p, const Scenario& scenario) {
  return {(p - scenario.anchor_left).normalized(), (p - scenario.anchor_right).normalized()};
}

MassMatrixTerms mass_matrix_terms(const ReducedState& q, const Scenario& scenario, double epsilon) {
  const double s = std::sin(q.psi);
  const double c = std::cos(q.psi);
  if (std::abs(s) < epsilon) {
    std::ostringstream os;
    os << "reduced model singular: |sin(psi)| = " << std::abs(s) << " < " << epsilon;
    throw SingularityError(os.str());
  }
  const auto g = circle_geometry(q.l1, q.l2, scenario.anchor_distance(), true);

  MassMatrixTerms t;
  // p = (r s, y, -r c)
  t.A.col(0) << g.r * c, 0.0, g.r * s;
  t.A.col(1) << g.r1 * s, g.y1, -g.r1 * c;
  t.A.col(2) << g.r2 * s, g.y2, -g.r2 * c;

  const double wd = q.psi_dot;
  const double rd = g.r1 * q.l1_dot + g.r2 * q.l2_dot;
  const double r_quad = g.r11 * q.l1_dot * q.l1_dot + 2.0 * g.r12 * q.l1_dot * q.l2_dot +
                        g.r22 * q.l2_dot * q.l2_dot;
  const double d = scenario.anchor_distance();
  const double y_quad = (q.l1_dot * q.l1_dot - q.l2_dot * q.l2_dot) / d;
  t.b << s * r_quad + 2.0 * rd * c * wd - g.r * s * wd * wd,  //
      y_quad,                                                   //
      -c * r_quad + 2.0 * rd * s * wd + g.r * c * wd * wd;
  return t;
}

Vec3 cartesian_velocity(const ReducedState& q, const Scenario& scenario) {
  const double s = std::sin(q.psi);
  const double c = std::cos(q.psi);
  const auto g = circle_geometry(q.l1, q.l2, scenario.anchor_distance(), true);
  const double rd = g.r1 * q.l1_dot + g.r2 * q.l2_dot;
  return {rd * s + g.r * c * q.psi_dot, g.y1 * q.l1_dot + g.y2 * q.l2_dot,
          -rd * c + g.r * s * q.psi_dot};
}

Vec3 total_force(const ReducedState& q, const ControlInput& u, const Scenario& scenario,
                 const Vec3& disturbance) {
  const Vec3 p = forward_kinematics(q, scenario);
  const auto axes = rope_axes(p, scenario);
  return scenario.mass * scenario.gravity + u.f_leg + axes.left * u.f_r_left +
         axes.right * u.f_r_right + propeller_axis(q) * u.f_p + disturbance;
}

Vec3 dynamics(const ReducedState& q, const ControlInput& u, const Scenario& scenario,
              const Vec3& disturbance, double epsilon) {
  const auto terms = mass_matrix_terms(q, scenario, epsilon);
  const Vec3 f_tot = total_force(q, u, scenario, disturbance);
  return terms.A.partialPivLu().solve(f_tot / scenario.mass - terms.b);
}

ContactFrame contact_frame(const Vec3& normal) {
  const double len = normal.norm();
  if (!(len > 0.0)) throw DomainError("contact normal must be nonzero");
  ContactFrame f;
  f.n = normal / len;
  Vec3 seed = Vec3::UnitY();
  Vec3 t = seed - seed.dot(f.n) * f.n;
  if (t.norm() < 1e-9) {
    seed = Vec3::UnitX();
    t = seed - seed.dot(f.n) * f.n;
  }
  f.t1 = t.normalized();
  f.t2 = f.n.cross(f.t1);
  return f;
}

Mat3 ContactFrame::rotation() const {
  Mat3 R;
  R << t1, t2, n;
  return R;
}

ControlInput ControlInput::checked(double f_r_left, double f_r_right, const Vec3& f_leg,
                                   double f_p) {
  if (f_r_left > 0.0 || f_r_right > 0.0) {
    std::ostringstream os;
    os << "rope forces must be <= 0 (pull towards the anchor), got " << f_r_left << ", "
       << f_r_right;
    throw DomainError(os.str());
  }
  return ControlInput{f_r_left, f_r_right, f_leg, f_p};
}

}  // namespace ropejump

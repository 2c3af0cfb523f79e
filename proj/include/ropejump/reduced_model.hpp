#pragma once

#include "ropejump/types.hpp"

namespace ropejump {

/// |sin(psi)| below this raises SingularityError in mass_matrix_terms() and dynamics().
inline constexpr double kSingularityEpsilon = 1e-6;

/// Cartesian position of the point mass for the given rope lengths and ropes-plane angle.
///
/// Throws DomainError when the lengths violate the triangle inequality with the anchor distance.
Vec3 forward_kinematics(const ReducedState& q, const Scenario& scenario);

/// Reduced coordinates (psi, l1, l2) of a Cartesian point; rates are left at zero.
///
/// Throws DomainError when p lies on the anchor line, where psi is undefined.
ReducedState inverse_kinematics(const Vec3& p, const Scenario& scenario);

/// Cartesian velocity for a state, i.e. A_d * qdot.
Vec3 cartesian_velocity(const ReducedState& q, const Scenario& scenario);

/// Unit axis of the propeller thrust, normal to the plane containing both ropes.
Vec3 propeller_axis(const ReducedState& q);

/// Unit rope axes pointing from each anchor towards the mass.
struct RopeAxes {
  Vec3 left;
  Vec3 right;
};
RopeAxes rope_axes(const Vec3& p, const Scenario& scenario);

/// Orthonormal frame (t1, t2, n) attached to a contact normal.
///
/// t1 is world Y made orthogonal to n (world X when n is parallel to Y), t2 = n x t1.
struct ContactFrame {
  Vec3 t1;
  Vec3 t2;
  Vec3 n;
  /// Columns (t1, t2, n): maps local coordinates with +z along the normal to world.
  Mat3 rotation() const;
};
ContactFrame contact_frame(const Vec3& normal);

/// Jacobian A_d = dp/dq and velocity-product term b_d, so that pddot = A_d qddot + b_d.
struct MassMatrixTerms {
  Mat3 A;
  Vec3 b;
};
MassMatrixTerms mass_matrix_terms(const ReducedState& q, const Scenario& scenario,
                                  double epsilon = kSingularityEpsilon);

/// Total Cartesian force on the mass: gravity, leg, ropes, propeller and an external disturbance.
Vec3 total_force(const ReducedState& q, const ControlInput& u, const Scenario& scenario,
                 const Vec3& disturbance = Vec3::Zero());

/// Reduced accelerations (psi_ddot, l1_ddot, l2_ddot) = A_d^-1 (f_tot/m - b_d).
Vec3 dynamics(const ReducedState& q, const ControlInput& u, const Scenario& scenario,
              const Vec3& disturbance = Vec3::Zero(), double epsilon = kSingularityEpsilon);

}  // namespace ropejump

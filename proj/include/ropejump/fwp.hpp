#pragma once

#include <string>
#include <vector>

#include "ropejump/polytope.hpp"
#include "ropejump/types.hpp"

namespace ropejump {

/// Static contacts of the robot on the wall, expressed in a frame at the CoM.
struct ContactSet {
  Vec3 wheel_left{Vec3::Zero()};
  Vec3 wheel_right{Vec3::Zero()};
  Vec3 hoist_left{Vec3::Zero()};   // rope attachment points
  Vec3 hoist_right{Vec3::Zero()};
  Vec3 axis_left{Vec3::UnitZ()};   // unit, from the anchor towards the attachment
  Vec3 axis_right{Vec3::UnitZ()};
  Vec3 normal{Vec3::UnitX()};      // contact normal, out of the wall
  double mu = 0.8;
  double f_leg_max = 300.0;
  double f_r_max = 90.0;

  void validate() const;
};

struct Wrench {
  Vec3 force{Vec3::Zero()};
  Vec3 moment{Vec3::Zero()};
  Vec6 stacked() const {
    Vec6 w;
    w << force, moment;
    return w;
  }
};

/// Apex plus four friction-pyramid corners at full normal load (forces on the robot).
VPolytope wheel_force_polytope(const Vec3& normal, double mu, double f_max);

/// {-a f_r_max, 0}: a pulling rope.
VPolytope rope_force_polytope(const Vec3& axis, double f_r_max);

/// (f, p x f) for every force vertex.
std::vector<VecX> lift_to_wrench(const VPolytope& forces, const Vec3& p);

struct Fwp {
  VPolytope V;
  HPolytope H;
  int raw_vertices = 0;  // combinations before hulling
};

/// Minkowski sum of the two wheel and two rope wrench polytopes, with its facets.
/// Throws DegenerateGeometryError when the sum is flat in R^6.
Fwp build_fwp(const ContactSet& contacts);

/// (m g, 0) about the CoM.
Wrench gravitational_wrench(const Scenario& scenario);

/// Wheels at -d_w n + (-/+) d_b/2 y_wall + z_off z_wall and attachments at (-/+) d_h/2 y_wall
/// (left first), with (y_wall, z_wall) the tangents of contact_frame(n).
ContactSet contact_geometry(const Vec3& p, const Scenario& scenario);

/// Whether contact forces can hold the robot at p.
///
/// With limits the contacts must produce -w_G inside the FWP; without limits only
/// unilaterality and friction apply (force-existence LP).
bool feasibility(const Vec3& p, const Scenario& scenario, bool actuation_limits);

/// Force-existence LP without actuation limits: is w a non-negative combination of pulling ropes
/// and friction-pyramid wheel forces?
bool cone_feasible(const ContactSet& contacts, const Wrench& w);

struct HeatmapGrid {
  double x = 1.5;  // m, fixed depth of the CoM
  double y_min = 0.0, y_max = 5.0;
  int ny = 20;
  double z_min = -10.0, z_max = -2.0;
  int nz = 20;

  void validate() const;
  double y(int j) const { return ny == 1 ? y_min : y_min + (y_max - y_min) * j / (ny - 1); }
  double z(int i) const { return nz == 1 ? z_min : z_min + (z_max - z_min) * i / (nz - 1); }
};

struct HeatmapCell {
  double y = 0.0;
  double z = 0.0;
  double gamma = 0.0;  // N (or N m); 0 for infeasible cells
  bool feasible = false;
  bool unbounded = false;
  std::string error;  // non-empty when the cell could not be evaluated
};

/// Margin of -w_G along `direction` (unit, R^6) for every cell, row-major in z then y.
std::vector<HeatmapCell> margin_heatmap(const HeatmapGrid& grid, const Vec6& direction, const Scenario& scenario,
                                        int threads = 0);

}  // namespace ropejump

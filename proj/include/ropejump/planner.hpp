#pragma once

#include <string>
#include <vector>

#include "ropejump/integrator.hpp"
#include "ropejump/optim.hpp"
#include "ropejump/types.hpp"

namespace ropejump {

/// Weights and shape of the offline jump problem.
struct PlannerWeights {
  double w_hw = 0.1;      // hoist work weight (per J)
  double w_s = 1.0;       // smoothing weight (per N^2 of successive rope-force differences)
  double w_term = 1e3;    // terminal position cost (1/m^2)
  double slack = 0.02;    // m, hard bound on the terminal position error
  double clearance = 1.0; // m, obstacle clearance c
  double wall_epsilon = 0.0;  // m, flat-wall margin
  int N = 30;             // flight knots

  void validate() const;
};

/// Result of the offline optimization.
///
/// The thrust phase lasts scenario.t_th with f_leg and the first knot rope forces; the flight
/// phase has N knots of t_f / N seconds each.
struct JumpPlan {
  Vec3 p0{Vec3::Zero()};
  Vec3 target{Vec3::Zero()};
  Vec3 f_leg{Vec3::Zero()};
  std::vector<double> f_r_left;   // N entries, <= 0
  std::vector<double> f_r_right;  // N entries, <= 0
  double t_f = 0.0;               // s, flight duration after the thrust
  double t_th = 0.0;
  IntegratorConfig integrator;    // dt == t_f / N

  ReducedState q0;                   // at rest on the wall
  std::vector<ReducedState> states;  // N+1 flight knots, states[0] at lift-off
  std::vector<Vec3> positions;

  // Solver diagnostics.
  NlpStatus status = NlpStatus::MaxIters;
  double objective = 0.0;
  double kkt_residual = 0.0;
  double max_violation = 0.0;
  int iterations = 0;
  double terminal_error = 0.0;  // |p_N - target| at planner resolution
  double hoist_work = 0.0;      // J, sum |f l_dot| dt at knots (unsmoothed)

  int knots() const { return static_cast<int>(f_r_left.size()); }
  double dt() const { return t_f / knots(); }
  ControlInput input(int k) const;
  std::vector<ControlInput> schedule() const;
};

/// Re-propagates thrust and flight of `plan` with its own integrator settings and fills
/// q0/states/positions/terminal_error/hoist_work.
void replay(JumpPlan& plan, const Scenario& scenario);

/// Largest violation of any plan bound or path constraint, recomputed from scratch.
struct PlanAudit {
  double max_violation = 0.0;
  std::string worst;  // description of the worst row
};
PlanAudit audit_plan(const JumpPlan& plan, const Scenario& scenario, const PlannerWeights& weights);

/// Lower bound on p_x imposed by an ellipsoidal obstacle at (p_y, p_z).
///
/// Inside the shadow of the ellipsoid (q > 0) the bound is o_x + sqrt(q) + c, elsewhere the
/// flat wall offset.
double obstacle_min_x(double p_y, double p_z, const Ellipsoid& obstacle, double clearance,
                      double wall_offset);

/// Solver settings used by plan_jump() unless overridden.
NlpOptions default_planner_options();

/// Single-shooting jump optimization from p0 (resting on the wall) to target.
///
/// Throws InfeasibleTargetError for endpoints behind the wall and SolverError when no plan
/// satisfying every constraint is found.
JumpPlan plan_jump(const Vec3& p0, const Vec3& target, const Scenario& scenario,
                   const PlannerWeights& weights, const IntegratorConfig& integrator,
                   const NlpOptions& options = default_planner_options());

/// Knot positions resampled at dt_mpc by linear interpolation (exact at the knots).
std::vector<Vec3> map_plan_to_reference(const JumpPlan& plan, double dt_mpc);

}  // namespace ropejump

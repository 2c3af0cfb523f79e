#include <cmath>

#include "doctest.h"
#include "ropejump/errors.hpp"
#include "ropejump/jobs.hpp"
#include "ropejump/mpc.hpp"
#include "ropejump/planner.hpp"
#include "ropejump/reduced_model.hpp"

using namespace ropejump;

namespace {

const JumpPlan& default_plan() {
  static const JumpPlan plan = plan_from_config(preset_config("default"));
  return plan;
}

}  // namespace

TEST_CASE("default plan reaches the target within the slack and passes the audit") {
  const RunConfig cfg = preset_config("default");
  const JumpPlan& plan = default_plan();
  CHECK(plan.knots() == cfg.planner.N);
  CHECK(plan.states.size() == static_cast<std::size_t>(plan.knots() + 1));
  CHECK(plan.terminal_error <= cfg.planner.slack + 1e-9);
  CHECK((plan.positions.back() - cfg.target).norm() == doctest::Approx(plan.terminal_error));
  const PlanAudit a = audit_plan(plan, cfg.scenario, cfg.planner);
  CHECK_MESSAGE(a.max_violation <= 1e-6, a.worst);
  for (int k = 0; k < plan.knots(); ++k) {
    CHECK(plan.f_r_left[k] <= 1e-9);
    CHECK(plan.f_r_left[k] >= -cfg.scenario.f_r_max - 1e-9);
    CHECK(plan.f_r_right[k] <= 1e-9);
  }
  // Thrust starts from rest at p0.
  CHECK((forward_kinematics(plan.q0, cfg.scenario) - cfg.p0).norm() <= 1e-9);
  CHECK(plan.q0.rates().norm() == 0.0);
  CHECK(plan.integrator.dt == doctest::Approx(plan.t_f / plan.knots()));
}

TEST_CASE("replay reproduces the planner rollout") {
  const RunConfig cfg = preset_config("default");
  JumpPlan copy = default_plan();
  copy.positions.clear();
  replay(copy, cfg.scenario);
  REQUIRE(copy.positions.size() == default_plan().positions.size());
  for (std::size_t k = 0; k < copy.positions.size(); ++k)
    CHECK((copy.positions[k] - default_plan().positions[k]).norm() <= 1e-12);
}

TEST_CASE("endpoints behind the wall are rejected before solving") {
  const RunConfig cfg = preset_config("default");
  CHECK_THROWS_AS(plan_jump(cfg.p0, Vec3(-0.5, 4.0, -4.0), cfg.scenario, cfg.planner, cfg.integrator),
                  InfeasibleTargetError);
  CHECK_THROWS_AS(plan_jump(Vec3(-0.1, 2.5, -6.0), cfg.target, cfg.scenario, cfg.planner, cfg.integrator),
                  InfeasibleTargetError);
}

TEST_CASE("obstacle lower bound matches the ellipsoid surface") {
  const Ellipsoid o{Vec3(-0.5, 2.5, -6.0), Vec3(1.5, 1.5, 0.87)};
  // On the ellipsoid axis the bound is o_x + R_x + c.
  CHECK(obstacle_min_x(2.5, -6.0, o, 1.0, 0.0) == doctest::Approx(-0.5 + 1.5 + 1.0));
  // Outside the shadow the flat-wall offset applies.
  CHECK(obstacle_min_x(4.5, -6.0, o, 1.0, 0.05) == 0.05);
  // Points on the surface: x = o_x + R_x sqrt(1 - (dy/R_y)^2 - (dz/R_z)^2).
  for (double dy : {-1.0, 0.3, 1.2})
    for (double dz : {-0.4, 0.0, 0.5}) {
      const double s = 1.0 - std::pow(dy / 1.5, 2) - std::pow(dz / 0.87, 2);
      if (s <= 0.0) continue;
      CHECK(obstacle_min_x(2.5 + dy, -6.0 + dz, o, 0.0, 0.0) == doctest::Approx(-0.5 + 1.5 * std::sqrt(s)));
    }
}

TEST_CASE("obstacle plan keeps the clearance at every knot") {
  const RunConfig cfg = preset_config("obstacle");
  const JumpPlan plan = plan_from_config(cfg);
  const auto c = obstacle_clearance(plan, cfg);
  REQUIRE(c.has_value());
  CHECK(*c >= -1e-6);
  CHECK(plan.terminal_error <= cfg.planner.slack + 1e-9);
}

TEST_CASE("reference resampling is exact at the knots and linear between them") {
  const JumpPlan& plan = default_plan();
  const std::vector<Vec3> same = map_plan_to_reference(plan, plan.dt());
  REQUIRE(same.size() == plan.positions.size());
  for (std::size_t k = 0; k < same.size(); ++k) CHECK((same[k] - plan.positions[k]).norm() <= 1e-12);
  const std::vector<Vec3> half = map_plan_to_reference(plan, 0.5 * plan.dt());
  REQUIRE(half.size() == 2 * plan.positions.size() - 1);
  for (int k = 0; k + 1 < plan.knots(); ++k)
    CHECK((half[2 * k + 1] - 0.5 * (plan.positions[k] + plan.positions[k + 1])).norm() <= 1e-9);
}

TEST_CASE("horizon shrinks at the end of the reference") {
  CHECK(shrink_horizon(0, 12, 30) == 12);
  CHECK(shrink_horizon(25, 12, 30) == 5);
  CHECK(shrink_horizon(29, 12, 30) == 1);
  CHECK(shrink_horizon(30, 12, 30) == 0);
  CHECK_THROWS_AS(shrink_horizon(31, 12, 30), DomainError);
}

TEST_CASE("warm start shifts by one and repeats the last knot") {
  MpcSolution prev;
  prev.k = 4;
  prev.dF_left = {1, 2, 3};
  prev.dF_right = {4, 5, 6};
  prev.f_p = {7, 8, 9};
  const MpcSolution g = warm_start_from(&prev, 3);
  CHECK(g.k == 5);
  CHECK(g.dF_left == std::vector<double>{2, 3, 3});
  CHECK(g.dF_right == std::vector<double>{5, 6, 6});
  CHECK(g.f_p == std::vector<double>{8, 9, 9});
  const MpcSolution cold = warm_start_from(nullptr, 2);
  CHECK(cold.f_p == std::vector<double>{0, 0});
}

TEST_CASE("MPC on the reference keeps the feed-forward and respects the boxes") {
  const RunConfig cfg = preset_config("default");
  const JumpPlan& plan = default_plan();
  const MpcConfig mc = default_mpc_config(plan, cfg.scenario);
  CHECK(mc.N_mpc == static_cast<int>(std::lround(0.4 * plan.knots())));
  const MpcReference ref = make_reference(plan, mc.dt_mpc);
  const MpcSolution s = mpc_step(plan.states[0], 0, ref, mc, cfg.scenario);
  CHECK_FALSE(s.degraded);
  CHECK(s.horizon() == mc.N_mpc);
  for (int i = 0; i < s.horizon(); ++i) {
    CHECK(std::abs(s.dF_left[i]) <= 1.0);
    CHECK(std::abs(s.dF_right[i]) <= 1.0);
    CHECK(std::abs(s.f_p[i]) <= 1.0);
  }
  CHECK(mpc_bound_violation(s, ref, mc) <= 1e-8);
  CHECK((s.predicted.front() - plan.positions[0]).norm() <= 1e-9);
}

TEST_CASE("MPC corrects a perturbed state within the input boxes") {
  const RunConfig cfg = preset_config("default");
  const JumpPlan& plan = default_plan();
  const MpcConfig mc = default_mpc_config(plan, cfg.scenario);
  const MpcReference ref = make_reference(plan, mc.dt_mpc);
  ReducedState x = plan.states[5];
  x.l1_dot += 0.3;
  x.psi_dot -= 0.1;
  const MpcSolution s = mpc_step(x, 5, ref, mc, cfg.scenario);
  CHECK_FALSE(s.degraded);
  CHECK(mpc_bound_violation(s, ref, mc) <= 1e-8);
  double moved = 0.0;
  for (int i = 0; i < s.horizon(); ++i) moved += std::abs(s.dF_left[i]) + std::abs(s.dF_right[i]) + std::abs(s.f_p[i]);
  CHECK(moved > 1e-3);
}

TEST_CASE("without a propeller the MPC has no propeller input") {
  RunConfig cfg = preset_config("default");
  cfg.scenario.f_p_max = 0.0;
  const JumpPlan& plan = default_plan();
  const MpcConfig mc = default_mpc_config(plan, cfg.scenario);
  CHECK(mc.f_p_max == 0.0);
  const MpcReference ref = make_reference(plan, mc.dt_mpc);
  ReducedState x = plan.states[3];
  x.psi_dot += 0.05;
  const MpcSolution s = mpc_step(x, 3, ref, mc, cfg.scenario);
  for (double f : s.f_p) CHECK(f == 0.0);
  CHECK(mpc_bound_violation(s, ref, mc) <= 1e-8);
}

TEST_CASE("MPC configuration is validated") {
  MpcConfig c;
  c.N_mpc = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = MpcConfig{};
  c.dt_mpc = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

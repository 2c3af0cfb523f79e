#include <cmath>
#include <sstream>

#include "doctest.h"
#include "ropejump/energy.hpp"
#include "ropejump/errors.hpp"
#include "ropejump/jobs.hpp"
#include "ropejump/simulator.hpp"

using namespace ropejump;

namespace {

const JumpPlan& default_plan() {
  static const JumpPlan plan = plan_from_config(preset_config("default"));
  return plan;
}

std::string csv(const SimTrace& t) {
  std::ostringstream os;
  write_trace_csv(os, t);
  return os.str();
}

}  // namespace

TEST_CASE("disturbance windows") {
  const DisturbanceSpec imp = DisturbanceSpec::impulsive(Vec3(1, 2, 3), 0.5, 0.2);
  CHECK(imp.at(0.49).norm() == 0.0);
  CHECK((imp.at(0.5) - Vec3(1, 2, 3)).norm() == 0.0);
  CHECK((imp.at(0.69) - Vec3(1, 2, 3)).norm() == 0.0);
  CHECK(imp.at(0.7).norm() == 0.0);
  CHECK(imp.at(-0.01).norm() == 0.0);
  const DisturbanceSpec c = DisturbanceSpec::constant(Vec3(7, -7, 0));
  CHECK((c.at(3.0) - Vec3(7, -7, 0)).norm() == 0.0);
  CHECK(DisturbanceSpec{}.at(0.3).norm() == 0.0);
  DisturbanceSpec bad = DisturbanceSpec::impulsive(Vec3::Ones(), 0.5, 0.2);
  bad.t_end = 0.4;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("open-loop replay at a fine step lands close to the planned endpoint") {
  RunConfig cfg = preset_config("default");
  cfg.controller = ControllerKind::OpenLoop;
  cfg.dt_sim = 1e-4;
  const SimTrace tr = track_plan(default_plan(), cfg);
  CHECK_FALSE(tr.aborted);
  CHECK(tr.landing_error.norm() <= 0.06);
  CHECK(tr.t_end == doctest::Approx(default_plan().t_th + default_plan().t_f).epsilon(1e-9));
  REQUIRE(tr.event("lift_off") != nullptr);
  CHECK(tr.event("lift_off")->t == doctest::Approx(default_plan().t_th));
  CHECK(tr.samples.front().phase == Phase::Thrust);
  CHECK(tr.samples.back().phase == Phase::Flight);
}

TEST_CASE("MPC tracking with rate noise is reproducible for a seed") {
  RunConfig cfg = preset_config("default");
  cfg.noise.sigma = Vec3(0.01, 0.2, 0.2);
  cfg.noise.seed = 5;
  cfg.disturbance = DisturbanceSpec::impulsive(Vec3(30, -30, 20), 0.3, 0.2);
  const SimTrace a = track_plan(default_plan(), cfg);
  const SimTrace b = track_plan(default_plan(), cfg);
  CHECK(csv(a) == csv(b));
  CHECK(a.mpc_solves > 0);
  CHECK(a.max_bound_violation <= 1e-8);
  cfg.noise.seed = 6;
  CHECK(csv(track_plan(default_plan(), cfg)) != csv(a));
}

TEST_CASE("applied disturbance in the trace follows the window") {
  RunConfig cfg = preset_config("default");
  cfg.controller = ControllerKind::OpenLoop;
  cfg.disturbance = DisturbanceSpec::impulsive(Vec3(10, 0, 0), 0.5, 0.2);
  const SimTrace tr = track_plan(default_plan(), cfg);
  const double lift = tr.event("lift_off")->t;
  for (const auto& s : tr.samples) {
    const double tf = s.t - lift;
    if (tf >= 0.5 + 1e-9 && tf < 0.7 - 1e-9) CHECK(s.disturbance.x() == 10.0);
    if (tf < 0.5 - 1e-9 || tf > 0.7 + 1e-9) CHECK(s.disturbance.norm() == 0.0);
  }
}

TEST_CASE("robustness batch: empty batches and thread-count independence") {
  RunConfig cfg = preset_config("default");
  cfg.robustness.n_runs = 0;
  const RobustnessSummary none = robustness_batch(default_plan(), cfg, 2);
  CHECK(none.runs == 0);
  CHECK(none.errors.empty());

  cfg.robustness.n_runs = 4;
  cfg.robustness.n_intervals = 2;
  const RobustnessSummary one = robustness_batch(default_plan(), cfg, 1);
  const RobustnessSummary four = robustness_batch(default_plan(), cfg, 4);
  REQUIRE(one.errors.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(one.errors[i] == four.errors[i]);
  REQUIRE(one.intervals.size() == 2);
  CHECK(one.intervals[0].runs == 2);
  CHECK(one.intervals[1].t_start == doctest::Approx(0.5 * default_plan().t_f));
}

TEST_CASE("landing episode records touch-down and a contact phase") {
  const RunConfig cfg = preset_config("landing");
  const JumpPlan plan = plan_from_config(cfg);
  const SimTrace tr = track_plan(plan, cfg);
  CHECK_FALSE(tr.aborted);
  const SimEvent* lift = tr.event("lift_off");
  const SimEvent* touch = tr.event("touch_down");
  REQUIRE(lift != nullptr);
  REQUIRE(touch != nullptr);
  CHECK(touch->t > lift->t);
  CHECK_FALSE((tr.early_touch_down && tr.delayed_touch_down));
  CHECK(tr.t_end == doctest::Approx(touch->t + cfg.landing.contact_time).epsilon(1e-6));
  bool contact = false;
  for (const auto& s : tr.samples) {
    CHECK(s.contact_force >= 0.0);
    if (s.phase == Phase::Contact) contact = true;
    if (s.t < touch->t - 1e-12) CHECK(s.phase != Phase::Contact);
  }
  CHECK(contact);
  const EnergyReport e = jump_energy(tr, cfg.scenario);
  CHECK(e.kinetic > 0.0);
  CHECK(e.total == doctest::Approx(e.kinetic + e.hoist));
}

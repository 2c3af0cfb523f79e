#include "ropejump/jobs.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <limits>

#include "ropejump/errors.hpp"
#include "ropejump/reduced_model.hpp"

namespace ropejump {

JumpPlan plan_from_config(const RunConfig& config) {
  config.validate();
  return plan_jump(config.p0, config.target, config.scenario, config.planner, config.integrator,
                   config.planner_options());
}

EnergyReport plan_energy(const JumpPlan& plan, const Scenario& scenario) {
  if (plan.states.empty()) throw DomainError("plan_energy: plan has no propagated states");
  EnergyReport r;
  r.kinetic = 0.5 * scenario.mass * cartesian_velocity(plan.states.front(), scenario).squaredNorm();
  r.hoist = plan.hoist_work;
  r.total = r.kinetic + r.hoist;
  return r;
}

std::optional<double> obstacle_clearance(const JumpPlan& plan, const RunConfig& config) {
  const auto& obs = config.scenario.obstacle;
  if (!obs) return std::nullopt;
  double worst = std::numeric_limits<double>::infinity();
  for (const Vec3& p : plan.positions) {
    const double bound =
        obstacle_min_x(p.y(), p.z(), *obs, config.planner.clearance, config.scenario.wall_offset);
    worst = std::min(worst, p.x() - bound);
  }
  return worst;
}

SimTrace track_plan(const JumpPlan& plan, const RunConfig& config) {
  SimOptions o = config.sim_options();
  if (o.controller == ControllerKind::Mpc) o.mpc = config.mpc_config(plan);
  return run_episode(plan, config.scenario, o);
}

std::vector<BenchCase> default_bench_cases() {
  using M = IntegrationMethod;
  return {{40, M::RK4, 1}, {60, M::RK4, 1}, {40, M::RK4, 5}, {40, M::Euler, 1}, {40, M::Euler, 10}, {30, M::RK4, 5}};
}

std::vector<BenchRow> bench_integrators(const RunConfig& config, const std::vector<BenchCase>& cases, double dt_ref) {
  if (!(dt_ref > 0.0)) throw DomainError("bench_integrators: dt_ref must be > 0");
  std::vector<BenchRow> rows;
  for (const BenchCase& c : cases) {
    BenchRow row;
    row.N = c.N;
    row.method = c.method;
    row.n_sub = c.n_sub;
    RunConfig cfg = config;
    cfg.planner.N = c.N;
    cfg.integrator.method = c.method;
    cfg.integrator.n_sub = c.n_sub;
    try {
      const auto t0 = std::chrono::steady_clock::now();
      const JumpPlan plan = plan_from_config(cfg);
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      row.iterations = plan.iterations;
      SimOptions o;
      o.dt_sim = dt_ref;
      o.controller = ControllerKind::OpenLoop;
      const SimTrace tr = run_episode(plan, cfg.scenario, o);
      const Vec3 p_ref = cfg.target - tr.landing_error;
      row.e_i = (p_ref - plan.positions.back()).norm();
      row.e_a = tr.landing_error.norm();
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

void write_bench_csv(const std::filesystem::path& path, const std::vector<BenchRow>& rows) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << std::setprecision(17);
  os << "N,method,n_sub,iterations,seconds,e_i,e_a,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), '"', '\'');
    os << r.N << ',' << (r.method == IntegrationMethod::RK4 ? "RK4" : "EUL") << ',' << r.n_sub << ',' << r.iterations
       << ',' << r.seconds << ',' << r.e_i << ',' << r.e_a << ",\"" << err << "\"\n";
  }
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

RobustnessSummary robustness_batch(const JumpPlan& plan, const RunConfig& config, int threads) {
  RobustnessOptions o = config.robustness;
  o.threads = threads;
  o.sim = config.sim_options();
  if (o.sim.controller == ControllerKind::Mpc) o.sim.mpc = config.mpc_config(plan);
  return batch_robustness(plan, config.scenario, o);
}

}  // namespace ropejump

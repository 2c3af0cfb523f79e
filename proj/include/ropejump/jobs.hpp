#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ropejump/energy.hpp"
#include "ropejump/scenario_io.hpp"

namespace ropejump {

/// Plans the configured jump (p0 -> target).
JumpPlan plan_from_config(const RunConfig& config);

/// Lift-off kinetic energy plus hoist work of the planned flight.
EnergyReport plan_energy(const JumpPlan& plan, const Scenario& scenario);

/// Smallest p_x - obstacle_min_x over the knots; nullopt without an obstacle.
std::optional<double> obstacle_clearance(const JumpPlan& plan, const RunConfig& config);

/// Closed- or open-loop episode with the configured controller, disturbance, noise and landing.
SimTrace track_plan(const JumpPlan& plan, const RunConfig& config);

struct BenchRow {
  int N = 0;
  IntegrationMethod method = IntegrationMethod::RK4;
  int n_sub = 1;
  int iterations = 0;
  double seconds = 0.0;  // planner wall time
  double e_i = 0.0;      // m, |p_ref(t_f) - p_plan(t_f)|
  double e_a = 0.0;      // m, |p_tg - p_ref(t_f)|
  std::string error;     // non-empty when the row could not be planned
};

struct BenchCase {
  int N;
  IntegrationMethod method;
  int n_sub;
};

/// The six rows of the integration benchmark, n_sub = 1 meaning a single step per knot.
std::vector<BenchCase> default_bench_cases();

/// Plans each case and re-integrates the plan open loop at dt_ref to measure the integration
/// error. `config` supplies the scenario, weights and endpoints.
std::vector<BenchRow> bench_integrators(const RunConfig& config, const std::vector<BenchCase>& cases,
                                        double dt_ref = 1e-4);

void write_bench_csv(const std::filesystem::path& path, const std::vector<BenchRow>& rows);

/// Robustness batch with the configured MPC and simulation settings.
RobustnessSummary robustness_batch(const JumpPlan& plan, const RunConfig& config, int threads = 0);

}  // namespace ropejump

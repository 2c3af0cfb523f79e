#pragma once

#include <optional>
#include <vector>

#include "ropejump/integrator.hpp"
#include "ropejump/optim.hpp"
#include "ropejump/planner.hpp"
#include "ropejump/types.hpp"

namespace ropejump {

struct MpcConfig {
  int N_mpc = 12;
  double dt_mpc = 0.05;  // s
  double w_p = 1.0;      // tracking, per m^2
  double w_u = 1e-5;     // input smoothing, per N^2
  double w_pf = 0.0;     // extra terminal tracking, per m^2
  double f_r_max = 90.0;
  double f_p_max = 20.0;
  IntegrationMethod method = IntegrationMethod::RK4;
  int n_sub = 5;
  int max_iters = 30;

  void validate() const;
};

/// dt_mpc = plan dt, N_mpc = round(0.4 N), bounds from the scenario.
MpcConfig default_mpc_config(const JumpPlan& plan, const Scenario& scenario);

/// Cartesian reference and rope feed-forward sampled at dt_mpc.
struct MpcReference {
  double dt = 0.0;
  std::vector<Vec3> positions;  // length() + 1 samples, positions[0] at lift-off
  std::vector<double> ff_left;  // length() samples
  std::vector<double> ff_right;

  int length() const { return static_cast<int>(ff_left.size()); }
};

MpcReference make_reference(const JumpPlan& plan, double dt_mpc);

struct MpcSolution {
  std::vector<double> dF_left;   // deviation from the feed-forward, per knot
  std::vector<double> dF_right;
  std::vector<double> f_p;       // propeller force, per knot
  std::vector<Vec3> predicted;   // horizon + 1 positions, predicted[0] from the measured state
  int k = 0;                     // reference index of knot 0
  bool degraded = false;         // solver failed; the guess is returned unchanged
  NlpStatus status = NlpStatus::MaxIters;
  int iterations = 0;
  double objective = 0.0;

  int horizon() const { return static_cast<int>(f_p.size()); }
  /// Total input at knot i (feed-forward + deviation).
  ControlInput input(int i, const MpcReference& ref) const;
};

/// min(N_mpc, length - k), at least 1 while k < length.
int shrink_horizon(int k, int N_mpc, int length);

/// Initial guess for a horizon of `horizon` knots starting one sample after prev.k.
/// Shift by one with the last knot repeated; zeros without a previous solution.
MpcSolution warm_start_from(const MpcSolution* prev, int horizon);

/// One receding-horizon solve from the measured state x_hat at reference index k.
///
/// `previous_input` is the input applied during the last control period (used by the first
/// smoothing term); without it the feed-forward at k is used. On solver failure the warm start
/// comes back with degraded = true.
MpcSolution mpc_step(const ReducedState& x_hat, int k, const MpcReference& ref, const MpcConfig& cfg,
                     const Scenario& scenario, const MpcSolution* warm_start = nullptr,
                     const std::optional<ControlInput>& previous_input = std::nullopt);

/// Largest violation of the rope and propeller boxes over every knot of `sol`.
double mpc_bound_violation(const MpcSolution& sol, const MpcReference& ref, const MpcConfig& cfg);

}  // namespace ropejump

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ropejump/mpc.hpp"
#include "ropejump/planner.hpp"
#include "ropejump/types.hpp"

namespace ropejump {

/// External force on the mass. Times are measured from lift-off (end of the thrust).
struct DisturbanceSpec {
  enum class Kind { None, Impulsive, Constant };
  Kind kind = Kind::None;
  Vec3 vector{Vec3::Zero()};  // N
  double t_start = 0.0;       // s after lift-off
  double t_end = 0.2;         // s after lift-off; ignored for Constant

  static DisturbanceSpec impulsive(const Vec3& f, double t_start = 0.0, double duration = 0.2);
  static DisturbanceSpec constant(const Vec3& f);
  /// Force at flight time t (negative during the thrust).
  Vec3 at(double t_flight) const;
  void validate() const;
};

/// Zero-mean Gaussian noise on the measured rates (psi_dot, l1_dot, l2_dot).
struct NoiseSpec {
  Vec3 sigma{Vec3::Zero()};
  std::uint64_t seed = 0;
};

enum class ControllerKind { OpenLoop, Mpc };
enum class Phase { Thrust, Flight, Hold, Contact };
const char* to_string(Phase p);

/// Normal-direction contact used by landing episodes.
///
/// The wheel plane is {p : n.p = wall_offset + standoff}; penetration below it produces
/// max(0, K delta - D v_n) along n.
struct LandingParams {
  double K_L = 60.0;                  // N/m
  std::optional<double> D_L;          // N s/m, critical damping 2 sqrt(K m) when unset
  std::optional<Vec3> wall_normal;    // defaults to the scenario wall normal
  std::optional<double> wall_offset;  // defaults to the scenario wall offset
  std::optional<double> standoff;     // defaults to the target's distance from the wall
  double hold_max = 2.0;              // s of delayed touch-down hold before giving up
  double contact_time = 1.5;          // s simulated after touch-down
};

struct SimOptions {
  double dt_sim = 1e-3;
  ControllerKind controller = ControllerKind::OpenLoop;
  std::optional<MpcConfig> mpc;  // default_mpc_config() when unset
  DisturbanceSpec disturbance;
  NoiseSpec noise;
  std::optional<LandingParams> landing;  // enables touch-down detection and contact
};

struct SimSample {
  double t = 0.0;
  Phase phase = Phase::Thrust;
  ReducedState state;
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
  ControlInput input;  // held over [t, t + dt_sim)
  Vec3 disturbance{Vec3::Zero()};
  double contact_force = 0.0;  // N along the wall normal
};

struct SimEvent {
  std::string name;  // lift_off, touch_down, horizon_end, hold_timeout, degraded_mpc, abort
  double t = 0.0;
};

struct SimTrace {
  std::vector<SimSample> samples;
  std::vector<SimEvent> events;
  Vec3 target{Vec3::Zero()};
  Vec3 landing_error{Vec3::Zero()};  // p_tg - p(end)
  double t_end = 0.0;
  bool aborted = false;
  std::string diagnostic;
  bool early_touch_down = false;
  bool delayed_touch_down = false;
  int mpc_solves = 0;
  int mpc_degraded = 0;
  double max_bound_violation = 0.0;  // applied inputs vs rope/propeller boxes

  const SimEvent* event(const std::string& name) const;
};

/// Closed-loop episode: thrust for t_th, flight to t_f (or touch-down when landing is enabled).
/// Singularities and non-finite states end the episode with aborted = true.
SimTrace run_episode(const JumpPlan& plan, const Scenario& scenario, const SimOptions& options);

/// run_episode() with landing enabled.
SimTrace landing_episode(const JumpPlan& plan, const Scenario& scenario, const LandingParams& landing,
                         SimOptions options = {});

struct RobustnessOptions {
  int n_runs = 100;
  int n_intervals = 10;
  double amplitude_min = 25.0;
  double amplitude_max = 50.0;
  double duration = 0.2;
  NoiseSpec noise{Vec3(0.01, 0.2, 0.2), 0};
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
  SimOptions sim;   // controller and rates; disturbance/noise are overwritten per run
};

struct IntervalStats {
  double t_start = 0.0;
  int runs = 0;
  int failures = 0;
  double mean = 0.0;  // of |e_a| over successful runs
  double stddev = 0.0;
};

struct RobustnessSummary {
  std::vector<IntervalStats> intervals;
  int runs = 0;
  int failures = 0;
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> errors;  // |e_a| per run, NaN for failures
};

/// Impulsive disturbances with random downward-hemisphere directions and uniform amplitudes,
/// starting at the beginning of one of n_intervals equal flight slices (runs cycle through them).
RobustnessSummary batch_robustness(const JumpPlan& plan, const Scenario& scenario,
                                   const RobustnessOptions& options);

}  // namespace ropejump

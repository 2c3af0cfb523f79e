#pragma once

#include <span>
#include <vector>

#include "ropejump/types.hpp"

namespace ropejump {

enum class IntegrationMethod { Euler, RK4 };

/// Fixed-step integration settings for one knot interval.
struct IntegratorConfig {
  IntegrationMethod method = IntegrationMethod::RK4;
  int n_sub = 5;     // equal sub-steps per knot, >= 1
  double dt = 0.05;  // knot interval (s), > 0

  void validate() const;
};

/// Advances the reduced state by cfg.dt holding `u` (and the disturbance) constant.
///
/// Throws SingularityError from the dynamics and NonFiniteError if a sub-step produces NaN/Inf.
ReducedState step(const ReducedState& q, const ControlInput& u, const IntegratorConfig& cfg,
                  const Scenario& scenario, const Vec3& disturbance = Vec3::Zero());

struct Rollout {
  std::vector<ReducedState> states;  // N+1 entries, states[0] = q0
  std::vector<Vec3> positions;       // Cartesian positions of `states`
};

/// Single-shooting propagation of a per-knot input schedule (zero-order hold).
Rollout rollout(const ReducedState& q0, std::span<const ControlInput> schedule,
                const IntegratorConfig& cfg, const Scenario& scenario);

}  // namespace ropejump

#pragma once

#include <span>

#include "ropejump/simulator.hpp"

namespace ropejump {

struct EnergyReport {
  double kinetic = 0.0;  // J, 1/2 m |p_dot(t_th)|^2
  double hoist = 0.0;    // J, integral of |f_l l1_dot| + |f_r l2_dot|
  double total = 0.0;
};

/// Energy of a jump from a simulated trace: lift-off kinetic energy plus hoist work integrated
/// with the trapezoidal rule over thrust and flight (contact and hold phases excluded).
///
/// Throws DomainError when the trace has no lift-off event.
EnergyReport jump_energy(const SimTrace& trace, const Scenario& scenario);

/// Trapezoidal hoist work for sampled rope forces and rates.
double hoist_work(std::span<const double> t, std::span<const double> f_left, std::span<const double> l1_dot,
                  std::span<const double> f_right, std::span<const double> l2_dot);

}  // namespace ropejump

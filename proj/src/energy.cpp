#include "ropejump/energy.hpp"

#include <cmath>
#include <vector>

#include "ropejump/errors.hpp"
#include "ropejump/reduced_model.hpp"

namespace ropejump {

double hoist_work(std::span<const double> t, std::span<const double> f_left, std::span<const double> l1_dot,
                  std::span<const double> f_right, std::span<const double> l2_dot) {
  const std::size_t n = t.size();
  if (f_left.size() != n || l1_dot.size() != n || f_right.size() != n || l2_dot.size() != n)
    throw DomainError("hoist_work: sample arrays differ in length");
  double w = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double a = std::abs(f_left[i - 1] * l1_dot[i - 1]) + std::abs(f_right[i - 1] * l2_dot[i - 1]);
    const double b = std::abs(f_left[i] * l1_dot[i]) + std::abs(f_right[i] * l2_dot[i]);
    w += 0.5 * (a + b) * (t[i] - t[i - 1]);
  }
  return w;
}

EnergyReport jump_energy(const SimTrace& trace, const Scenario& scenario) {
  const SimEvent* lift = trace.event("lift_off");
  if (lift == nullptr) throw DomainError("jump_energy: trace has no lift-off event");
  EnergyReport r;
  std::vector<double> t, fl, l1d, fr, l2d;
  bool have_liftoff = false;
  for (const SimSample& s : trace.samples) {
    if (s.phase == Phase::Hold || s.phase == Phase::Contact) break;
    if (!have_liftoff && std::abs(s.t - lift->t) < 1e-12) {
      r.kinetic = 0.5 * scenario.mass * s.velocity.squaredNorm();
      have_liftoff = true;
    }
    t.push_back(s.t);
    fl.push_back(s.input.f_r_left);
    l1d.push_back(s.state.l1_dot);
    fr.push_back(s.input.f_r_right);
    l2d.push_back(s.state.l2_dot);
  }
  if (!have_liftoff) throw DomainError("jump_energy: no sample at lift-off");
  r.hoist = hoist_work(t, fl, l1d, fr, l2d);
  r.total = r.kinetic + r.hoist;
  return r;
}

}  // namespace ropejump

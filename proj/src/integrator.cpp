#include "ropejump/integrator.hpp"

#include <sstream>

#include "ropejump/errors.hpp"
#include "ropejump/reduced_model.hpp"

namespace ropejump {

namespace {

struct Derivative {
  Vec3 qd;
  Vec3 qdd;
};

Derivative eval(const Vec3& q, const Vec3& qd, const ControlInput& u, const Scenario& scenario,
                const Vec3& disturbance) {
  return {qd, dynamics(ReducedState::from(q, qd), u, scenario, disturbance)};
}

void sub_step(Vec3& q, Vec3& qd, double h, const ControlInput& u, IntegrationMethod method,
              const Scenario& scenario, const Vec3& disturbance) {
  if (method == IntegrationMethod::Euler) {
    const auto k = eval(q, qd, u, scenario, disturbance);
    q += h * k.qd;
    qd += h * k.qdd;
    return;
  }
  const auto k1 = eval(q, qd, u, scenario, disturbance);
  const auto k2 = eval(q + 0.5 * h * k1.qd, qd + 0.5 * h * k1.qdd, u, scenario, disturbance);
  const auto k3 = eval(q + 0.5 * h * k2.qd, qd + 0.5 * h * k2.qdd, u, scenario, disturbance);
  const auto k4 = eval(q + h * k3.qd, qd + h * k3.qdd, u, scenario, disturbance);
  q += h / 6.0 * (k1.qd + 2.0 * k2.qd + 2.0 * k3.qd + k4.qd);
  qd += h / 6.0 * (k1.qdd + 2.0 * k2.qdd + 2.0 * k3.qdd + k4.qdd);
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(dt > 0.0)) throw DomainError("integrator dt must be > 0");
  if (n_sub < 1) throw DomainError("integrator n_sub must be >= 1");
}

ReducedState step(const ReducedState& q0, const ControlInput& u, const IntegratorConfig& cfg,
                  const Scenario& scenario, const Vec3& disturbance) {
  cfg.validate();
  Vec3 q = q0.coords();
  Vec3 qd = q0.rates();
  const double h = cfg.dt / cfg.n_sub;
  for (int i = 0; i < cfg.n_sub; ++i) {
    sub_step(q, qd, h, u, cfg.method, scenario, disturbance);
    if (!q.allFinite() || !qd.allFinite()) throw NonFiniteError("non-finite state in integration", -1);
  }
  return ReducedState::from(q, qd);
}

Rollout rollout(const ReducedState& q0, std::span<const ControlInput> schedule,
                const IntegratorConfig& cfg, const Scenario& scenario) {
  if (schedule.empty()) throw DomainError("rollout needs a non-empty input schedule");
  Rollout out;
  out.states.reserve(schedule.size() + 1);
  out.positions.reserve(schedule.size() + 1);
  out.states.push_back(q0);
  out.positions.push_back(forward_kinematics(q0, scenario));
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    try {
      out.states.push_back(step(out.states.back(), schedule[k], cfg, scenario));
    } catch (const NonFiniteError&) {
      throw NonFiniteError("non-finite state at knot " + std::to_string(k), static_cast<int>(k));
    } catch (const SingularityError& e) {
      throw SingularityError("knot " + std::to_string(k) + ": " + e.what());
    } catch (const DomainError& e) {
      throw DomainError("knot " + std::to_string(k) + ": " + e.what());
    }
    out.positions.push_back(forward_kinematics(out.states.back(), scenario));
  }
  return out;
}

}  // namespace ropejump

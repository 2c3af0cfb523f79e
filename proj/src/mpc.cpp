#include "ropejump/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ropejump/errors.hpp"
#include "ropejump/reduced_model.hpp"

namespace ropejump {

void MpcConfig::validate() const {
  std::vector<std::string> issues;
  if (N_mpc < 2) issues.push_back("N_mpc must be >= 2 (knots)");
  if (!(dt_mpc > 0.0)) issues.push_back("dt_mpc must be > 0 (s)");
  if (!(w_p >= 0.0) || !(w_u >= 0.0) || !(w_pf >= 0.0)) issues.push_back("MPC weights must be >= 0");
  if (!(f_r_max > 0.0)) issues.push_back("f_r_max must be > 0 (N)");
  if (!(f_p_max >= 0.0)) issues.push_back("f_p_max must be >= 0 (N)");
  if (n_sub < 1) issues.push_back("MPC n_sub must be >= 1");
  if (max_iters < 1) issues.push_back("MPC max_iters must be >= 1");
  if (!issues.empty()) throw ConfigError(issues);
}

MpcConfig default_mpc_config(const JumpPlan& plan, const Scenario& scenario) {
  MpcConfig c;
  c.dt_mpc = plan.dt();
  c.N_mpc = std::max(2, static_cast<int>(std::lround(0.4 * plan.knots())));
  c.f_r_max = scenario.f_r_max;
  c.f_p_max = scenario.f_p_max;
  c.method = plan.integrator.method;
  c.n_sub = plan.integrator.n_sub;
  return c;
}

MpcReference make_reference(const JumpPlan& plan, double dt_mpc) {
  MpcReference ref;
  ref.dt = dt_mpc;
  ref.positions = map_plan_to_reference(plan, dt_mpc);
  const int len = static_cast<int>(ref.positions.size()) - 1;
  if (len < 1) throw DomainError("dt_mpc longer than the flight");
  const double dt = plan.dt();
  for (int j = 0; j < len; ++j) {
    const int k = std::min(plan.knots() - 1, static_cast<int>(std::floor(j * dt_mpc / dt + 1e-9)));
    ref.ff_left.push_back(plan.f_r_left[k]);
    ref.ff_right.push_back(plan.f_r_right[k]);
  }
  return ref;
}

ControlInput MpcSolution::input(int i, const MpcReference& ref) const {
  const int j = std::min(k + i, ref.length() - 1);
  return ControlInput{ref.ff_left[j] + dF_left.at(i), ref.ff_right[j] + dF_right.at(i), Vec3::Zero(),
                      f_p.at(i)};
}

int shrink_horizon(int k, int N_mpc, int length) {
  if (k < 0 || k > length) throw DomainError("reference index out of range");
  return std::min(N_mpc, length - k);
}

MpcSolution warm_start_from(const MpcSolution* prev, int horizon) {
  MpcSolution g;
  g.dF_left.assign(horizon, 0.0);
  g.dF_right.assign(horizon, 0.0);
  g.f_p.assign(horizon, 0.0);
  if (prev == nullptr || prev->horizon() == 0) return g;
  g.k = prev->k + 1;
  const int last = prev->horizon() - 1;
  for (int i = 0; i < horizon; ++i) {
    const int j = std::min(i + 1, last);
    g.dF_left[i] = prev->dF_left[j];
    g.dF_right[i] = prev->dF_right[j];
    g.f_p[i] = prev->f_p[j];
  }
  return g;
}

namespace {

// Projects a guess onto the boxes so it is a valid fallback.
void clip(MpcSolution& s, const MpcReference& ref, const MpcConfig& cfg) {
  for (int i = 0; i < s.horizon(); ++i) {
    const int j = std::min(s.k + i, ref.length() - 1);
    s.dF_left[i] = std::clamp(s.dF_left[i], -cfg.f_r_max - ref.ff_left[j], -ref.ff_left[j]);
    s.dF_right[i] = std::clamp(s.dF_right[i], -cfg.f_r_max - ref.ff_right[j], -ref.ff_right[j]);
    s.f_p[i] = std::clamp(s.f_p[i], -cfg.f_p_max, cfg.f_p_max);
  }
}

}  // namespace

double mpc_bound_violation(const MpcSolution& sol, const MpcReference& ref, const MpcConfig& cfg) {
  double v = 0.0;
  for (int i = 0; i < sol.horizon(); ++i) {
    const ControlInput u = sol.input(i, ref);
    for (double f : {u.f_r_left, u.f_r_right}) v = std::max({v, f, -cfg.f_r_max - f});
    v = std::max(v, std::abs(u.f_p) - cfg.f_p_max);
  }
  return v;
}

MpcSolution mpc_step(const ReducedState& x_hat, int k, const MpcReference& ref, const MpcConfig& cfg,
                     const Scenario& scenario, const MpcSolution* warm_start,
                     const std::optional<ControlInput>& previous_input) {
  cfg.validate();
  if (!x_hat.finite()) throw DomainError("MPC: measured state is not finite");
  if (k < 0 || k >= ref.length()) throw DomainError("MPC: reference index out of range");
  const int H = shrink_horizon(k, cfg.N_mpc, ref.length());

  MpcSolution guess = warm_start_from(warm_start, H);
  guess.k = k;
  clip(guess, ref, cfg);

  const double prev_l = previous_input ? previous_input->f_r_left : ref.ff_left[k];
  const double prev_r = previous_input ? previous_input->f_r_right : ref.ff_right[k];
  const double sr = cfg.f_r_max;
  const double sp = cfg.f_p_max;
  const int nv = cfg.f_p_max > 0.0 ? 3 : 2;  // per-knot variables; the propeller drops out when disabled
  const IntegratorConfig icfg{cfg.method, cfg.n_sub, cfg.dt_mpc};

  auto unpack = [&](const VecX& z) {
    MpcSolution s;
    s.k = k;
    s.dF_left.resize(H);
    s.dF_right.resize(H);
    s.f_p.resize(H);
    for (int i = 0; i < H; ++i) {
      s.dF_left[i] = sr * z[nv * i];
      s.dF_right[i] = sr * z[nv * i + 1];
      s.f_p[i] = nv == 3 ? sp * z[nv * i + 2] : 0.0;
    }
    return s;
  };
  auto predict = [&](const MpcSolution& s) {
    std::vector<ControlInput> sched;
    sched.reserve(H);
    for (int i = 0; i < H; ++i) sched.push_back(s.input(i, ref));
    return rollout(x_hat, sched, icfg, scenario).positions;
  };

  const bool terminal = cfg.w_pf > 0.0;
  const int n_res = 3 * H + (terminal ? 3 : 0) + 2 * H;
  NlpProblem prob;
  prob.n = nv * H;
  prob.m = 0;
  prob.lower.resize(prob.n);
  prob.upper.resize(prob.n);
  prob.x0.resize(prob.n);
  for (int i = 0; i < H; ++i) {
    const int j = k + i;
    prob.lower[nv * i] = (-cfg.f_r_max - ref.ff_left[j]) / sr;
    prob.upper[nv * i] = -ref.ff_left[j] / sr;
    prob.lower[nv * i + 1] = (-cfg.f_r_max - ref.ff_right[j]) / sr;
    prob.upper[nv * i + 1] = -ref.ff_right[j] / sr;
    prob.x0[nv * i] = guess.dF_left[i] / sr;
    prob.x0[nv * i + 1] = guess.dF_right[i] / sr;
    if (nv == 3) {
      prob.lower[nv * i + 2] = -1.0;
      prob.upper[nv * i + 2] = 1.0;
      prob.x0[nv * i + 2] = guess.f_p[i] / sp;
    }
  }
  prob.residuals = [&](const VecX& z, VecX& r, VecX& g) {
    const MpcSolution s = unpack(z);
    const std::vector<Vec3> p = predict(s);
    r.resize(n_res);
    g.resize(0);
    int row = 0;
    const double wp = std::sqrt(cfg.w_p);
    for (int i = 1; i <= H; ++i, row += 3) r.segment<3>(row) = wp * (p[i] - ref.positions[k + i]);
    if (terminal) {
      r.segment<3>(row) = std::sqrt(cfg.w_pf) * (p[H] - ref.positions[k + H]);
      row += 3;
    }
    const double wu = std::sqrt(cfg.w_u);
    double last_l = prev_l, last_r = prev_r;
    for (int i = 0; i < H; ++i) {
      const ControlInput u = s.input(i, ref);
      r[row++] = wu * (u.f_r_left - last_l);
      r[row++] = wu * (u.f_r_right - last_r);
      last_l = u.f_r_left;
      last_r = u.f_r_right;
    }
  };
  prob.options.hessian = HessianMode::GaussNewton;
  prob.options.max_iters = cfg.max_iters;
  prob.options.tol_stat = 1e-7;
  prob.options.stall_window = 5;
  prob.options.stall_rtol = 1e-6;

  try {
    const NlpResult res = solve_nlp(prob);
    MpcSolution sol = unpack(res.x);
    clip(sol, ref, cfg);
    sol.status = res.status;
    sol.iterations = res.iterations;
    sol.objective = res.objective;
    sol.predicted = predict(sol);
    return sol;
  } catch (const Error&) {
    guess.degraded = true;
    guess.status = NlpStatus::Infeasible;
    return guess;
  }
}

}  // namespace ropejump

#include "ropejump/planner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ropejump/errors.hpp"
#include "ropejump/reduced_model.hpp"

namespace ropejump {

namespace {

constexpr double kTfMin = 0.2;
constexpr double kTfMax = 10.0;

struct Decoded {
  Vec3 f_leg;
  std::vector<double> fl, fr;
  double t_f = 0.0;
};

struct Trajectory {
  std::vector<ReducedState> states;  // flight knots 0..N
  std::vector<Vec3> positions;
};

ReducedState thrust(const ReducedState& q0, const Vec3& f_leg, double fl, double fr,
                    const Scenario& scenario, const IntegratorConfig& cfg) {
  IntegratorConfig th = cfg;
  th.dt = scenario.t_th;
  return step(q0, ControlInput{fl, fr, f_leg, 0.0}, th, scenario);
}

Trajectory propagate(const ReducedState& q0, const Decoded& d, const Scenario& scenario,
                     IntegratorConfig cfg) {
  const int N = static_cast<int>(d.fl.size());
  Trajectory tr;
  tr.states.reserve(N + 1);
  tr.positions.reserve(N + 1);
  tr.states.push_back(thrust(q0, d.f_leg, d.fl[0], d.fr[0], scenario, cfg));
  tr.positions.push_back(forward_kinematics(tr.states.back(), scenario));
  cfg.dt = d.t_f / N;
  for (int k = 0; k < N; ++k) {
    tr.states.push_back(step(tr.states.back(), ControlInput{d.fl[k], d.fr[k], Vec3::Zero(), 0.0}, cfg, scenario));
    tr.positions.push_back(forward_kinematics(tr.states.back(), scenario));
  }
  return tr;
}

double hoist_term(const Decoded& d, const Trajectory& tr) {
  const int N = static_cast<int>(d.fl.size());
  const double dt = d.t_f / N;
  double w = 0.0;
  for (int k = 0; k < N; ++k) {
    w += (std::abs(d.fl[k] * tr.states[k].l1_dot) + std::abs(d.fr[k] * tr.states[k].l2_dot)) * dt;
  }
  return w;
}

class JumpProblem {
 public:
  JumpProblem(const Vec3& p0, const Vec3& target, const Scenario& scenario, const PlannerWeights& w)
      : p0_(p0), target_(target), s_(scenario), w_(w), frame_(contact_frame(scenario.contact_normal)) {
    q0_ = inverse_kinematics(p0, scenario);
    N_ = w.N;
  }

  // x = (f_leg / f_leg_max, F_l / f_r_max, F_r / f_r_max, t_f, [h_l, h_r] / e_ref).
  // When w_hw > 0 the h block bounds the hoist energy |F l_dot| dt of each interval from
  // above (epigraph form), so the hoist term becomes linear in x.
  bool epigraph() const { return w_.w_hw > 0.0; }
  int n_phys() const { return 2 * N_ + 4; }
  int n() const { return n_phys() + (epigraph() ? 2 * N_ : 0); }
  int m() const { return 1 + N_ * (s_.obstacle ? 2 : 1) + 6 + (epigraph() ? 4 * N_ : 0); }
  const ReducedState& q0() const { return q0_; }

  Decoded decode(const VecX& x) const {
    Decoded d;
    d.f_leg = x.head<3>() * s_.f_leg_max;
    d.fl.resize(N_);
    d.fr.resize(N_);
    for (int k = 0; k < N_; ++k) {
      d.fl[k] = x[3 + k] * s_.f_r_max;
      d.fr[k] = x[3 + N_ + k] * s_.f_r_max;
    }
    d.t_f = x[3 + 2 * N_];
    return d;
  }

  VecX encode(const Vec3& f_leg, double fl, double fr, double t_f) const {
    VecX x = VecX::Zero(n());
    x.head<3>() = f_leg / s_.f_leg_max;
    x.segment(3, N_).setConstant(fl / s_.f_r_max);
    x.segment(3 + N_, N_).setConstant(fr / s_.f_r_max);
    x[3 + 2 * N_] = t_f;
    return x;
  }

  void bounds(VecX& lo, VecX& hi) const {
    lo = VecX::Constant(n(), -1.0);
    hi = VecX::Constant(n(), 1.0);
    lo.segment(3, 2 * N_).setConstant(-1.0);
    hi.segment(3, 2 * N_).setZero();
    lo[3 + 2 * N_] = kTfMin;
    hi[3 + 2 * N_] = kTfMax;
    if (epigraph()) {
      lo.tail(2 * N_).setZero();
      hi.tail(2 * N_).setConstant(1e3);
    }
  }

  // Sets the epigraph block to the hoist power of the trajectory, making its rows feasible.
  void fill_epigraph(VecX& x, const Decoded& d, const Trajectory& tr) const {
    if (!epigraph()) return;
    const double dt = d.t_f / N_;
    for (int k = 0; k < N_; ++k) {
      x[n_phys() + k] = std::abs(d.fl[k] * tr.states[k].l1_dot) * dt / e_ref();
      x[n_phys() + N_ + k] = std::abs(d.fr[k] * tr.states[k].l2_dot) * dt / e_ref();
    }
  }

  // Energy unit of the epigraph block: f_r_max pulling at 1 m/s for 1 s.
  double e_ref() const { return s_.f_r_max; }

  // Linear cost of the epigraph block.
  VecX linear_cost(double cost_scale) const {
    VecX c = VecX::Zero(n());
    if (epigraph()) c.tail(2 * N_).setConstant(w_.w_hw * e_ref() / cost_scale);
    return c;
  }

  int n_residuals() const { return 3 + 2 * (N_ - 1); }

  void residuals(const Decoded& d, const Trajectory& tr, double cost_scale, VecX& r) const {
    r.resize(n_residuals());
    const double sq = 1.0 / std::sqrt(cost_scale);
    r.head<3>() = std::sqrt(w_.w_term) * sq * (tr.positions.back() - target_);
    const double ws = std::sqrt(w_.w_s) * sq;
    for (int k = 1; k < N_; ++k) {
      r[3 + k - 1] = ws * (d.fl[k] - d.fl[k - 1]);
      r[3 + N_ - 1 + k - 1] = ws * (d.fr[k] - d.fr[k - 1]);
    }
  }

  double raw_cost(const VecX& x, const Decoded& d, const Trajectory& tr) const {
    const double e2 = (tr.positions.back() - target_).squaredNorm();
    double smooth = 0.0;
    for (int k = 1; k < N_; ++k) {
      smooth += std::pow(d.fl[k] - d.fl[k - 1], 2) + std::pow(d.fr[k] - d.fr[k - 1], 2);
    }
    double hoist = 0.0;
    if (epigraph()) hoist = x.tail(2 * N_).sum() * e_ref();
    return w_.w_term * e2 + w_.w_s * smooth + w_.w_hw * hoist;
  }

  void constraints(const VecX& x, const Decoded& d, const Trajectory& tr, VecX& g) const {
    g.resize(m());
    int r = 0;
    const double s2 = w_.slack * w_.slack;
    g[r++] = ((tr.positions.back() - target_).squaredNorm() - s2) / s2;
    for (int k = 1; k <= N_; ++k) {
      g[r++] = s_.wall_offset + w_.wall_epsilon - s_.wall_normal.dot(tr.positions[k]);
    }
    if (s_.obstacle) {
      for (int k = 1; k <= N_; ++k) {
        const Vec3& p = tr.positions[k];
        g[r++] = obstacle_min_x(p.y(), p.z(), *s_.obstacle, w_.clearance, s_.wall_offset + w_.wall_epsilon) - p.x();
      }
    }
    const double fn = frame_.n.dot(d.f_leg);
    const double f1 = frame_.t1.dot(d.f_leg);
    const double f2 = frame_.t2.dot(d.f_leg);
    const double scale = s_.f_leg_max;
    g[r++] = (f1 - s_.mu * fn) / scale;
    g[r++] = (-f1 - s_.mu * fn) / scale;
    g[r++] = (f2 - s_.mu * fn) / scale;
    g[r++] = (-f2 - s_.mu * fn) / scale;
    g[r++] = -fn / scale;
    g[r++] = (fn - s_.f_leg_max) / scale;
    if (epigraph()) {
      const double dt = d.t_f / N_;
      for (int k = 0; k < N_; ++k) {
        const double pl = d.fl[k] * tr.states[k].l1_dot * dt / e_ref();
        const double pr = d.fr[k] * tr.states[k].l2_dot * dt / e_ref();
        const double hl = x[n_phys() + k], hr = x[n_phys() + N_ + k];
        g[r++] = pl - hl;
        g[r++] = -pl - hl;
        g[r++] = pr - hr;
        g[r++] = -pr - hr;
      }
    }
  }

  // Initial guess: static pull holding p0, a moderate push along the contact normal.
  VecX initial_guess(double t_f) const {
    const Vec3 p = forward_kinematics(q0_, s_);
    const auto axes = rope_axes(p, s_);
    Eigen::Matrix<double, 3, 2> A;
    A << axes.left, axes.right;
    const Eigen::Vector2d f = A.colPivHouseholderQr().solve(-s_.mass * s_.gravity);
    const double fl = std::clamp(f[0], -s_.f_r_max, 0.0);
    const double fr = std::clamp(f[1], -s_.f_r_max, 0.0);
    return encode(0.3 * s_.f_leg_max * frame_.n, fl, fr, t_f);
  }

  int N() const { return N_; }

 private:
  Vec3 p0_, target_;
  Scenario s_;
  PlannerWeights w_;
  ContactFrame frame_;
  ReducedState q0_;
  int N_;
};

}  // namespace

void PlannerWeights::validate() const {
  std::vector<std::string> issues;
  if (!(w_hw >= 0.0)) issues.push_back("w_hw must be >= 0");
  if (!(w_s >= 0.0)) issues.push_back("w_s must be >= 0");
  if (!(w_term >= 0.0)) issues.push_back("w_term must be >= 0");
  if (!(slack > 0.0)) issues.push_back("slack must be > 0 (m)");
  if (!(clearance >= 0.0)) issues.push_back("clearance must be >= 0 (m)");
  if (N < 10) issues.push_back("N must be >= 10");
  if (!issues.empty()) throw ConfigError(issues);
}

ControlInput JumpPlan::input(int k) const { return ControlInput{f_r_left.at(k), f_r_right.at(k), Vec3::Zero(), 0.0}; }

std::vector<ControlInput> JumpPlan::schedule() const {
  std::vector<ControlInput> out;
  out.reserve(f_r_left.size());
  for (int k = 0; k < knots(); ++k) out.push_back(input(k));
  return out;
}

void replay(JumpPlan& plan, const Scenario& scenario) {
  if (plan.f_r_left.empty() || plan.f_r_left.size() != plan.f_r_right.size())
    throw DomainError("plan rope schedules must be non-empty and of equal length");
  Decoded d{plan.f_leg, plan.f_r_left, plan.f_r_right, plan.t_f};
  plan.q0 = inverse_kinematics(plan.p0, scenario);
  IntegratorConfig cfg = plan.integrator;
  cfg.dt = plan.dt();
  plan.integrator = cfg;
  Trajectory tr = propagate(plan.q0, d, scenario, cfg);
  plan.states = std::move(tr.states);
  plan.positions = std::move(tr.positions);
  plan.terminal_error = (plan.positions.back() - plan.target).norm();
  Trajectory view{plan.states, plan.positions};
  plan.hoist_work = hoist_term(d, view);
}

PlanAudit audit_plan(const JumpPlan& plan, const Scenario& scenario, const PlannerWeights& weights) {
  PlanAudit a;
  auto check = [&](double v, const std::string& what) {
    if (v > a.max_violation) {
      a.max_violation = v;
      a.worst = what;
    }
  };
  JumpPlan copy = plan;
  replay(copy, scenario);
  for (int k = 0; k < copy.knots(); ++k) {
    for (double f : {copy.f_r_left[k], copy.f_r_right[k]}) {
      check(f, "rope force > 0 at knot " + std::to_string(k));
      check(-scenario.f_r_max - f, "rope force < -f_r_max at knot " + std::to_string(k));
    }
  }
  const ContactFrame fr = contact_frame(scenario.contact_normal);
  const double fn = fr.n.dot(copy.f_leg);
  check(-fn, "leg force pulls on the wall");
  check(fn - scenario.f_leg_max, "leg normal force above f_leg_max");
  check(std::abs(fr.t1.dot(copy.f_leg)) - scenario.mu * fn, "leg force outside friction pyramid (t1)");
  check(std::abs(fr.t2.dot(copy.f_leg)) - scenario.mu * fn, "leg force outside friction pyramid (t2)");
  check(kTfMin - copy.t_f, "t_f below lower bound");
  check(copy.t_f - kTfMax, "t_f above upper bound");
  check(copy.terminal_error - weights.slack, "terminal error above slack");
  for (int k = 1; k < static_cast<int>(copy.positions.size()); ++k) {
    const Vec3& p = copy.positions[k];
    const double wall = scenario.wall_offset + weights.wall_epsilon;
    check(wall - scenario.wall_normal.dot(p), "wall constraint at knot " + std::to_string(k));
    if (scenario.obstacle) {
      check(obstacle_min_x(p.y(), p.z(), *scenario.obstacle, weights.clearance, wall) - p.x(),
            "obstacle constraint at knot " + std::to_string(k));
    }
  }
  return a;
}

double obstacle_min_x(double p_y, double p_z, const Ellipsoid& o, double clearance, double wall_offset) {
  const Vec3& R = o.semi_axes;
  const double rx2 = R.x() * R.x();
  const double q = rx2 - rx2 / (R.y() * R.y()) * std::pow(p_y - o.center.y(), 2) -
                   rx2 / (R.z() * R.z()) * std::pow(p_z - o.center.z(), 2);
  if (q > 0.0) return o.center.x() + std::sqrt(q) + clearance;
  return wall_offset;
}

NlpOptions default_planner_options() {
  NlpOptions o;
  o.tol_stat = 1e-5;
  o.hessian = HessianMode::GaussNewton;
  o.max_iters = 300;
  o.stall_window = 10;
  o.stall_rtol = 1e-4;
  return o;
}

JumpPlan plan_jump(const Vec3& p0, const Vec3& target, const Scenario& scenario,
                   const PlannerWeights& weights, const IntegratorConfig& integrator,
                   const NlpOptions& options) {
  scenario.validate();
  weights.validate();
  integrator.validate();
  for (const auto& [name, p] : {std::pair<const char*, Vec3>{"start", p0}, {"target", target}}) {
    if (scenario.wall_normal.dot(p) < scenario.wall_offset) {
      std::ostringstream os;
      os << name << " point (" << p.transpose() << ") lies behind the wall";
      throw InfeasibleTargetError(os.str());
    }
  }
  const double d = scenario.anchor_distance();
  for (const Vec3& p : {p0, target}) {
    const double l1 = (p - scenario.anchor_left).norm();
    const double l2 = (p - scenario.anchor_right).norm();
    if (!(l1 + l2 > d) || std::abs(l1 - l2) >= d)
      throw InfeasibleTargetError("endpoint on the anchor line cannot be reached by the rope model");
  }

  JumpProblem jp(p0, target, scenario, weights);
  const int N = jp.N();

  NlpProblem nlp;
  nlp.n = jp.n();
  nlp.m = jp.m();
  jp.bounds(nlp.lower, nlp.upper);
  nlp.options = options;

  // The rollout depends only on the physical block; caching it makes finite differences
  // over the epigraph block cheap.
  VecX cached_phys;
  Trajectory cached;
  auto trajectory = [&](const VecX& x, const Decoded& dd) -> const Trajectory& {
    const auto phys = x.head(jp.n_phys());
    if (cached_phys.size() != phys.size() || cached_phys != phys) {
      cached_phys.resize(0);
      cached = propagate(jp.q0(), dd, scenario, integrator);
      cached_phys = phys;
    }
    return cached;
  };

  double cost_scale = 1.0;
  nlp.residuals = [&](const VecX& x, VecX& r, VecX& g) {
    const Decoded dd = jp.decode(x);
    const Trajectory& tr = trajectory(x, dd);
    jp.residuals(dd, tr, cost_scale, r);
    jp.constraints(x, dd, tr, g);
  };

  NlpResult best;
  bool have = false;
  std::string failures;
  for (double tf0 : {2.0, 1.2, 3.0}) {
    nlp.x0 = jp.initial_guess(tf0);
    {
      const Decoded dd = jp.decode(nlp.x0);
      try {
        const Trajectory tr = propagate(jp.q0(), dd, scenario, integrator);
        jp.fill_epigraph(nlp.x0, dd, tr);
        cost_scale = std::max(1.0, jp.raw_cost(nlp.x0, dd, tr));
      } catch (const Error&) {
        cost_scale = 1.0;
      }
      nlp.linear_cost = jp.linear_cost(cost_scale);
    }
    NlpResult r;
    try {
      r = solve_nlp(nlp);
    } catch (const SolverError& e) {
      failures += std::string(" [t_f0=") + std::to_string(tf0) + ": " + e.what() + "]";
      continue;
    }
    if (!have || r.max_violation < best.max_violation ||
        (r.max_violation <= options.tol_feas && r.objective < best.objective)) {
      best = r;
      have = true;
    }
    if (r.max_violation <= options.tol_feas && r.status == NlpStatus::Optimal) break;
    failures += std::string(" [t_f0=") + std::to_string(tf0) + ": status " + to_string(r.status) +
                ", violation " + std::to_string(r.max_violation) + "]";
  }
  if (!have) throw SolverError("planner: no attempt could be evaluated:" + failures);

  const Decoded dd = jp.decode(best.x);
  JumpPlan plan;
  plan.p0 = p0;
  plan.target = target;
  plan.f_leg = dd.f_leg;
  // Bounds are enforced exactly by the solver; remove round-off outside [-f_r_max, 0].
  plan.f_r_left.resize(N);
  plan.f_r_right.resize(N);
  for (int k = 0; k < N; ++k) {
    plan.f_r_left[k] = std::clamp(dd.fl[k], -scenario.f_r_max, 0.0);
    plan.f_r_right[k] = std::clamp(dd.fr[k], -scenario.f_r_max, 0.0);
  }
  plan.t_f = dd.t_f;
  plan.t_th = scenario.t_th;
  plan.integrator = integrator;
  plan.status = best.status;
  plan.objective = best.objective * cost_scale;
  plan.kkt_residual = best.kkt_residual;
  plan.max_violation = best.max_violation;
  plan.iterations = best.iterations;
  replay(plan, scenario);

  const PlanAudit audit = audit_plan(plan, scenario, weights);
  if (audit.max_violation > 1e-6) {
    std::ostringstream os;
    os << "planner did not find a feasible jump: status " << to_string(best.status) << ", max violation "
       << audit.max_violation << " (" << audit.worst << "), KKT residual " << best.kkt_residual
       << ", terminal error " << plan.terminal_error << " m" << failures;
    throw SolverError(os.str());
  }
  return plan;
}

std::vector<Vec3> map_plan_to_reference(const JumpPlan& plan, double dt_mpc) {
  if (!(dt_mpc > 0.0)) throw DomainError("dt_mpc must be > 0");
  const double dt = plan.dt();
  const int N = plan.knots();
  const int M = static_cast<int>(std::floor(plan.t_f / dt_mpc + 1e-9));
  std::vector<Vec3> ref;
  ref.reserve(M + 1);
  for (int j = 0; j <= M; ++j) {
    const double s = j * dt_mpc / dt;
    int k = static_cast<int>(std::floor(s + 1e-9));
    if (k >= N) {
      ref.push_back(plan.positions[N]);
      continue;
    }
    const double a = std::clamp(s - k, 0.0, 1.0);
    ref.push_back(a < 1e-9 ? plan.positions[k] : Vec3((1.0 - a) * plan.positions[k] + a * plan.positions[k + 1]));
  }
  return ref;
}

}  // namespace ropejump

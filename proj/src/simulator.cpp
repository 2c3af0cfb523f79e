#include "ropejump/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include "ropejump/errors.hpp"
#include "ropejump/integrator.hpp"
#include "ropejump/reduced_model.hpp"

namespace ropejump {

DisturbanceSpec DisturbanceSpec::impulsive(const Vec3& f, double t_start, double duration) {
  return {Kind::Impulsive, f, t_start, t_start + duration};
}

DisturbanceSpec DisturbanceSpec::constant(const Vec3& f) { return {Kind::Constant, f, 0.0, 0.0}; }

Vec3 DisturbanceSpec::at(double t_flight) const {
  switch (kind) {
    case Kind::None:
      return Vec3::Zero();
    case Kind::Constant:
      return vector;
    case Kind::Impulsive:
      // Half-open window, small guard so a window aligned with the sim grid is not cut short.
      return (t_flight >= t_start - 1e-12 && t_flight < t_end - 1e-12) ? vector : Vec3::Zero();
  }
  return Vec3::Zero();
}

void DisturbanceSpec::validate() const {
  std::vector<std::string> issues;
  if (!vector.allFinite()) issues.push_back("disturbance vector must be finite (N)");
  if (kind == Kind::Impulsive) {
    if (!(t_start >= 0.0)) issues.push_back("impulsive disturbance must start after lift-off (t_start >= 0 s)");
    if (!(t_end > t_start)) issues.push_back("impulsive disturbance window must have t_end > t_start (s)");
  }
  if (!issues.empty()) throw ConfigError(issues);
}

const char* to_string(Phase p) {
  switch (p) {
    case Phase::Thrust: return "thrust";
    case Phase::Flight: return "flight";
    case Phase::Hold: return "hold";
    case Phase::Contact: return "contact";
  }
  return "?";
}

const SimEvent* SimTrace::event(const std::string& name) const {
  for (const auto& e : events)
    if (e.name == name) return &e;
  return nullptr;
}

namespace {

double input_violation(const ControlInput& u, const Scenario& sc) {
  double v = 0.0;
  for (double f : {u.f_r_left, u.f_r_right}) v = std::max({v, f, -sc.f_r_max - f});
  return std::max(v, std::abs(u.f_p) - sc.f_p_max);
}

// Rope magnitudes (clipped to the boxes) whose forces best cancel gravity.
std::pair<double, double> gravity_compensation(const Vec3& p, const Scenario& sc) {
  const RopeAxes ax = rope_axes(p, sc);
  Eigen::Matrix<double, 3, 2> A;
  A << ax.left, ax.right;
  const Eigen::Vector2d f = A.colPivHouseholderQr().solve(-sc.mass * sc.gravity);
  return {std::clamp(f[0], -sc.f_r_max, 0.0), std::clamp(f[1], -sc.f_r_max, 0.0)};
}

class Episode {
 public:
  Episode(const JumpPlan& plan, const Scenario& sc, const SimOptions& opt)
      : plan_(plan), sc_(sc), opt_(opt), rng_(opt.noise.seed) {
    trace_.target = plan.target;
  }

  SimTrace run() {
    try {
      simulate();
    } catch (const Error& e) {
      trace_.aborted = true;
      trace_.diagnostic = e.what();
      trace_.events.push_back({"abort", t_});
    }
    finish();
    return std::move(trace_);
  }

 private:
  void simulate() {
    if (!(opt_.dt_sim > 0.0)) throw DomainError("dt_sim must be > 0");
    opt_.disturbance.validate();
    if (!(opt_.noise.sigma.array() >= 0.0).all()) throw DomainError("noise sigma must be >= 0");
    q_ = plan_.q0;
    if (opt_.landing) setup_landing();

    // Thrust.
    const int n_th = std::max(1, static_cast<int>(std::ceil(plan_.t_th / opt_.dt_sim - 1e-9)));
    const double h_th = plan_.t_th / n_th;
    ControlInput u_th = plan_.input(0);
    u_th.f_leg = plan_.f_leg;
    for (int i = 0; i < n_th; ++i) advance(u_th, h_th, Phase::Thrust);
    t_liftoff_ = t_;
    trace_.events.push_back({"lift_off", t_});

    // Flight.
    const bool mpc = opt_.controller == ControllerKind::Mpc;
    MpcConfig cfg = opt_.mpc ? *opt_.mpc : default_mpc_config(plan_, sc_);
    const double dt_ctrl = mpc ? cfg.dt_mpc : plan_.dt();
    const MpcReference ref = make_reference(plan_, dt_ctrl);
    const int len = ref.length();
    const int n_sub = std::max(1, static_cast<int>(std::ceil(dt_ctrl / opt_.dt_sim - 1e-9)));
    const double h = dt_ctrl / n_sub;
    std::optional<MpcSolution> prev;
    std::optional<ControlInput> applied;
    for (int k = 0; k < len && !touched_; ++k) {
      ControlInput u{ref.ff_left[k], ref.ff_right[k], Vec3::Zero(), 0.0};
      if (mpc) {
        ReducedState meas = q_;
        std::normal_distribution<double> gauss(0.0, 1.0);
        meas.psi_dot += opt_.noise.sigma[0] * gauss(rng_);
        meas.l1_dot += opt_.noise.sigma[1] * gauss(rng_);
        meas.l2_dot += opt_.noise.sigma[2] * gauss(rng_);
        MpcSolution sol = mpc_step(meas, k, ref, cfg, sc_, prev ? &*prev : nullptr, applied);
        ++trace_.mpc_solves;
        if (sol.degraded) {
          ++trace_.mpc_degraded;
          trace_.events.push_back({"degraded_mpc", t_});
          if (applied) u = *applied;
        } else {
          u = sol.input(0, ref);
        }
        prev = std::move(sol);
      }
      applied = u;
      for (int i = 0; i < n_sub && !touched_; ++i) advance(u, h, Phase::Flight);
    }
    if (!touched_) trace_.events.push_back({"horizon_end", t_});
    if (!opt_.landing) return;

    if (!touched_) {
      // Delayed touch-down: last feed-forward plus gravity compensation.
      const double t0 = t_;
      const auto [gl, gr] = gravity_compensation(FK(), sc_);
      const ControlInput hold{std::clamp(ref.ff_left.back() + gl, -sc_.f_r_max, 0.0),
                              std::clamp(ref.ff_right.back() + gr, -sc_.f_r_max, 0.0), Vec3::Zero(), 0.0};
      while (!touched_ && t_ - t0 < landing_.hold_max - 1e-12) advance(hold, opt_.dt_sim, Phase::Hold);
      if (!touched_) {
        trace_.events.push_back({"hold_timeout", t_});
        return;
      }
      trace_.delayed_touch_down = true;
    } else {
      trace_.early_touch_down = t_ < t_liftoff_ + ref.length() * ref.dt - 1e-9;
    }

    const double t0 = t_;
    while (t_ - t0 < landing_.contact_time - 1e-12) {
      const auto [gl, gr] = gravity_compensation(FK(), sc_);
      advance(ControlInput{gl, gr, Vec3::Zero(), 0.0}, opt_.dt_sim, Phase::Contact);
    }
  }

  Vec3 FK() const { return forward_kinematics(q_, sc_); }

  void setup_landing() {
    landing_ = *opt_.landing;
    n_ = landing_.wall_normal ? landing_.wall_normal->normalized() : sc_.wall_normal.normalized();
    offset_ = landing_.wall_offset ? *landing_.wall_offset : sc_.wall_offset;
    standoff_ = landing_.standoff ? *landing_.standoff : n_.dot(plan_.target) - offset_;
    damping_ = landing_.D_L ? *landing_.D_L : 2.0 * std::sqrt(landing_.K_L * sc_.mass);
    if (!(landing_.K_L >= 0.0) || !(damping_ >= 0.0)) throw DomainError("landing gains must be >= 0");
  }

  // Contact force along +n for the current state (zero outside the wheel plane).
  double contact_force(const Vec3& p, const Vec3& v) const {
    const double delta = standoff_ - (n_.dot(p) - offset_);
    if (delta <= 0.0) return 0.0;
    return std::max(0.0, landing_.K_L * delta - damping_ * n_.dot(v));
  }

  void advance(const ControlInput& u, double h, Phase phase) {
    const double t_flight = t_ - t_liftoff_;
    const Vec3 dist = phase == Phase::Thrust && opt_.disturbance.kind != DisturbanceSpec::Kind::Constant
                          ? Vec3::Zero()
                          : opt_.disturbance.at(phase == Phase::Thrust ? -1.0 : t_flight);
    const Vec3 p = FK();
    const Vec3 v = cartesian_velocity(q_, sc_);
    const double fc = phase == Phase::Contact ? contact_force(p, v) : 0.0;
    trace_.samples.push_back({t_, phase, q_, p, v, u, dist, fc});
    trace_.max_bound_violation = std::max(trace_.max_bound_violation, input_violation(u, sc_));

    q_ = step(q_, u, IntegratorConfig{IntegrationMethod::RK4, 1, h}, sc_, dist + fc * n_);
    t_ += h;
    if (opt_.landing && !touched_ && phase != Phase::Thrust) {
      // Armed once the robot has been beyond the wheel plane, so lift-off does not count.
      const double gap = n_.dot(FK()) - offset_;
      if (gap > standoff_) armed_ = true;
      else if (armed_) {
        touched_ = true;
        trace_.events.push_back({"touch_down", t_});
      }
    }
  }

  void finish() {
    if (!trace_.samples.empty()) {
      SimSample last = trace_.samples.back();
      last.t = t_;
      last.state = q_;
      try {
        last.position = FK();
        last.velocity = cartesian_velocity(q_, sc_);
      } catch (const Error&) {
        last.position = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
      }
      last.contact_force = 0.0;
      trace_.samples.push_back(last);
    }
    trace_.t_end = t_;
    // Landing error at touch-down when it happened, else at the end of the flight.
    Vec3 p_end = trace_.samples.empty() ? plan_.p0 : trace_.samples.back().position;
    const double t_mark = [&] {
      if (const SimEvent* e = trace_.event("touch_down")) return e->t;
      if (const SimEvent* e = trace_.event("horizon_end")) return e->t;
      return t_;
    }();
    for (const auto& s : trace_.samples)
      if (std::abs(s.t - t_mark) < 1e-12) p_end = s.position;
    trace_.landing_error = trace_.target - p_end;
  }

  const JumpPlan& plan_;
  const Scenario& sc_;
  SimOptions opt_;
  std::mt19937_64 rng_;
  SimTrace trace_;
  ReducedState q_;
  double t_ = 0.0;
  double t_liftoff_ = 0.0;
  bool touched_ = false;
  bool armed_ = false;
  LandingParams landing_;
  Vec3 n_{Vec3::UnitX()};
  double offset_ = 0.0;
  double standoff_ = 0.0;
  double damping_ = 0.0;
};

}  // namespace

SimTrace run_episode(const JumpPlan& plan, const Scenario& scenario, const SimOptions& options) {
  scenario.validate();
  if (plan.knots() < 1) throw DomainError("plan has no knots");
  return Episode(plan, scenario, options).run();
}

SimTrace landing_episode(const JumpPlan& plan, const Scenario& scenario, const LandingParams& landing,
                         SimOptions options) {
  options.landing = landing;
  return run_episode(plan, scenario, options);
}

RobustnessSummary batch_robustness(const JumpPlan& plan, const Scenario& scenario,
                                   const RobustnessOptions& options) {
  if (options.n_runs < 0 || options.n_intervals < 1) throw DomainError("n_runs must be >= 0 and n_intervals >= 1");
  if (!(options.amplitude_min >= 0.0) || !(options.amplitude_max >= options.amplitude_min))
    throw DomainError("disturbance amplitudes must satisfy 0 <= min <= max");
  scenario.validate();

  const int n = options.n_runs;
  std::vector<double> errors(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<int> slot(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < n; r = next++) {
      // Each run owns a generator derived from (seed, run) so results do not depend on threading.
      std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                        static_cast<std::uint32_t>(r)};
      std::mt19937_64 rng(seq);
      std::uniform_real_distribution<double> uni(0.0, 1.0);
      const int interval = r % options.n_intervals;
      slot[r] = interval;
      const double amp = options.amplitude_min + (options.amplitude_max - options.amplitude_min) * uni(rng);
      // Uniform direction on the lower hemisphere.
      const double z = -uni(rng);
      const double phi = 2.0 * std::numbers::pi * uni(rng);
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      const Vec3 dir(s * std::cos(phi), s * std::sin(phi), z);
      SimOptions sim = options.sim;
      const double t0 = plan.t_f * interval / options.n_intervals;
      sim.disturbance = DisturbanceSpec::impulsive(amp * dir, t0, options.duration);
      sim.noise = options.noise;
      sim.noise.seed = rng();
      try {
        const SimTrace tr = run_episode(plan, scenario, sim);
        if (!tr.aborted) errors[r] = tr.landing_error.norm();
      } catch (const Error&) {
      }
    }
  };
  int threads = options.threads > 0 ? options.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, std::max(n, 1));
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  RobustnessSummary out;
  out.errors = errors;
  out.runs = n;
  auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = sd = 0.0;
    if (v.empty()) return;
    for (double x : v) mean += x;
    mean /= v.size();
    for (double x : v) sd += (x - mean) * (x - mean);
    sd = v.size() > 1 ? std::sqrt(sd / (v.size() - 1)) : 0.0;
  };
  std::vector<double> all;
  for (int i = 0; i < options.n_intervals; ++i) {
    IntervalStats st;
    st.t_start = plan.t_f * i / options.n_intervals;
    std::vector<double> ok;
    for (int r = 0; r < n; ++r) {
      if (slot[r] != i) continue;
      ++st.runs;
      if (std::isnan(errors[r])) ++st.failures;
      else ok.push_back(errors[r]);
    }
    stats(ok, st.mean, st.stddev);
    out.failures += st.failures;
    all.insert(all.end(), ok.begin(), ok.end());
    out.intervals.push_back(st);
  }
  stats(all, out.mean, out.stddev);
  return out;
}

}  // namespace ropejump

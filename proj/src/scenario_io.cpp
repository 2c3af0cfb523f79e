#include "ropejump/scenario_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "ropejump/errors.hpp"
#include "ropejump/reduced_model.hpp"

namespace ropejump {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

const std::vector<SchemaField>& config_schema() {
  static const std::vector<SchemaField> fields = {
      {"preset", "string", "-", "base preset: default, landing or obstacle"},
      {"scenario", "object", "-", "robot, wall and anchors"},
      {"scenario.anchor_left", "vec3", "m", "left anchor (inertial frame origin)"},
      {"scenario.anchor_right", "vec3", "m", "right anchor"},
      {"scenario.mass", "number", "kg", "robot mass"},
      {"scenario.gravity", "vec3", "m/s^2", "gravity vector"},
      {"scenario.wall_normal", "vec3", "-", "unit wall normal, out of the rock"},
      {"scenario.wall_offset", "number", "m", "wall plane offset along the normal"},
      {"scenario.contact_normal", "vec3", "-", "unit contact normal for the static analysis"},
      {"scenario.mu", "number", "-", "friction coefficient"},
      {"scenario.f_leg_max", "number", "N", "leg impulse force bound"},
      {"scenario.f_r_max", "number", "N", "rope force bound"},
      {"scenario.f_p_max", "number", "N", "propeller force bound"},
      {"scenario.t_th", "number", "s", "thrust duration"},
      {"scenario.d_b", "number", "m", "landing wheel spacing"},
      {"scenario.d_w", "number", "m", "wheel clearance from the CoM along the normal"},
      {"scenario.d_h", "number", "m", "rope attachment spacing"},
      {"scenario.wheel_z_offset", "number", "m", "vertical wheel offset from the CoM"},
      {"scenario.obstacle", "object|null", "-", "ellipsoidal obstacle or null"},
      {"scenario.obstacle.center", "vec3", "m", "obstacle centre"},
      {"scenario.obstacle.semi_axes", "vec3", "m", "obstacle semi-axes R_x, R_y, R_z"},
      {"planner", "object", "-", "jump optimization"},
      {"planner.N", "integer", "-", "flight knots"},
      {"planner.w_hw", "number", "1/J", "hoist work weight"},
      {"planner.w_s", "number", "1/N^2", "rope force smoothing weight"},
      {"planner.w_term", "number", "1/m^2", "terminal position weight"},
      {"planner.slack", "number", "m", "terminal position tolerance"},
      {"planner.clearance", "number", "m", "obstacle clearance"},
      {"planner.wall_epsilon", "number", "m", "flat wall margin"},
      {"planner.max_iters", "integer", "-", "SQP iteration limit"},
      {"integrator", "object", "-", "planner integration"},
      {"integrator.method", "string", "-", "rk4 or euler"},
      {"integrator.n_sub", "integer", "-", "sub-steps per knot (>= 1)"},
      {"mpc", "object", "-", "flight controller"},
      {"mpc.N_mpc", "integer", "-", "horizon knots, 0 = round(0.4 N)"},
      {"mpc.dt_mpc", "number", "s", "control period, 0 = plan knot dt"},
      {"mpc.w_p", "number", "1/m^2", "tracking weight"},
      {"mpc.w_u", "number", "1/N^2", "input smoothing weight"},
      {"mpc.w_pf", "number", "1/m^2", "terminal tracking weight"},
      {"mpc.max_iters", "integer", "-", "SQP iterations per control step"},
      {"simulation", "object", "-", "episode settings"},
      {"simulation.dt_sim", "number", "s", "simulation step"},
      {"simulation.controller", "string", "-", "mpc or open-loop"},
      {"disturbance", "object", "-", "external force during the flight"},
      {"disturbance.kind", "string", "-", "none, impulsive or constant"},
      {"disturbance.vector", "vec3", "N", "disturbance force"},
      {"disturbance.t_start", "number", "s", "impulsive start after lift-off"},
      {"disturbance.duration", "number", "s", "impulsive duration"},
      {"noise", "object", "-", "measurement noise on the rates"},
      {"noise.sigma", "vec3", "rad/s, m/s, m/s", "standard deviations of psi_dot, l1_dot, l2_dot"},
      {"noise.seed", "integer", "-", "noise generator seed"},
      {"landing", "object", "-", "touch-down contact model"},
      {"landing.enabled", "bool", "-", "stop at touch-down and simulate the contact"},
      {"landing.K_L", "number", "N/m", "normal stiffness"},
      {"landing.D_L", "number|null", "N s/m", "normal damping, null = critical 2 sqrt(K m)"},
      {"landing.wall_normal", "vec3|null", "-", "actual wall normal, null = scenario wall"},
      {"landing.wall_offset", "number|null", "m", "actual wall offset, null = scenario wall"},
      {"landing.standoff", "number|null", "m", "wheel plane distance from the wall, null = target distance"},
      {"landing.hold_max", "number", "s", "delayed touch-down hold limit"},
      {"landing.contact_time", "number", "s", "simulated time after touch-down"},
      {"heatmap", "object", "-", "feasibility margin grid"},
      {"heatmap.x", "number", "m", "CoM depth of the grid"},
      {"heatmap.y_min", "number", "m", "grid Y start"},
      {"heatmap.y_max", "number", "m", "grid Y end"},
      {"heatmap.ny", "integer", "-", "grid Y cells"},
      {"heatmap.z_min", "number", "m", "grid Z start"},
      {"heatmap.z_max", "number", "m", "grid Z end"},
      {"heatmap.nz", "integer", "-", "grid Z cells"},
      {"heatmap.direction", "vec6", "-", "unit wrench direction (f, m)"},
      {"robustness", "object", "-", "random impulsive disturbance batch"},
      {"robustness.n_runs", "integer", "-", "number of episodes"},
      {"robustness.n_intervals", "integer", "-", "flight slices the disturbance start cycles through"},
      {"robustness.amplitude_min", "number", "N", "smallest disturbance"},
      {"robustness.amplitude_max", "number", "N", "largest disturbance"},
      {"robustness.duration", "number", "s", "disturbance duration"},
      {"robustness.noise_sigma", "vec3", "rad/s, m/s, m/s", "measurement noise per run"},
      {"robustness.seed", "integer", "-", "batch seed"},
      {"jump", "object", "-", "jump endpoints"},
      {"jump.p0", "vec3", "m", "start position on the wall"},
      {"jump.target", "vec3", "m", "target position"},
  };
  return fields;
}

namespace {

const SchemaField* find_field(const std::string& key) {
  for (const auto& f : config_schema())
    if (f.key == key) return &f;
  return nullptr;
}

bool has_type(const SchemaField& f, const std::string& t) {
  std::stringstream ss(f.type);
  std::string part;
  while (std::getline(ss, part, '|'))
    if (part == t) return true;
  return false;
}

void check_keys(const Json& j, const std::string& prefix, std::vector<std::string>& issues) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    const SchemaField* f = find_field(key);
    if (f == nullptr) {
      issues.push_back("unknown key '" + key + "'");
      continue;
    }
    if (has_type(*f, "object")) {
      if (it->is_object()) check_keys(*it, key, issues);
      else if (!(it->is_null() && has_type(*f, "null"))) issues.push_back("'" + key + "' must be an object");
    }
  }
}

Json vec(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

const char* method_name(IntegrationMethod m) { return m == IntegrationMethod::RK4 ? "rk4" : "euler"; }
const char* controller_name(ControllerKind c) { return c == ControllerKind::Mpc ? "mpc" : "open-loop"; }
const char* disturbance_name(DisturbanceSpec::Kind k) {
  switch (k) {
    case DisturbanceSpec::Kind::None: return "none";
    case DisturbanceSpec::Kind::Impulsive: return "impulsive";
    case DisturbanceSpec::Kind::Constant: return "constant";
  }
  return "none";
}

// Typed reader over a fully merged configuration; collects every problem before throwing.
class Reader {
 public:
  explicit Reader(const Json& j) : j_(j) {}

  const Json* at(const std::string& key) const {
    const Json* cur = &j_;
    std::stringstream ss(key);
    std::string part;
    while (std::getline(ss, part, '.')) {
      if (!cur->is_object() || !cur->contains(part)) return nullptr;
      cur = &(*cur)[part];
    }
    return cur;
  }

  std::string unit(const std::string& key) const {
    const SchemaField* f = find_field(key);
    return f && f->unit != "-" ? " (" + f->unit + ")" : "";
  }

  void num(const std::string& key, double& out) {
    const Json* v = at(key);
    if (v && v->is_number()) out = v->get<double>();
    else issues.push_back("'" + key + "' must be a number" + unit(key));
  }
  void opt_num(const std::string& key, std::optional<double>& out) {
    const Json* v = at(key);
    if (v == nullptr || v->is_null()) out.reset();
    else if (v->is_number()) out = v->get<double>();
    else issues.push_back("'" + key + "' must be a number or null" + unit(key));
  }
  template <class I>
  void integer(const std::string& key, I& out) {
    const Json* v = at(key);
    if (v && v->is_number_integer()) out = v->get<I>();
    else if (v && v->is_number_float() && std::floor(v->get<double>()) == v->get<double>()) out = static_cast<I>(v->get<double>());
    else issues.push_back("'" + key + "' must be an integer");
  }
  void boolean(const std::string& key, bool& out) {
    const Json* v = at(key);
    if (v && v->is_boolean()) out = v->get<bool>();
    else issues.push_back("'" + key + "' must be true or false");
  }
  template <int D>
  void vector(const std::string& key, Eigen::Matrix<double, D, 1>& out) {
    const Json* v = at(key);
    if (v && v->is_array() && v->size() == D && std::all_of(v->begin(), v->end(), [](const Json& e) { return e.is_number(); })) {
      for (int i = 0; i < D; ++i) out[i] = (*v)[i].get<double>();
    } else {
      issues.push_back("'" + key + "' must be an array of " + std::to_string(D) + " numbers" + unit(key));
    }
  }
  void opt_vec3(const std::string& key, std::optional<Vec3>& out) {
    const Json* v = at(key);
    if (v == nullptr || v->is_null()) {
      out.reset();
      return;
    }
    Vec3 tmp;
    vector<3>(key, tmp);
    out = tmp;
  }
  std::string choice(const std::string& key, std::initializer_list<const char*> allowed) {
    const Json* v = at(key);
    if (v && v->is_string()) {
      const std::string s = v->get<std::string>();
      for (const char* a : allowed)
        if (s == a) return s;
    }
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
    issues.push_back("'" + key + "' must be one of: " + list);
    return *allowed.begin();
  }

  std::vector<std::string> issues;

 private:
  const Json& j_;
};

RunConfig from_json(const Json& j) {
  RunConfig c;
  Reader r(j);
  if (const Json* p = r.at("preset"); p && p->is_string()) c.preset = p->get<std::string>();
  Scenario& s = c.scenario;
  r.vector<3>("scenario.anchor_left", s.anchor_left);
  r.vector<3>("scenario.anchor_right", s.anchor_right);
  r.num("scenario.mass", s.mass);
  r.vector<3>("scenario.gravity", s.gravity);
  r.vector<3>("scenario.wall_normal", s.wall_normal);
  r.num("scenario.wall_offset", s.wall_offset);
  r.vector<3>("scenario.contact_normal", s.contact_normal);
  r.num("scenario.mu", s.mu);
  r.num("scenario.f_leg_max", s.f_leg_max);
  r.num("scenario.f_r_max", s.f_r_max);
  r.num("scenario.f_p_max", s.f_p_max);
  r.num("scenario.t_th", s.t_th);
  r.num("scenario.d_b", s.d_b);
  r.num("scenario.d_w", s.d_w);
  r.num("scenario.d_h", s.d_h);
  r.num("scenario.wheel_z_offset", s.wheel_z_offset);
  if (const Json* o = r.at("scenario.obstacle"); o && o->is_object()) {
    Ellipsoid e;
    r.vector<3>("scenario.obstacle.center", e.center);
    r.vector<3>("scenario.obstacle.semi_axes", e.semi_axes);
    s.obstacle = e;
  } else {
    s.obstacle.reset();
  }

  r.integer("planner.N", c.planner.N);
  r.num("planner.w_hw", c.planner.w_hw);
  r.num("planner.w_s", c.planner.w_s);
  r.num("planner.w_term", c.planner.w_term);
  r.num("planner.slack", c.planner.slack);
  r.num("planner.clearance", c.planner.clearance);
  r.num("planner.wall_epsilon", c.planner.wall_epsilon);
  r.integer("planner.max_iters", c.planner_max_iters);

  c.integrator.method = r.choice("integrator.method", {"rk4", "euler"}) == "rk4" ? IntegrationMethod::RK4
                                                                                  : IntegrationMethod::Euler;
  r.integer("integrator.n_sub", c.integrator.n_sub);

  r.integer("mpc.N_mpc", c.mpc_N);
  r.num("mpc.dt_mpc", c.mpc_dt);
  r.num("mpc.w_p", c.mpc_w_p);
  r.num("mpc.w_u", c.mpc_w_u);
  r.num("mpc.w_pf", c.mpc_w_pf);
  r.integer("mpc.max_iters", c.mpc_max_iters);

  r.num("simulation.dt_sim", c.dt_sim);
  c.controller = r.choice("simulation.controller", {"mpc", "open-loop"}) == "mpc" ? ControllerKind::Mpc
                                                                                  : ControllerKind::OpenLoop;

  const std::string kind = r.choice("disturbance.kind", {"none", "impulsive", "constant"});
  c.disturbance.kind = kind == "impulsive"  ? DisturbanceSpec::Kind::Impulsive
                       : kind == "constant" ? DisturbanceSpec::Kind::Constant
                                            : DisturbanceSpec::Kind::None;
  r.vector<3>("disturbance.vector", c.disturbance.vector);
  double duration = 0.2;
  r.num("disturbance.t_start", c.disturbance.t_start);
  r.num("disturbance.duration", duration);
  c.disturbance.t_end = c.disturbance.t_start + duration;

  r.vector<3>("noise.sigma", c.noise.sigma);
  r.integer("noise.seed", c.noise.seed);

  r.boolean("landing.enabled", c.landing_enabled);
  r.num("landing.K_L", c.landing.K_L);
  r.opt_num("landing.D_L", c.landing.D_L);
  r.opt_vec3("landing.wall_normal", c.landing.wall_normal);
  r.opt_num("landing.wall_offset", c.landing.wall_offset);
  r.opt_num("landing.standoff", c.landing.standoff);
  r.num("landing.hold_max", c.landing.hold_max);
  r.num("landing.contact_time", c.landing.contact_time);

  r.num("heatmap.x", c.heatmap.x);
  r.num("heatmap.y_min", c.heatmap.y_min);
  r.num("heatmap.y_max", c.heatmap.y_max);
  r.integer("heatmap.ny", c.heatmap.ny);
  r.num("heatmap.z_min", c.heatmap.z_min);
  r.num("heatmap.z_max", c.heatmap.z_max);
  r.integer("heatmap.nz", c.heatmap.nz);
  r.vector<6>("heatmap.direction", c.heatmap_direction);

  r.integer("robustness.n_runs", c.robustness.n_runs);
  r.integer("robustness.n_intervals", c.robustness.n_intervals);
  r.num("robustness.amplitude_min", c.robustness.amplitude_min);
  r.num("robustness.amplitude_max", c.robustness.amplitude_max);
  r.num("robustness.duration", c.robustness.duration);
  r.vector<3>("robustness.noise_sigma", c.robustness.noise.sigma);
  r.integer("robustness.seed", c.robustness.seed);

  r.vector<3>("jump.p0", c.p0);
  r.vector<3>("jump.target", c.target);
  if (!r.issues.empty()) throw ConfigError(r.issues);
  return c;
}

std::string iso_utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << std::setprecision(17);
  return os;
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream os = open_out(path);
  os << j.dump(2) << '\n';
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

Json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw ConfigError({path.string() + ": JSON parse error: " + e.what()});
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig
// ---------------------------------------------------------------------------

void RunConfig::validate() const {
  std::vector<std::string> issues;
  auto collect = [&](auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      issues.insert(issues.end(), e.issues().begin(), e.issues().end());
    } catch (const Error& e) {
      issues.push_back(e.what());
    }
  };
  collect([&] { scenario.validate(); });
  collect([&] { planner.validate(); });
  collect([&] {
    IntegratorConfig ic = integrator;
    ic.dt = 1.0;
    ic.validate();
  });
  collect([&] { disturbance.validate(); });
  collect([&] { heatmap.validate(); });
  if (planner_max_iters < 1) issues.push_back("planner.max_iters must be >= 1");
  if (mpc_N < 0 || mpc_N == 1) issues.push_back("mpc.N_mpc must be 0 (auto) or >= 2");
  if (!(mpc_dt >= 0.0)) issues.push_back("mpc.dt_mpc must be >= 0 (s)");
  if (!(mpc_w_p >= 0.0) || !(mpc_w_u >= 0.0) || !(mpc_w_pf >= 0.0)) issues.push_back("mpc weights must be >= 0");
  if (mpc_max_iters < 1) issues.push_back("mpc.max_iters must be >= 1");
  if (!(dt_sim > 0.0)) issues.push_back("simulation.dt_sim must be > 0 (s)");
  if (!(noise.sigma.array() >= 0.0).all()) issues.push_back("noise.sigma must be >= 0 (rad/s, m/s, m/s)");
  if (!(landing.K_L >= 0.0)) issues.push_back("landing.K_L must be >= 0 (N/m)");
  if (landing.D_L && !(*landing.D_L >= 0.0)) issues.push_back("landing.D_L must be >= 0 (N s/m)");
  if (!(landing.hold_max >= 0.0) || !(landing.contact_time >= 0.0))
    issues.push_back("landing.hold_max and landing.contact_time must be >= 0 (s)");
  if (std::abs(heatmap_direction.norm() - 1.0) > 1e-9) issues.push_back("heatmap.direction must be unit-norm");
  if (robustness.n_runs < 0) issues.push_back("robustness.n_runs must be >= 0");
  if (robustness.n_intervals < 1) issues.push_back("robustness.n_intervals must be >= 1");
  if (!(robustness.amplitude_min >= 0.0) || !(robustness.amplitude_max >= robustness.amplitude_min))
    issues.push_back("robustness amplitudes must satisfy 0 <= amplitude_min <= amplitude_max (N)");
  if (!(robustness.duration > 0.0)) issues.push_back("robustness.duration must be > 0 (s)");
  if (!p0.allFinite() || !target.allFinite()) issues.push_back("jump endpoints must be finite (m)");
  if (!issues.empty()) throw ConfigError(issues);
}

MpcConfig RunConfig::mpc_config(const JumpPlan& plan) const {
  MpcConfig m = default_mpc_config(plan, scenario);
  if (mpc_N > 0) m.N_mpc = mpc_N;
  if (mpc_dt > 0.0) m.dt_mpc = mpc_dt;
  m.w_p = mpc_w_p;
  m.w_u = mpc_w_u;
  m.w_pf = mpc_w_pf;
  m.max_iters = mpc_max_iters;
  return m;
}

SimOptions RunConfig::sim_options() const {
  SimOptions o;
  o.dt_sim = dt_sim;
  o.controller = controller;
  o.disturbance = disturbance;
  o.noise = noise;
  if (landing_enabled) o.landing = landing;
  return o;
}

NlpOptions RunConfig::planner_options() const {
  NlpOptions o = default_planner_options();
  o.max_iters = planner_max_iters;
  return o;
}

std::vector<std::string> preset_names() { return {"default", "landing", "obstacle"}; }

RunConfig preset_config(const std::string& name) {
  RunConfig c;
  c.preset = name;
  c.robustness.noise.sigma = Vec3(0.01, 0.2, 0.2);
  if (name == "default") return c;
  if (name == "landing") {
    c.scenario.mass = 15.0;
    c.scenario.f_leg_max = 600.0;
    c.scenario.f_r_max = 300.0;
    c.landing_enabled = true;
    c.landing.K_L = 60.0;
    c.landing.D_L.reset();
    // Slab inclined by 0.1 rad; both endpoints sit about 0.2 m off the rock.
    const Vec3 n(std::cos(0.1), 0.0, std::sin(0.1));
    c.scenario.wall_normal = n;
    c.scenario.contact_normal = n;
    c.p0 = Vec3(0.8, 2.5, -6.0);
    c.target = Vec3(0.6, 4.0, -4.0);
    return c;
  }
  if (name == "obstacle") {
    c.scenario.obstacle = Ellipsoid{Vec3(-0.5, 2.5, -6.0), Vec3(1.5, 1.5, 0.87)};
    c.planner.clearance = 1.0;
    c.p0 = Vec3(0.5, 0.5, -6.0);
    c.target = Vec3(0.5, 4.5, -6.0);
    return c;
  }
  throw ConfigError({"unknown preset '" + name + "' (expected default, landing or obstacle)"});
}

Json config_to_json(const RunConfig& c) {
  const Scenario& s = c.scenario;
  Json j;
  j["preset"] = c.preset;
  Json& sc = j["scenario"];
  sc["anchor_left"] = vec(s.anchor_left);
  sc["anchor_right"] = vec(s.anchor_right);
  sc["mass"] = s.mass;
  sc["gravity"] = vec(s.gravity);
  sc["wall_normal"] = vec(s.wall_normal);
  sc["wall_offset"] = s.wall_offset;
  sc["contact_normal"] = vec(s.contact_normal);
  sc["mu"] = s.mu;
  sc["f_leg_max"] = s.f_leg_max;
  sc["f_r_max"] = s.f_r_max;
  sc["f_p_max"] = s.f_p_max;
  sc["t_th"] = s.t_th;
  sc["d_b"] = s.d_b;
  sc["d_w"] = s.d_w;
  sc["d_h"] = s.d_h;
  sc["wheel_z_offset"] = s.wheel_z_offset;
  sc["obstacle"] = s.obstacle ? Json{{"center", vec(s.obstacle->center)}, {"semi_axes", vec(s.obstacle->semi_axes)}}
                              : Json(nullptr);
  j["planner"] = {{"N", c.planner.N},
                  {"w_hw", c.planner.w_hw},
                  {"w_s", c.planner.w_s},
                  {"w_term", c.planner.w_term},
                  {"slack", c.planner.slack},
                  {"clearance", c.planner.clearance},
                  {"wall_epsilon", c.planner.wall_epsilon},
                  {"max_iters", c.planner_max_iters}};
  j["integrator"] = {{"method", method_name(c.integrator.method)}, {"n_sub", c.integrator.n_sub}};
  j["mpc"] = {{"N_mpc", c.mpc_N}, {"dt_mpc", c.mpc_dt},   {"w_p", c.mpc_w_p},
              {"w_u", c.mpc_w_u}, {"w_pf", c.mpc_w_pf}, {"max_iters", c.mpc_max_iters}};
  j["simulation"] = {{"dt_sim", c.dt_sim}, {"controller", controller_name(c.controller)}};
  j["disturbance"] = {{"kind", disturbance_name(c.disturbance.kind)},
                      {"vector", vec(c.disturbance.vector)},
                      {"t_start", c.disturbance.t_start},
                      {"duration", c.disturbance.t_end - c.disturbance.t_start}};
  j["noise"] = {{"sigma", vec(c.noise.sigma)}, {"seed", c.noise.seed}};
  const LandingParams& l = c.landing;
  j["landing"] = {{"enabled", c.landing_enabled},
                  {"K_L", l.K_L},
                  {"D_L", l.D_L ? Json(*l.D_L) : Json(nullptr)},
                  {"wall_normal", l.wall_normal ? vec(*l.wall_normal) : Json(nullptr)},
                  {"wall_offset", l.wall_offset ? Json(*l.wall_offset) : Json(nullptr)},
                  {"standoff", l.standoff ? Json(*l.standoff) : Json(nullptr)},
                  {"hold_max", l.hold_max},
                  {"contact_time", l.contact_time}};
  j["heatmap"] = {{"x", c.heatmap.x},         {"y_min", c.heatmap.y_min}, {"y_max", c.heatmap.y_max},
                  {"ny", c.heatmap.ny},       {"z_min", c.heatmap.z_min}, {"z_max", c.heatmap.z_max},
                  {"nz", c.heatmap.nz},       {"direction", vec(c.heatmap_direction)}};
  j["robustness"] = {{"n_runs", c.robustness.n_runs},
                     {"n_intervals", c.robustness.n_intervals},
                     {"amplitude_min", c.robustness.amplitude_min},
                     {"amplitude_max", c.robustness.amplitude_max},
                     {"duration", c.robustness.duration},
                     {"noise_sigma", vec(c.robustness.noise.sigma)},
                     {"seed", c.robustness.seed}};
  j["jump"] = {{"p0", vec(c.p0)}, {"target", vec(c.target)}};
  return j;
}

RunConfig parse_config(const Json& j) {
  if (!j.is_object()) throw ConfigError({"configuration must be a JSON object"});
  std::vector<std::string> issues;
  check_keys(j, "", issues);
  std::string preset = "default";
  if (j.contains("preset")) {
    if (j["preset"].is_string()) preset = j["preset"].get<std::string>();
    else issues.push_back("'preset' must be a string");
  }
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), preset) == names.end())
    issues.push_back("unknown preset '" + preset + "' (expected default, landing or obstacle)");
  if (!issues.empty()) throw ConfigError(issues);
  Json merged = config_to_json(preset_config(preset));
  merged.merge_patch(j);
  // merge_patch deletes keys set to null; restore nullable fields explicitly.
  for (const char* key : {"D_L", "wall_normal", "wall_offset", "standoff"})
    if (j.contains("landing") && j["landing"].contains(key) && j["landing"][key].is_null()) merged["landing"][key] = nullptr;
  if (j.contains("scenario") && j["scenario"].contains("obstacle") && j["scenario"]["obstacle"].is_null())
    merged["scenario"]["obstacle"] = nullptr;
  RunConfig c = from_json(merged);
  c.validate();
  return c;
}

RunConfig load_scenario(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("configuration file '" + path.string() + "' does not exist");
  return parse_config(read_json(path));
}

void apply_override(RunConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError({"override '" + assignment + "' must look like key=value"});
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  const SchemaField* f = find_field(key);
  if (f == nullptr || key == "preset") throw ConfigError({"unknown key '" + key + "'"});
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::parse_error&) {
    value = raw;
  }
  Json j = config_to_json(c);
  Json* cur = &j;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    Json& next = (*cur)[parts[i]];
    if (!next.is_object()) next = Json::object();
    cur = &next;
  }
  (*cur)[parts.back()] = value;
  RunConfig out = from_json(j);
  out.validate();
  c = std::move(out);
}

std::string config_hash(const RunConfig& c) {
  const std::string text = config_to_json(c).dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

Json plan_to_json(const JumpPlan& p) {
  Json j;
  j["p0"] = vec(p.p0);
  j["target"] = vec(p.target);
  j["f_leg"] = vec(p.f_leg);
  j["f_r_left"] = p.f_r_left;
  j["f_r_right"] = p.f_r_right;
  j["t_f"] = p.t_f;
  j["t_th"] = p.t_th;
  j["integrator"] = {{"method", method_name(p.integrator.method)}, {"n_sub", p.integrator.n_sub}};
  j["diagnostics"] = {{"status", to_string(p.status)},     {"objective", p.objective},
                      {"kkt_residual", p.kkt_residual},    {"max_violation", p.max_violation},
                      {"iterations", p.iterations},        {"terminal_error", p.terminal_error},
                      {"hoist_work", p.hoist_work}};
  Json knots = Json::array();
  for (const Vec3& x : p.positions) knots.push_back(vec(x));
  j["positions"] = knots;
  return j;
}

JumpPlan plan_from_json(const Json& j, const Scenario& scenario) {
  try {
    JumpPlan p;
    auto v3 = [](const Json& a) { return Vec3(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()); };
    p.p0 = v3(j.at("p0"));
    p.target = v3(j.at("target"));
    p.f_leg = v3(j.at("f_leg"));
    p.f_r_left = j.at("f_r_left").get<std::vector<double>>();
    p.f_r_right = j.at("f_r_right").get<std::vector<double>>();
    p.t_f = j.at("t_f").get<double>();
    p.t_th = j.at("t_th").get<double>();
    const std::string m = j.at("integrator").at("method").get<std::string>();
    if (m != "rk4" && m != "euler") throw ConfigError({"plan integrator.method must be rk4 or euler"});
    p.integrator.method = m == "rk4" ? IntegrationMethod::RK4 : IntegrationMethod::Euler;
    p.integrator.n_sub = j.at("integrator").at("n_sub").get<int>();
    const Json& d = j.at("diagnostics");
    const std::string st = d.at("status").get<std::string>();
    p.status = st == to_string(NlpStatus::Optimal)    ? NlpStatus::Optimal
               : st == to_string(NlpStatus::MaxIters) ? NlpStatus::MaxIters
                                                      : NlpStatus::Infeasible;
    p.objective = d.at("objective").get<double>();
    p.kkt_residual = d.at("kkt_residual").get<double>();
    p.max_violation = d.at("max_violation").get<double>();
    p.iterations = d.at("iterations").get<int>();
    replay(p, scenario);
    return p;
  } catch (const Json::exception& e) {
    throw ConfigError({std::string("malformed plan: ") + e.what()});
  }
}

void save_plan(const fs::path& path, const JumpPlan& plan, const RunConfig& config) {
  Json j;
  j["format"] = "ropejump-plan-1";
  j["config"] = config_to_json(config);
  j["plan"] = plan_to_json(plan);
  write_json(path, j);
}

JumpPlan load_plan(const fs::path& path, RunConfig& config) {
  const Json j = read_json(path);
  if (!j.is_object() || j.value("format", "") != "ropejump-plan-1")
    throw ConfigError({path.string() + ": not a plan file (format ropejump-plan-1 expected)"});
  config = parse_config(j.at("config"));
  return plan_from_json(j.at("plan"), config.scenario);
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

void write_trace_csv(const fs::path& path, const SimTrace& trace) {
  std::ofstream os = open_out(path);
  write_trace_csv(os, trace);
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

void write_trace_csv(std::ostream& os, const SimTrace& trace) {
  os << std::setprecision(17);
  os << "t,phase,psi,l1,l2,psi_dot,l1_dot,l2_dot,px,py,pz,vx,vy,vz,f_r_left,f_r_right,f_leg_x,f_leg_y,f_leg_z,"
        "f_p,dist_x,dist_y,dist_z,contact_force\n";
  for (const SimSample& s : trace.samples) {
    const ReducedState& q = s.state;
    os << s.t << ',' << to_string(s.phase) << ',' << q.psi << ',' << q.l1 << ',' << q.l2 << ',' << q.psi_dot << ','
       << q.l1_dot << ',' << q.l2_dot << ',' << s.position.x() << ',' << s.position.y() << ',' << s.position.z() << ','
       << s.velocity.x() << ',' << s.velocity.y() << ',' << s.velocity.z() << ',' << s.input.f_r_left << ','
       << s.input.f_r_right << ',' << s.input.f_leg.x() << ',' << s.input.f_leg.y() << ',' << s.input.f_leg.z() << ','
       << s.input.f_p << ',' << s.disturbance.x() << ',' << s.disturbance.y() << ',' << s.disturbance.z() << ','
       << s.contact_force << '\n';
  }
}

Json trace_summary(const SimTrace& t, const Scenario& /*scenario*/) {
  Json events = Json::array();
  for (const auto& e : t.events) events.push_back({{"name", e.name}, {"t", e.t}});
  return {{"landing_error", vec(t.landing_error)},
          {"landing_error_norm", t.landing_error.norm()},
          {"t_end", t.t_end},
          {"aborted", t.aborted},
          {"diagnostic", t.diagnostic},
          {"early_touch_down", t.early_touch_down},
          {"delayed_touch_down", t.delayed_touch_down},
          {"mpc_solves", t.mpc_solves},
          {"mpc_degraded", t.mpc_degraded},
          {"max_bound_violation", t.max_bound_violation},
          {"samples", t.samples.size()},
          {"events", events}};
}

void write_heatmap_csv(const fs::path& path, const std::vector<HeatmapCell>& cells) {
  std::ofstream os = open_out(path);
  os << "y,z,gamma,feasible,error\n";
  for (const auto& c : cells) {
    std::string err = c.error;
    std::replace(err.begin(), err.end(), '"', '\'');
    os << c.y << ',' << c.z << ',' << c.gamma << ',' << (c.feasible ? 1 : 0) << ",\"" << err << "\"\n";
  }
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

void write_robustness_csv(const fs::path& path, const RobustnessSummary& s) {
  std::ofstream os = open_out(path);
  os << "interval,t_start,runs,failures,mean,stddev\n";
  for (std::size_t i = 0; i < s.intervals.size(); ++i) {
    const auto& st = s.intervals[i];
    os << i << ',' << st.t_start << ',' << st.runs << ',' << st.failures << ',' << st.mean << ',' << st.stddev << '\n';
  }
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

OutputWriter::OutputWriter(fs::path dir, std::string command, const RunConfig& config, std::uint64_t seed)
    : dir_(std::move(dir)), command_(std::move(command)), config_(config_to_json(config)), seed_(seed) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) throw IoError("cannot create output directory '" + dir_.string() + "'");
  stem_ = command_ + "_" + config_hash(config) + "_" + std::to_string(seed_);
}

fs::path OutputWriter::path_for(const std::string& name) const { return dir_ / (stem_ + "_" + name); }

void OutputWriter::add(const std::string& name, const std::string& kind) {
  files_.push_back({{"file", path_for(name).filename().string()}, {"kind", kind}});
}

void OutputWriter::add_input(const std::string& path) { inputs_.push_back(path); }

fs::path OutputWriter::finish() {
  Json m;
  m["command"] = command_;
  m["seed"] = seed_;
  m["config_hash"] = stem_.substr(command_.size() + 1, 16);
  m["timestamp"] = iso_utc_now();
  m["inputs"] = inputs_;
  m["outputs"] = files_;
  m["summary"] = summary_;
  m["config"] = config_;
  const fs::path p = path_for("manifest.json");
  write_json(p, m);
  return p;
}

fs::path default_output_dir() {
  if (const char* env = std::getenv("RJ_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return "rj_out";
}

}  // namespace ropejump

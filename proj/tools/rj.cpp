// rj: command-line front end over the ropejump C API.
#include <cmath>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ropejump/ropejump.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Failure {
  rj_status status;
  std::string context;
};

int exit_code(rj_status s) {
  switch (s) {
    case RJ_OK: return kExitOk;
    case RJ_ERR_NULL:
    case RJ_ERR_INVALID_ARGUMENT:
    case RJ_ERR_CONFIG:
    case RJ_ERR_IO: return kExitUsage;
    default: return kExitFailure;
  }
}

void check(rj_status s, const std::string& context) {
  if (s != RJ_OK) throw Failure{s, context};
}

struct ConfigDeleter {
  void operator()(rj_config_t* c) const { rj_config_destroy(c); }
};
struct PlanDeleter {
  void operator()(rj_plan_t* p) const { rj_plan_destroy(p); }
};
struct TraceDeleter {
  void operator()(rj_trace_t* t) const { rj_trace_destroy(t); }
};
struct OutputDeleter {
  void operator()(rj_output_t* o) const { rj_output_destroy(o); }
};
using ConfigPtr = std::unique_ptr<rj_config_t, ConfigDeleter>;
using PlanPtr = std::unique_ptr<rj_plan_t, PlanDeleter>;
using TracePtr = std::unique_ptr<rj_trace_t, TraceDeleter>;
using OutputPtr = std::unique_ptr<rj_output_t, OutputDeleter>;

struct Common {
  std::string config_path;
  std::string preset;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int threads = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  auto* cfg = cmd->add_option("-c,--config", c.config_path, "scenario configuration file (JSON)");
  cmd->add_option("-p,--preset", c.preset, "built-in preset: default, landing, obstacle")->excludes(cfg);
  cmd->add_option("-s,--set", c.overrides, "override a configuration key, e.g. --set scenario.mu=0.6")
      ->allow_extra_args(false);
  cmd->add_option("--seed", c.seed, "seed for noise and random disturbances");
  cmd->add_option("-o,--out", c.out_dir, "output directory (default $RJ_OUTPUT_DIR or ./rj_out)");
  cmd->add_option("-j,--threads", c.threads, "worker threads for batch commands (0 = all cores)");
}

void set(rj_config_t* cfg, const std::string& assignment) { check(rj_config_set(cfg, assignment.c_str()), "--set " + assignment); }

ConfigPtr make_config(const Common& c) {
  rj_config_t* raw = nullptr;
  if (!c.config_path.empty()) check(rj_config_load(c.config_path.c_str(), &raw), c.config_path);
  else check(rj_config_default(c.preset.empty() ? "default" : c.preset.c_str(), &raw), "preset");
  ConfigPtr cfg(raw);
  for (const auto& o : c.overrides) set(cfg.get(), o);
  if (c.seed) {
    set(cfg.get(), "noise.seed=" + std::to_string(*c.seed));
    set(cfg.get(), "robustness.seed=" + std::to_string(*c.seed));
  }
  return cfg;
}

std::string vec_json(const std::string& csv) {
  std::string s = csv;
  if (!s.empty() && s.front() != '[') s = "[" + s + "]";
  return s;
}

OutputPtr open_output(const Common& c, const char* command, rj_config_t* cfg) {
  const std::string dir = c.out_dir.empty() ? rj_default_output_dir() : c.out_dir;
  rj_output_t* raw = nullptr;
  check(rj_output_open(dir.c_str(), command, cfg, c.seed.value_or(0), &raw), dir);
  OutputPtr out(raw);
  if (!c.config_path.empty()) check(rj_output_add_input(out.get(), c.config_path.c_str()), "manifest");
  return out;
}

std::string path_for(rj_output_t* out, const std::string& name) {
  size_t n = 0;
  check(rj_output_path(out, name.c_str(), nullptr, 0, &n), name);
  std::string buf(n, '\0');
  check(rj_output_path(out, name.c_str(), buf.data(), n, &n), name);
  buf.resize(n - 1);
  return buf;
}

std::string finish(rj_output_t* out, const Json& summary) {
  check(rj_output_set_summary(out, summary.dump().c_str()), "summary");
  check(rj_output_close(out, nullptr, 0, nullptr), "manifest");
  return path_for(out, "manifest.json");
}

Json plan_json(const rj_plan_summary_t& s) {
  Json j = {{"status", s.status == 0 ? "optimal" : s.status == 1 ? "max_iters" : "infeasible"},
            {"iterations", s.iterations},
            {"knots", s.knots},
            {"t_f", s.t_f},
            {"t_th", s.t_th},
            {"terminal_error", s.terminal_error},
            {"max_violation", s.max_violation},
            {"kinetic_energy", s.kinetic_energy},
            {"hoist_work", s.hoist_work},
            {"energy", s.energy},
            {"f_leg", {s.f_leg[0], s.f_leg[1], s.f_leg[2]}}};
  if (s.has_obstacle) j["obstacle_clearance"] = s.obstacle_clearance;
  return j;
}

PlanPtr plan_or_load(const std::string& plan_path, rj_config_t* cfg, rj_output_t* out) {
  rj_plan_t* raw = nullptr;
  if (!plan_path.empty()) {
    check(rj_plan_load(plan_path.c_str(), &raw, nullptr), plan_path);
    check(rj_output_add_input(out, plan_path.c_str()), "manifest");
    return PlanPtr(raw);
  }
  std::cerr << "planning jump...\n";
  check(rj_plan_jump(cfg, &raw), "plan");
  PlanPtr plan(raw);
  const std::string p = path_for(out, "plan.json");
  check(rj_plan_save(plan.get(), p.c_str()), p);
  check(rj_output_add(out, "plan.json", "plan"), "manifest");
  return plan;
}

int cmd_plan(const Common& c, const std::string& p0, const std::string& target) {
  ConfigPtr cfg = make_config(c);
  if (!p0.empty()) set(cfg.get(), "jump.p0=" + vec_json(p0));
  if (!target.empty()) set(cfg.get(), "jump.target=" + vec_json(target));
  OutputPtr out = open_output(c, "plan", cfg.get());
  rj_plan_t* raw = nullptr;
  check(rj_plan_jump(cfg.get(), &raw), "plan");
  PlanPtr plan(raw);
  rj_plan_summary_t s{};
  check(rj_plan_summary(plan.get(), &s), "plan summary");
  const std::string p = path_for(out.get(), "plan.json");
  check(rj_plan_save(plan.get(), p.c_str()), p);
  check(rj_output_add(out.get(), "plan.json", "plan"), "manifest");
  const std::string manifest = finish(out.get(), plan_json(s));
  std::printf("terminal error %.4f m  t_f %.3f s  energy %.2f J (kinetic %.2f, hoist %.2f)  iterations %d\n",
              s.terminal_error, s.t_f, s.energy, s.kinetic_energy, s.hoist_work, s.iterations);
  if (s.has_obstacle) std::printf("obstacle clearance %.3e m\n", s.obstacle_clearance);
  std::printf("plan: %s\nmanifest: %s\n", p.c_str(), manifest.c_str());
  return kExitOk;
}

struct TrackFlags {
  std::string plan;
  std::string disturbance;  // kind[:fx,fy,fz]
  double dist_start = 0.0;
  double dist_duration = 0.2;
  std::string controller;
  bool landing = false;
};

void apply_disturbance(rj_config_t* cfg, const std::string& spec, double t0, double dur) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  set(cfg, "disturbance.kind=" + kind);
  if (colon != std::string::npos) set(cfg, "disturbance.vector=" + vec_json(spec.substr(colon + 1)));
  set(cfg, "disturbance.t_start=" + std::to_string(t0));
  set(cfg, "disturbance.duration=" + std::to_string(dur));
}

int cmd_track(const Common& c, const TrackFlags& f) {
  ConfigPtr cfg = make_config(c);
  if (!f.disturbance.empty()) apply_disturbance(cfg.get(), f.disturbance, f.dist_start, f.dist_duration);
  if (!f.controller.empty()) set(cfg.get(), "simulation.controller=" + f.controller);
  if (f.landing) set(cfg.get(), "landing.enabled=true");
  OutputPtr out = open_output(c, "track", cfg.get());
  PlanPtr plan = plan_or_load(f.plan, cfg.get(), out.get());
  rj_trace_t* raw = nullptr;
  check(rj_track(plan.get(), cfg.get(), &raw), "track");
  TracePtr trace(raw);
  rj_trace_summary_t s{};
  check(rj_trace_summary(trace.get(), &s), "trace summary");
  const std::string csv = path_for(out.get(), "trace.csv");
  check(rj_trace_save_csv(trace.get(), csv.c_str()), csv);
  check(rj_output_add(out.get(), "trace.csv", "trace"), "manifest");
  size_t n = 0;
  check(rj_trace_summary_json(trace.get(), nullptr, 0, &n), "summary");
  std::string text(n, '\0');
  check(rj_trace_summary_json(trace.get(), text.data(), n, &n), "summary");
  text.resize(n - 1);
  Json summary = Json::parse(text);
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(s.hash));
  summary["trace_hash"] = hash;
  const std::string manifest = finish(out.get(), summary);
  std::printf("landing error |e_a| %.4f m  (%.4f, %.4f, %.4f)  t_end %.3f s  mpc solves %d degraded %d\n",
              s.landing_error_norm, s.landing_error[0], s.landing_error[1], s.landing_error[2], s.t_end, s.mpc_solves,
              s.mpc_degraded);
  std::printf("max input bound violation %.3e N  trace hash %s\n", s.max_bound_violation, hash);
  std::printf("trace: %s\nmanifest: %s\n", csv.c_str(), manifest.c_str());
  return s.aborted ? kExitFailure : kExitOk;
}

std::string direction_json(const std::string& d) {
  static const std::vector<std::string> names = {"fx", "fy", "fz", "mx", "my", "mz"};
  for (std::size_t i = 0; i < names.size(); ++i) {
    for (const char sign : {'+', '-'}) {
      if (d == std::string(1, sign) + names[i] || (sign == '+' && d == names[i])) {
        std::vector<double> v(6, 0.0);
        v[i] = sign == '-' ? -1.0 : 1.0;
        return Json(v).dump();
      }
    }
  }
  // Explicit components, normalized here for convenience.
  std::vector<double> v;
  std::stringstream ss(d);
  std::string tok;
  while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
  if (v.size() != 6) throw CLI::ValidationError("--direction", "expected +fx..-mz or six comma-separated numbers");
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (!(n > 0.0)) throw CLI::ValidationError("--direction", "direction must be non-zero");
  for (double& x : v) x /= n;
  return Json(v).dump();
}

int cmd_heatmap(const Common& c, const std::string& direction) {
  ConfigPtr cfg = make_config(c);
  if (!direction.empty()) set(cfg.get(), "heatmap.direction=" + direction_json(direction));
  OutputPtr out = open_output(c, "heatmap", cfg.get());
  const std::string csv = path_for(out.get(), "heatmap.csv");
  rj_heatmap_summary_t s{};
  check(rj_heatmap(cfg.get(), c.threads, csv.c_str(), &s), "heatmap");
  check(rj_output_add(out.get(), "heatmap.csv", "heatmap"), "manifest");
  const Json summary = {{"cells", s.cells},
                        {"feasible", s.feasible},
                        {"errors", s.errors},
                        {"gamma_min", s.gamma_min},
                        {"gamma_max", s.gamma_max},
                        {"columns", {"y [m]", "z [m]", "gamma [N or N m]", "feasible [0/1]", "error"}}};
  const std::string manifest = finish(out.get(), summary);
  std::printf("%d cells, %d feasible, margin range [%.4f, %.4f]\n", s.cells, s.feasible, s.gamma_min, s.gamma_max);
  std::printf("heatmap: %s\nmanifest: %s\n", csv.c_str(), manifest.c_str());
  return s.errors > 0 ? kExitFailure : kExitOk;
}

int cmd_bench(const Common& c) {
  ConfigPtr cfg = make_config(c);
  OutputPtr out = open_output(c, "bench-integrators", cfg.get());
  const std::string csv = path_for(out.get(), "bench.csv");
  rj_bench_row_t rows[6];
  size_t count = 0;
  check(rj_bench_integrators(cfg.get(), csv.c_str(), rows, 6, &count), "bench-integrators");
  check(rj_output_add(out.get(), "bench.csv", "table"), "manifest");
  Json table = Json::array();
  std::printf("%4s %6s %6s %6s %9s %10s %10s\n", "N", "method", "n_sub", "iters", "time[s]", "e_i[m]", "e_a[m]");
  bool all_ok = true;
  for (size_t i = 0; i < count; ++i) {
    const rj_bench_row_t& r = rows[i];
    all_ok = all_ok && r.ok;
    std::printf("%4d %6s %6d %6d %9.2f %10.4f %10.4f%s\n", r.N, r.method ? "RK4" : "EUL", r.n_sub, r.iterations,
                r.seconds, r.e_i, r.e_a, r.ok ? "" : "  (failed)");
    table.push_back({{"N", r.N}, {"method", r.method ? "RK4" : "EUL"}, {"n_sub", r.n_sub}, {"iterations", r.iterations},
                     {"seconds", r.seconds}, {"e_i", r.e_i}, {"e_a", r.e_a}, {"ok", r.ok != 0}});
  }
  const std::string manifest = finish(out.get(), {{"rows", table}});
  std::printf("table: %s\nmanifest: %s\n", csv.c_str(), manifest.c_str());
  return all_ok ? kExitOk : kExitFailure;
}

int cmd_robustness(const Common& c, const std::string& plan_path, std::optional<int> n) {
  ConfigPtr cfg = make_config(c);
  if (n) set(cfg.get(), "robustness.n_runs=" + std::to_string(*n));
  OutputPtr out = open_output(c, "robustness", cfg.get());
  PlanPtr plan = plan_or_load(plan_path, cfg.get(), out.get());
  const std::string csv = path_for(out.get(), "robustness.csv");
  rj_robustness_summary_t s{};
  check(rj_robustness(plan.get(), cfg.get(), c.threads, csv.c_str(), &s), "robustness");
  check(rj_output_add(out.get(), "robustness.csv", "stats"), "manifest");
  const Json summary = {{"runs", s.runs}, {"failures", s.failures}, {"mean", s.mean}, {"stddev", s.stddev},
                        {"intervals", s.intervals}};
  const std::string manifest = finish(out.get(), summary);
  std::printf("%d runs, %d failures, |e_a| mean %.4f m, std %.4f m\n", s.runs, s.failures, s.mean, s.stddev);
  std::printf("stats: %s\nmanifest: %s\n", csv.c_str(), manifest.c_str());
  return kExitOk;
}

int cmd_config(const Common& c) {
  ConfigPtr cfg = make_config(c);
  size_t n = 0;
  check(rj_config_json(cfg.get(), nullptr, 0, &n), "config");
  std::string text(n, '\0');
  check(rj_config_json(cfg.get(), text.data(), n, &n), "config");
  text.resize(n - 1);
  std::cout << text << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jump planning, flight control and wall feasibility analysis for a two-rope climbing robot"};
  app.require_subcommand(1);
  app.set_version_flag("--version", rj_version());

  Common common;
  std::string p0, target;
  auto* plan = app.add_subcommand("plan", "optimize a jump and save the plan");
  add_common(plan, common);
  plan->add_option("--p0", p0, "start position x,y,z (m)");
  plan->add_option("--target", target, "target position x,y,z (m)");

  TrackFlags tf;
  auto* track = app.add_subcommand("track", "simulate a plan with the flight controller");
  add_common(track, common);
  track->add_option("--plan", tf.plan, "plan file from 'rj plan' (planned on the fly when omitted)");
  track->add_option("--disturbance", tf.disturbance, "none | constant:fx,fy,fz | impulsive:fx,fy,fz (N)");
  track->add_option("--dist-start", tf.dist_start, "impulsive start after lift-off (s)");
  track->add_option("--dist-duration", tf.dist_duration, "impulsive duration (s)");
  track->add_option("--controller", tf.controller, "mpc | open-loop")->check(CLI::IsMember({"mpc", "open-loop"}));
  track->add_flag("--landing", tf.landing, "simulate touch-down and contact");

  std::string direction;
  auto* heat = app.add_subcommand("heatmap", "feasibility margin over a grid of wall positions");
  add_common(heat, common);
  heat->add_option("--direction", direction, "+fx|-fx|...|-mz or six numbers (normalized)");

  auto* bench = app.add_subcommand("bench-integrators", "integration scheme comparison table");
  add_common(bench, common);

  std::string rplan;
  std::optional<int> runs;
  auto* robust = app.add_subcommand("robustness", "random impulsive disturbance batch");
  add_common(robust, common);
  robust->add_option("--plan", rplan, "plan file (planned on the fly when omitted)");
  robust->add_option("-n,--runs", runs, "number of runs")->check(CLI::NonNegativeNumber);

  auto* config = app.add_subcommand("config", "print the resolved configuration");
  add_common(config, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*plan) return cmd_plan(common, p0, target);
    if (*track) return cmd_track(common, tf);
    if (*heat) return cmd_heatmap(common, direction);
    if (*bench) return cmd_bench(common);
    if (*robust) return cmd_robustness(common, rplan, runs);
    if (*config) return cmd_config(common);
  } catch (const Failure& f) {
    std::cerr << "rj: " << f.context << ": " << rj_status_string(f.status) << ": " << rj_last_error() << '\n';
    return exit_code(f.status);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "rj: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "rj: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

#include "ropejump/ropejump.h"

#include <cstring>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "ropejump/errors.hpp"
#include "ropejump/jobs.hpp"

using namespace ropejump;

struct rj_config {
  RunConfig config;
};

struct rj_plan {
  JumpPlan plan;
  RunConfig config;
};

struct rj_trace {
  SimTrace trace;
  Scenario scenario;
};

struct rj_output {
  std::unique_ptr<OutputWriter> writer;
};

namespace {

thread_local std::string last_error;

rj_status fail(rj_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

std::string join(const std::vector<std::string>& issues) {
  std::string out;
  for (const auto& i : issues) out += (out.empty() ? "" : "; ") + i;
  return out;
}

// Maps library exceptions onto status codes. Order matters: most derived first.
template <class F>
rj_status guarded(F&& fn) {
  try {
    last_error.clear();
    fn();
    return RJ_OK;
  } catch (const ConfigError& e) {
    return fail(RJ_ERR_CONFIG, join(e.issues()));
  } catch (const IoError& e) {
    return fail(RJ_ERR_IO, e.what());
  } catch (const SolverError& e) {
    return fail(RJ_ERR_SOLVER, e.what());
  } catch (const InfeasibleTargetError& e) {
    return fail(RJ_ERR_INFEASIBLE, e.what());
  } catch (const DegenerateGeometryError& e) {
    return fail(RJ_ERR_INFEASIBLE, e.what());
  } catch (const SingularityError& e) {
    return fail(RJ_ERR_SINGULAR, e.what());
  } catch (const NonFiniteError& e) {
    return fail(RJ_ERR_SINGULAR, e.what());
  } catch (const DomainError& e) {
    return fail(RJ_ERR_DOMAIN, e.what());
  } catch (const std::exception& e) {
    return fail(RJ_ERR_EXCEPTION, e.what());
  } catch (...) {
    return fail(RJ_ERR_EXCEPTION, "unknown exception");
  }
}

rj_status copy_string(const std::string& s, char* buf, size_t size, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (buf == nullptr) return needed ? RJ_OK : fail(RJ_ERR_NULL, "buffer and size pointer are both NULL");
  if (size < s.size() + 1) return fail(RJ_ERR_INVALID_ARGUMENT, "buffer too small");
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return RJ_OK;
}

#define RJ_REQUIRE(ptr)                                   \
  do {                                                    \
    if ((ptr) == nullptr) return fail(RJ_ERR_NULL, #ptr " is NULL"); \
  } while (0)

}  // namespace

extern "C" {

const char* rj_version(void) { return "0.1.0"; }

const char* rj_status_string(rj_status s) {
  switch (s) {
    case RJ_OK: return "ok";
    case RJ_ERR_NULL: return "null argument";
    case RJ_ERR_INVALID_ARGUMENT: return "invalid argument";
    case RJ_ERR_CONFIG: return "configuration error";
    case RJ_ERR_IO: return "I/O error";
    case RJ_ERR_SOLVER: return "solver failure";
    case RJ_ERR_INFEASIBLE: return "infeasible";
    case RJ_ERR_SINGULAR: return "singular or non-finite state";
    case RJ_ERR_DOMAIN: return "domain error";
    case RJ_ERR_EXCEPTION: return "internal error";
  }
  return "unknown status";
}

const char* rj_last_error(void) { return last_error.c_str(); }

rj_status rj_config_default(const char* preset, rj_config_t** out) {
  RJ_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new rj_config{preset_config(preset ? preset : "default")}; });
}

rj_status rj_config_load(const char* path, rj_config_t** out) {
  RJ_REQUIRE(path);
  RJ_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new rj_config{load_scenario(path)}; });
}

rj_status rj_config_set(rj_config_t* config, const char* assignment) {
  RJ_REQUIRE(config);
  RJ_REQUIRE(assignment);
  return guarded([&] { apply_override(config->config, assignment); });
}

rj_status rj_config_hash(const rj_config_t* config, char* buf, size_t size) {
  RJ_REQUIRE(config);
  RJ_REQUIRE(buf);
  std::string h;
  const rj_status s = guarded([&] { h = config_hash(config->config); });
  return s == RJ_OK ? copy_string(h, buf, size, nullptr) : s;
}

rj_status rj_config_json(const rj_config_t* config, char* buf, size_t size, size_t* needed) {
  RJ_REQUIRE(config);
  std::string text;
  const rj_status s = guarded([&] { text = config_to_json(config->config).dump(2); });
  return s == RJ_OK ? copy_string(text, buf, size, needed) : s;
}

void rj_config_destroy(rj_config_t* config) { delete config; }

rj_status rj_plan_jump(const rj_config_t* config, rj_plan_t** out) {
  RJ_REQUIRE(config);
  RJ_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new rj_plan{plan_from_config(config->config), config->config}; });
}

rj_status rj_plan_save(const rj_plan_t* plan, const char* path) {
  RJ_REQUIRE(plan);
  RJ_REQUIRE(path);
  return guarded([&] { save_plan(path, plan->plan, plan->config); });
}

rj_status rj_plan_load(const char* path, rj_plan_t** out, rj_config_t** config_out) {
  RJ_REQUIRE(path);
  RJ_REQUIRE(out);
  *out = nullptr;
  if (config_out) *config_out = nullptr;
  return guarded([&] {
    auto p = std::make_unique<rj_plan>();
    p->plan = load_plan(path, p->config);
    if (config_out) *config_out = new rj_config{p->config};
    *out = p.release();
  });
}

rj_status rj_plan_summary(const rj_plan_t* plan, rj_plan_summary_t* out) {
  RJ_REQUIRE(plan);
  RJ_REQUIRE(out);
  return guarded([&] {
    const JumpPlan& p = plan->plan;
    const EnergyReport e = plan_energy(p, plan->config.scenario);
    rj_plan_summary_t s{};
    s.status = static_cast<int>(p.status);
    s.iterations = p.iterations;
    s.knots = p.knots();
    s.t_f = p.t_f;
    s.t_th = p.t_th;
    s.terminal_error = p.terminal_error;
    s.objective = p.objective;
    s.max_violation = p.max_violation;
    s.kinetic_energy = e.kinetic;
    s.hoist_work = e.hoist;
    s.energy = e.total;
    for (int i = 0; i < 3; ++i) s.f_leg[i] = p.f_leg[i];
    const auto c = obstacle_clearance(p, plan->config);
    s.has_obstacle = c.has_value();
    s.obstacle_clearance = c.value_or(std::numeric_limits<double>::quiet_NaN());
    *out = s;
  });
}

void rj_plan_destroy(rj_plan_t* plan) { delete plan; }

rj_status rj_track(const rj_plan_t* plan, const rj_config_t* config, rj_trace_t** out) {
  RJ_REQUIRE(plan);
  RJ_REQUIRE(config);
  RJ_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    config->config.validate();
    *out = new rj_trace{track_plan(plan->plan, config->config), config->config.scenario};
  });
}

rj_status rj_trace_summary(const rj_trace_t* trace, rj_trace_summary_t* out) {
  RJ_REQUIRE(trace);
  RJ_REQUIRE(out);
  return guarded([&] {
    const SimTrace& t = trace->trace;
    rj_trace_summary_t s{};
    for (int i = 0; i < 3; ++i) s.landing_error[i] = t.landing_error[i];
    s.landing_error_norm = t.landing_error.norm();
    s.t_end = t.t_end;
    s.aborted = t.aborted;
    s.early_touch_down = t.early_touch_down;
    s.delayed_touch_down = t.delayed_touch_down;
    s.mpc_solves = t.mpc_solves;
    s.mpc_degraded = t.mpc_degraded;
    s.max_bound_violation = t.max_bound_violation;
    s.samples = t.samples.size();
    std::ostringstream os;
    write_trace_csv(os, t);
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : os.str()) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
    s.hash = h;
    *out = s;
  });
}

rj_status rj_trace_save_csv(const rj_trace_t* trace, const char* path) {
  RJ_REQUIRE(trace);
  RJ_REQUIRE(path);
  return guarded([&] { write_trace_csv(std::filesystem::path(path), trace->trace); });
}

rj_status rj_trace_summary_json(const rj_trace_t* trace, char* buf, size_t size, size_t* needed) {
  RJ_REQUIRE(trace);
  std::string text;
  const rj_status s = guarded([&] { text = trace_summary(trace->trace, trace->scenario).dump(2); });
  return s == RJ_OK ? copy_string(text, buf, size, needed) : s;
}

void rj_trace_destroy(rj_trace_t* trace) { delete trace; }

rj_status rj_heatmap(const rj_config_t* config, int threads, const char* csv_path, rj_heatmap_summary_t* out) {
  RJ_REQUIRE(config);
  return guarded([&] {
    const RunConfig& c = config->config;
    c.validate();
    const auto cells = margin_heatmap(c.heatmap, c.heatmap_direction, c.scenario, threads);
    if (csv_path) write_heatmap_csv(csv_path, cells);
    if (out) {
      rj_heatmap_summary_t s{};
      s.cells = static_cast<int>(cells.size());
      s.gamma_min = std::numeric_limits<double>::infinity();
      s.gamma_max = -std::numeric_limits<double>::infinity();
      for (const auto& cell : cells) {
        if (!cell.error.empty()) ++s.errors;
        if (!cell.feasible) continue;
        ++s.feasible;
        s.gamma_min = std::min(s.gamma_min, cell.gamma);
        s.gamma_max = std::max(s.gamma_max, cell.gamma);
      }
      if (s.feasible == 0) s.gamma_min = s.gamma_max = 0.0;
      *out = s;
    }
  });
}

rj_status rj_bench_integrators(const rj_config_t* config, const char* csv_path, rj_bench_row_t* rows,
                               size_t capacity, size_t* count) {
  RJ_REQUIRE(config);
  const auto cases = default_bench_cases();
  if (rows != nullptr && capacity < cases.size())
    return fail(RJ_ERR_INVALID_ARGUMENT, "rows must hold " + std::to_string(cases.size()) + " entries");
  return guarded([&] {
    config->config.validate();
    const auto result = bench_integrators(config->config, cases);
    if (csv_path) write_bench_csv(csv_path, result);
    if (count) *count = result.size();
    if (rows == nullptr) return;
    for (std::size_t i = 0; i < result.size(); ++i) {
      const BenchRow& r = result[i];
      rows[i] = rj_bench_row_t{r.N,       r.method == IntegrationMethod::RK4 ? 1 : 0,
                               r.n_sub,   r.iterations,
                               r.seconds, r.e_i,
                               r.e_a,     r.error.empty() ? 1 : 0};
    }
  });
}

rj_status rj_robustness(const rj_plan_t* plan, const rj_config_t* config, int threads, const char* csv_path,
                        rj_robustness_summary_t* out) {
  RJ_REQUIRE(plan);
  RJ_REQUIRE(config);
  return guarded([&] {
    config->config.validate();
    const RobustnessSummary s = robustness_batch(plan->plan, config->config, threads);
    if (csv_path) write_robustness_csv(csv_path, s);
    if (out) *out = rj_robustness_summary_t{s.runs, s.failures, s.mean, s.stddev, static_cast<int>(s.intervals.size())};
  });
}

rj_status rj_output_open(const char* dir, const char* command, const rj_config_t* config, uint64_t seed,
                         rj_output_t** out) {
  RJ_REQUIRE(dir);
  RJ_REQUIRE(command);
  RJ_REQUIRE(config);
  RJ_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new rj_output{std::make_unique<OutputWriter>(dir, command, config->config, seed)}; });
}

rj_status rj_output_path(const rj_output_t* output, const char* name, char* buf, size_t size, size_t* needed) {
  RJ_REQUIRE(output);
  RJ_REQUIRE(name);
  return copy_string(output->writer->path_for(name).string(), buf, size, needed);
}

rj_status rj_output_add(rj_output_t* output, const char* name, const char* kind) {
  RJ_REQUIRE(output);
  RJ_REQUIRE(name);
  RJ_REQUIRE(kind);
  return guarded([&] { output->writer->add(name, kind); });
}

rj_status rj_output_add_input(rj_output_t* output, const char* path) {
  RJ_REQUIRE(output);
  RJ_REQUIRE(path);
  return guarded([&] { output->writer->add_input(path); });
}

rj_status rj_output_set_summary(rj_output_t* output, const char* summary_json) {
  RJ_REQUIRE(output);
  RJ_REQUIRE(summary_json);
  return guarded([&] {
    Json j;
    try {
      j = Json::parse(summary_json);
    } catch (const Json::parse_error& e) {
      throw ConfigError({std::string("summary is not valid JSON: ") + e.what()});
    }
    if (!j.is_object()) throw ConfigError({"summary must be a JSON object"});
    output->writer->set_summary(j);
  });
}

rj_status rj_output_close(rj_output_t* output, char* manifest_path, size_t size, size_t* needed) {
  RJ_REQUIRE(output);
  std::string p;
  const rj_status s = guarded([&] { p = output->writer->finish().string(); });
  if (s != RJ_OK) return s;
  if (manifest_path == nullptr && needed == nullptr) return RJ_OK;
  return copy_string(p, manifest_path, size, needed);
}

void rj_output_destroy(rj_output_t* output) { delete output; }

const char* rj_default_output_dir(void) {
  thread_local std::string dir;
  dir = default_output_dir().string();
  return dir.c_str();
}

}  // extern "C"

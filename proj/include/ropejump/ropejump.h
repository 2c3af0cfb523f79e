/* C interface of the ropejump library. Every function returns an rj_status; on failure
 * rj_last_error() describes the problem for the calling thread. Handles are opaque and owned
 * by the caller, who releases them with the matching *_destroy function (NULL is accepted). */
#ifndef ROPEJUMP_H
#define ROPEJUMP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(RJ_BUILDING_LIBRARY)
#define RJ_API __attribute__((visibility("default")))
#else
#define RJ_API
#endif

typedef enum rj_status {
  RJ_OK = 0,
  RJ_ERR_NULL = 1,             /* a required pointer argument was NULL */
  RJ_ERR_INVALID_ARGUMENT = 2,
  RJ_ERR_CONFIG = 3,           /* parse or validation error */
  RJ_ERR_IO = 4,
  RJ_ERR_SOLVER = 5,           /* optimizer failed */
  RJ_ERR_INFEASIBLE = 6,       /* unreachable target or degenerate geometry */
  RJ_ERR_SINGULAR = 7,         /* model singularity or non-finite state */
  RJ_ERR_DOMAIN = 8,
  RJ_ERR_EXCEPTION = 9         /* anything else */
} rj_status;

typedef struct rj_config rj_config_t;
typedef struct rj_plan rj_plan_t;
typedef struct rj_trace rj_trace_t;
typedef struct rj_output rj_output_t;

RJ_API const char* rj_version(void);
RJ_API const char* rj_status_string(rj_status status);
/* Message of the last failing call on this thread ("" when none). */
RJ_API const char* rj_last_error(void);

/* ---- configuration ---- */
RJ_API rj_status rj_config_default(const char* preset, rj_config_t** out);
RJ_API rj_status rj_config_load(const char* path, rj_config_t** out);
/* "dotted.key=value", value parsed as JSON (bare words as strings). */
RJ_API rj_status rj_config_set(rj_config_t* config, const char* assignment);
/* 16 hex digits plus the terminator: buf must hold at least 17 bytes. */
RJ_API rj_status rj_config_hash(const rj_config_t* config, char* buf, size_t size);
/* Canonical JSON. *needed receives the size including the terminator; buf may be NULL. */
RJ_API rj_status rj_config_json(const rj_config_t* config, char* buf, size_t size, size_t* needed);
RJ_API void rj_config_destroy(rj_config_t* config);

/* ---- planning ---- */
typedef struct rj_plan_summary {
  int status; /* 0 optimal, 1 iteration limit, 2 infeasible */
  int iterations;
  int knots;
  double t_f;            /* s, flight time after the thrust */
  double t_th;           /* s */
  double terminal_error; /* m */
  double objective;
  double max_violation;
  double kinetic_energy; /* J */
  double hoist_work;     /* J */
  double energy;         /* J */
  double f_leg[3];       /* N */
  int has_obstacle;
  double obstacle_clearance; /* m, smallest p_x - bound over the knots */
} rj_plan_summary_t;

RJ_API rj_status rj_plan_jump(const rj_config_t* config, rj_plan_t** out);
RJ_API rj_status rj_plan_save(const rj_plan_t* plan, const char* path);
/* config_out may be NULL; otherwise it receives the configuration stored with the plan. */
RJ_API rj_status rj_plan_load(const char* path, rj_plan_t** out, rj_config_t** config_out);
RJ_API rj_status rj_plan_summary(const rj_plan_t* plan, rj_plan_summary_t* out);
RJ_API void rj_plan_destroy(rj_plan_t* plan);

/* ---- tracking ---- */
typedef struct rj_trace_summary {
  double landing_error[3]; /* m, target - position */
  double landing_error_norm;
  double t_end;
  int aborted;
  int early_touch_down;
  int delayed_touch_down;
  int mpc_solves;
  int mpc_degraded;
  double max_bound_violation; /* N */
  size_t samples;
  uint64_t hash; /* FNV-1a over the CSV rendering of the samples */
} rj_trace_summary_t;

/* Simulates `plan` with the controller, disturbance, noise and landing settings of `config`. */
RJ_API rj_status rj_track(const rj_plan_t* plan, const rj_config_t* config, rj_trace_t** out);
RJ_API rj_status rj_trace_summary(const rj_trace_t* trace, rj_trace_summary_t* out);
RJ_API rj_status rj_trace_save_csv(const rj_trace_t* trace, const char* path);
/* JSON summary including the event list; same sizing contract as rj_config_json. */
RJ_API rj_status rj_trace_summary_json(const rj_trace_t* trace, char* buf, size_t size, size_t* needed);
RJ_API void rj_trace_destroy(rj_trace_t* trace);

/* ---- batch analyses (CSV output) ---- */
typedef struct rj_heatmap_summary {
  int cells;
  int feasible;
  int errors;
  double gamma_min; /* over feasible cells */
  double gamma_max;
} rj_heatmap_summary_t;

RJ_API rj_status rj_heatmap(const rj_config_t* config, int threads, const char* csv_path, rj_heatmap_summary_t* out);

typedef struct rj_bench_row {
  int N;
  int method; /* 0 Euler, 1 RK4 */
  int n_sub;
  int iterations;
  double seconds;
  double e_i; /* m */
  double e_a; /* m */
  int ok;
} rj_bench_row_t;

/* Runs the six default cases; rows must hold 6 entries. */
RJ_API rj_status rj_bench_integrators(const rj_config_t* config, const char* csv_path, rj_bench_row_t* rows,
                                      size_t capacity, size_t* count);

typedef struct rj_robustness_summary {
  int runs;
  int failures;
  double mean;   /* m */
  double stddev; /* m */
  int intervals;
} rj_robustness_summary_t;

RJ_API rj_status rj_robustness(const rj_plan_t* plan, const rj_config_t* config, int threads, const char* csv_path,
                               rj_robustness_summary_t* out);

/* ---- output directory ---- */
/* Files are named <command>_<config hash>_<seed>_<name>; rj_output_close writes the manifest. */
RJ_API rj_status rj_output_open(const char* dir, const char* command, const rj_config_t* config, uint64_t seed,
                                rj_output_t** out);
RJ_API rj_status rj_output_path(const rj_output_t* output, const char* name, char* buf, size_t size, size_t* needed);
RJ_API rj_status rj_output_add(rj_output_t* output, const char* name, const char* kind);
RJ_API rj_status rj_output_add_input(rj_output_t* output, const char* path);
/* summary_json must be a JSON object. */
RJ_API rj_status rj_output_set_summary(rj_output_t* output, const char* summary_json);
/* Writes the manifest; the handle stays valid until rj_output_destroy. */
RJ_API rj_status rj_output_close(rj_output_t* output, char* manifest_path, size_t size, size_t* needed);
RJ_API void rj_output_destroy(rj_output_t* output);

/* Default output directory: $RJ_OUTPUT_DIR or "rj_out". */
RJ_API const char* rj_default_output_dir(void);

#ifdef __cplusplus
}
#endif

#endif

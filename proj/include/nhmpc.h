/* Copyright 2026 The nhmpc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface of the nhmpc library: non-holonomic vehicle analysis
 * (Lie-bracket filtration, privileged coordinates, homogeneous nilpotent
 * approximation) and receding-horizon control with tailored stage costs.
 *
 * Conventions:
 *   - Every fallible call returns nhmpc_status; NHMPC_OK is 0. On failure a
 *     thread-local message is available via nhmpc_last_error().
 *   - Text outputs use a query-then-fill protocol: pass buffer = NULL to
 *     receive the required size (including the terminator) in *needed, then
 *     call again with a large enough buffer.
 *   - Objects are created into out-parameters and released with the matching
 *     _destroy function. Destroy functions accept NULL.
 */

#ifndef NHMPC_H_
#define NHMPC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NHMPC_API __declspec(dllexport)
#else
#define NHMPC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nhmpc_status {
  NHMPC_OK = 0,
  NHMPC_ERR_INVALID_ARGUMENT = 1,  /* bad dimensions, null pointers, ranges */
  NHMPC_ERR_PARAMETER = 2,         /* constructor parameter out of range */
  NHMPC_ERR_NOT_CONTROLLABLE = 3,  /* bracket span never reaches full rank */
  NHMPC_ERR_IRREGULAR_POINT = 4,   /* growth vector jumps near the setpoint */
  NHMPC_ERR_AMBIGUOUS_ORDER = 5,   /* derivative magnitude in the dead zone */
  NHMPC_ERR_DIVERGENT_LIMIT = 6,   /* approximation limit does not converge */
  NHMPC_ERR_NOT_POSITIVE_DEFINITE = 7,
  NHMPC_ERR_ROLLOUT_DIVERGED = 8,
  NHMPC_ERR_NO_SOLUTION_FOUND = 9,
  NHMPC_ERR_PARSE = 10,            /* config or CSV syntax error */
  NHMPC_ERR_BUFFER_TOO_SMALL = 11,
  NHMPC_ERR_INTERNAL = 12
} nhmpc_status;

/* Solver outcome per sampling instant (see nhmpc_trace_row). */
typedef enum nhmpc_solve_status {
  NHMPC_SOLVE_CONVERGED = 0,
  NHMPC_SOLVE_MAX_ITER = 1,
  NHMPC_SOLVE_INFEASIBLE_GUESS = 2
} nhmpc_solve_status;

typedef struct nhmpc_model nhmpc_model;
typedef struct nhmpc_analysis nhmpc_analysis;
typedef struct nhmpc_scenario nhmpc_scenario;
typedef struct nhmpc_trace nhmpc_trace;

NHMPC_API const char* nhmpc_version(void);
NHMPC_API const char* nhmpc_status_name(nhmpc_status status);
/* Message of the most recent failure on this thread; never NULL. */
NHMPC_API const char* nhmpc_last_error(void);

/* ------------------------------------------------------------------ models
 * Driftless kinematic vehicles x' = G(x) u. */
NHMPC_API nhmpc_status nhmpc_model_create_unicycle(nhmpc_model** out);
NHMPC_API nhmpc_status nhmpc_model_create_kinematic_car(double wheelbase,
                                                        nhmpc_model** out);
NHMPC_API nhmpc_status nhmpc_model_create_one_trailer(double hitch1,
                                                      nhmpc_model** out);
NHMPC_API nhmpc_status nhmpc_model_create_two_trailer(double hitch1,
                                                      double hitch2,
                                                      nhmpc_model** out);

/* Writes X_i(x) (n_states entries) into out; must be smooth in x. */
typedef void (*nhmpc_field_fn)(int input_index, const double* x, double* out,
                               void* user);
/* Optional analytic Jacobian dX_i/dx, row-major n_states*n_states. Pass NULL
 * to fall back to internal finite differences. */
typedef void (*nhmpc_jacobian_fn)(int input_index, const double* x,
                                  double* jacobian, void* user);

NHMPC_API nhmpc_status nhmpc_model_create_custom(
    int n_states, int n_inputs, nhmpc_field_fn field,
    nhmpc_jacobian_fn jacobian, void* user, const double* u_min,
    const double* u_max, nhmpc_model** out);

NHMPC_API void nhmpc_model_destroy(nhmpc_model* model);
NHMPC_API int nhmpc_model_num_states(const nhmpc_model* model);
NHMPC_API int nhmpc_model_num_inputs(const nhmpc_model* model);

/* Evaluates x' = G(x) u. */
NHMPC_API nhmpc_status nhmpc_model_dynamics(const nhmpc_model* model,
                                            const double* x, const double* u,
                                            double* dx);

/* A state x0 near the origin (|x0| <= eps, x0 != 0) where the quadratic cost
 * x' Q x freezes the closed loop: x0' Q G(x0) = 0. q_diag holds the diagonal
 * of Q (NULL = identity). */
NHMPC_API nhmpc_status nhmpc_find_insufficiency_state(
    const nhmpc_model* model, const double* q_diag, double eps, uint64_t seed,
    double* x0_out);

/* --------------------------------------------------------------- analysis
 * Lie filtration, privileged chart, and homogeneous nilpotent approximation
 * at one setpoint. */
NHMPC_API nhmpc_status nhmpc_analysis_create(const nhmpc_model* model,
                                             const double* setpoint,
                                             nhmpc_analysis** out);
NHMPC_API void nhmpc_analysis_destroy(nhmpc_analysis* analysis);

/* Growth vector (one entry per bracket depth). *count carries the capacity
 * of out on entry and the written length on exit; out may be NULL to query
 * the length alone. */
NHMPC_API nhmpc_status nhmpc_analysis_growth_vector(
    const nhmpc_analysis* analysis, int* out, int* count);
/* Coordinate weights (n_states entries). */
NHMPC_API nhmpc_status nhmpc_analysis_weights(const nhmpc_analysis* analysis,
                                              int* out);
NHMPC_API int nhmpc_analysis_degree(const nhmpc_analysis* analysis);

/* Coordinate maps between original states and privileged coordinates. */
NHMPC_API nhmpc_status nhmpc_analysis_to_privileged(
    const nhmpc_analysis* analysis, const double* x, double* z);
NHMPC_API nhmpc_status nhmpc_analysis_from_privileged(
    const nhmpc_analysis* analysis, const double* z, double* x);

/* Largest dilation-equivariance violation of the extracted approximation
 * over seeded random samples (small = genuinely homogeneous of degree -1). */
NHMPC_API nhmpc_status nhmpc_analysis_homogeneity_residual(
    const nhmpc_analysis* analysis, double* out);

/* Full text report (growth vector, weights, frame, chart, approximation). */
NHMPC_API nhmpc_status nhmpc_analysis_report(const nhmpc_analysis* analysis,
                                             char* buffer, size_t cap,
                                             size_t* needed);

/* --------------------------------------------------------------- scenario
 * Closed-loop experiments described by a config document (sections
 * [vehicle], [setpoint], [initial_state], [cost], [horizon], [solver],
 * [output]). */
NHMPC_API nhmpc_status nhmpc_scenario_create_from_config(
    const char* config_text, nhmpc_scenario** out);
NHMPC_API void nhmpc_scenario_destroy(nhmpc_scenario* scenario);

/* Canonical config echo; reparsing it reproduces the scenario exactly. */
NHMPC_API nhmpc_status nhmpc_scenario_dump_config(
    const nhmpc_scenario* scenario, char* buffer, size_t cap, size_t* needed);

NHMPC_API int nhmpc_scenario_num_states(const nhmpc_scenario* scenario);
NHMPC_API int nhmpc_scenario_num_inputs(const nhmpc_scenario* scenario);
NHMPC_API nhmpc_status nhmpc_scenario_vehicle_name(
    const nhmpc_scenario* scenario, char* buffer, size_t cap, size_t* needed);
NHMPC_API nhmpc_status nhmpc_scenario_setpoint(const nhmpc_scenario* scenario,
                                               double* out);
NHMPC_API nhmpc_status nhmpc_scenario_initial_state(
    const nhmpc_scenario* scenario, double* out);
/* 0 = tailored, 1 = quadratic. */
NHMPC_API int nhmpc_scenario_cost_kind(const nhmpc_scenario* scenario);
NHMPC_API double nhmpc_scenario_dt(const nhmpc_scenario* scenario);
NHMPC_API double nhmpc_scenario_duration(const nhmpc_scenario* scenario);
NHMPC_API int nhmpc_scenario_horizon(const nhmpc_scenario* scenario);
/* Overrides the solver seed from the config (e.g. a CLI flag). */
NHMPC_API nhmpc_status nhmpc_scenario_set_seed(nhmpc_scenario* scenario,
                                               uint64_t seed);
/* Configured output file names; empty strings when not set. which: 0 = csv,
 * 1 = svg. */
NHMPC_API nhmpc_status nhmpc_scenario_output_path(
    const nhmpc_scenario* scenario, int which, char* buffer, size_t cap,
    size_t* needed);
NHMPC_API int nhmpc_scenario_plot_requested(const nhmpc_scenario* scenario);

/* Analysis pipeline at the scenario's setpoint, plus the stage-cost exponent
 * tuples when the scenario uses a tailored cost. */
NHMPC_API nhmpc_status nhmpc_scenario_analyze(const nhmpc_scenario* scenario,
                                              char* buffer, size_t cap,
                                              size_t* needed);

/* ------------------------------------------------------------ closed loop */
NHMPC_API nhmpc_status nhmpc_run_closed_loop(const nhmpc_scenario* scenario,
                                             nhmpc_trace** out);
NHMPC_API void nhmpc_trace_destroy(nhmpc_trace* trace);

NHMPC_API int nhmpc_trace_rows(const nhmpc_trace* trace);
NHMPC_API int nhmpc_trace_num_states(const nhmpc_trace* trace);
NHMPC_API int nhmpc_trace_num_inputs(const nhmpc_trace* trace);
/* 1 when a divergent rollout truncated the run. */
NHMPC_API int nhmpc_trace_diverged(const nhmpc_trace* trace);

/* One sampling instant: time, state (n_states), applied input (n_inputs),
 * value function, solver iterations and status. Any output may be NULL. */
NHMPC_API nhmpc_status nhmpc_trace_row(const nhmpc_trace* trace, int row,
                                       double* time, double* x, double* u,
                                       double* value, int* iterations,
                                       int* solve_status);

/* max_t |x(t) - x(0)|_inf <= tol? Writes 1/0. */
NHMPC_API nhmpc_status nhmpc_trace_stationary(const nhmpc_trace* trace,
                                              double tol, int* out);

/* Value-function monotonicity statistics. Any output may be NULL.
 * stagnant = 1 when the value function never left its initial level. */
NHMPC_API nhmpc_status nhmpc_trace_value_stats(
    const nhmpc_trace* trace, double* max_increase, double* max_rel_increase,
    double* floor_value, double* decrease_ratio, int* stagnant);

/* Comma-separated log, header t,x1..xn,u1..um,V,iters,status. */
NHMPC_API nhmpc_status nhmpc_trace_to_csv(const nhmpc_trace* trace,
                                          char* buffer, size_t cap,
                                          size_t* needed);

/* Plain-text run summary: final deviations per state, stationarity, value
 * statistics, iteration totals. */
NHMPC_API nhmpc_status nhmpc_trace_summary(const nhmpc_trace* trace,
                                           char* buffer, size_t cap,
                                           size_t* needed);

/* Static SVG: plane trajectory with heading glyphs plus log-scale value
 * function. trace_b may be NULL; when given, both traces are overlaid
 * (label_a/label_b name the series). */
NHMPC_API nhmpc_status nhmpc_trace_svg(const nhmpc_trace* trace_a,
                                       const char* label_a,
                                       const nhmpc_trace* trace_b,
                                       const char* label_b, const char* title,
                                       char* buffer, size_t cap,
                                       size_t* needed);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* NHMPC_H_ */

// Copyright 2026 The nhmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// C binding of the nhmpc core. Every entry point is a thin wrapper: convert
// arguments, call the C++ implementation, translate exceptions into status
// codes and a thread-local message. No control logic lives here.

#include "nhmpc.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/cost.hpp"
#include "core/csvio.hpp"
#include "core/liealg.hpp"
#include "core/models.hpp"
#include "core/mpc.hpp"
#include "core/privcoord.hpp"
#include "core/report.hpp"
#include "core/svg.hpp"
#include "core/types.hpp"

struct nhmpc_model {
  nhmpc::VehicleModel m;
};

struct nhmpc_analysis {
  std::unique_ptr<nhmpc::VehicleModel> model;
  std::unique_ptr<nhmpc::LieFiltration> filtration;
  std::unique_ptr<nhmpc::PrivilegedChart> chart;
  nhmpc::HomogeneousApprox approx;
  double residual = 0.0;
};

struct nhmpc_scenario {
  nhmpc::ScenarioConfig config;
  nhmpc::Scenario scenario;
};

struct nhmpc_trace {
  nhmpc::ClosedLoopTrace trace;
  nhmpc::Vec setpoint;
  std::string vehicle;
};

namespace {

using nhmpc::Mat;
using nhmpc::Vec;

thread_local std::string g_last_error = "";

void set_error(const std::string& message) { g_last_error = message; }

template <class Fn>
nhmpc_status guarded(Fn&& fn) noexcept {
  try {
    return fn();
  } catch (const nhmpc::InvalidArgument& e) {
    set_error(e.what());
    return NHMPC_ERR_INVALID_ARGUMENT;
  } catch (const nhmpc::ParameterError& e) {
    set_error(e.what());
    return NHMPC_ERR_PARAMETER;
  } catch (const nhmpc::NotControllableAtDepth& e) {
    set_error(e.what());
    return NHMPC_ERR_NOT_CONTROLLABLE;
  } catch (const nhmpc::IrregularPoint& e) {
    set_error(e.what());
    return NHMPC_ERR_IRREGULAR_POINT;
  } catch (const nhmpc::AmbiguousOrder& e) {
    set_error(e.what());
    return NHMPC_ERR_AMBIGUOUS_ORDER;
  } catch (const nhmpc::DivergentLimit& e) {
    set_error(e.what());
    return NHMPC_ERR_DIVERGENT_LIMIT;
  } catch (const nhmpc::NotPositiveDefinite& e) {
    set_error(e.what());
    return NHMPC_ERR_NOT_POSITIVE_DEFINITE;
  } catch (const nhmpc::RolloutDiverged& e) {
    set_error(e.what());
    return NHMPC_ERR_ROLLOUT_DIVERGED;
  } catch (const nhmpc::NoSolutionFound& e) {
    set_error(e.what());
    return NHMPC_ERR_NO_SOLUTION_FOUND;
  } catch (const nhmpc::ParseError& e) {
    set_error("line " + std::to_string(e.line) + ": " + e.what());
    return NHMPC_ERR_PARSE;
  } catch (const std::exception& e) {
    set_error(e.what());
    return NHMPC_ERR_INTERNAL;
  } catch (...) {
    set_error("unknown failure");
    return NHMPC_ERR_INTERNAL;
  }
}

nhmpc_status fill_text(const std::string& text, char* buffer, size_t cap,
                       size_t* needed) {
  if (needed != nullptr) *needed = text.size() + 1;
  if (buffer == nullptr) return NHMPC_OK;
  if (cap < text.size() + 1) {
    set_error("output buffer too small: need " +
              std::to_string(text.size() + 1) + " bytes");
    return NHMPC_ERR_BUFFER_TOO_SMALL;
  }
  std::memcpy(buffer, text.c_str(), text.size() + 1);
  return NHMPC_OK;
}

void require(bool condition, const char* message) {
  if (!condition) throw nhmpc::InvalidArgument(message);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

// Builds the analysis bundle for a model at a setpoint, with every borrowed
// pointer rewired onto the bundle's own model copy.
std::unique_ptr<nhmpc_analysis> make_analysis(const nhmpc::VehicleModel& model,
                                              const Vec& setpoint) {
  auto a = std::make_unique<nhmpc_analysis>();
  a->model = std::make_unique<nhmpc::VehicleModel>(model);
  a->filtration = std::make_unique<nhmpc::LieFiltration>(
      nhmpc::build_filtration(*a->model, setpoint, 8));
  a->filtration->model = a->model.get();
  a->chart = std::make_unique<nhmpc::PrivilegedChart>(
      nhmpc::build_chart(*a->filtration, *a->model));
  a->chart->model = a->model.get();
  a->chart->filtration.model = a->model.get();
  a->approx = nhmpc::extract_homogeneous_approx(*a->chart, *a->model);
  a->residual = nhmpc::verify_homogeneity(a->approx);
  return a;
}

}  // namespace

extern "C" {

const char* nhmpc_version(void) { return "0.1.0"; }

const char* nhmpc_status_name(nhmpc_status status) {
  switch (status) {
    case NHMPC_OK:
      return "ok";
    case NHMPC_ERR_INVALID_ARGUMENT:
      return "invalid_argument";
    case NHMPC_ERR_PARAMETER:
      return "parameter_error";
    case NHMPC_ERR_NOT_CONTROLLABLE:
      return "not_controllable";
    case NHMPC_ERR_IRREGULAR_POINT:
      return "irregular_point";
    case NHMPC_ERR_AMBIGUOUS_ORDER:
      return "ambiguous_order";
    case NHMPC_ERR_DIVERGENT_LIMIT:
      return "divergent_limit";
    case NHMPC_ERR_NOT_POSITIVE_DEFINITE:
      return "not_positive_definite";
    case NHMPC_ERR_ROLLOUT_DIVERGED:
      return "rollout_diverged";
    case NHMPC_ERR_NO_SOLUTION_FOUND:
      return "no_solution_found";
    case NHMPC_ERR_PARSE:
      return "parse_error";
    case NHMPC_ERR_BUFFER_TOO_SMALL:
      return "buffer_too_small";
    case NHMPC_ERR_INTERNAL:
      return "internal_error";
  }
  return "unknown";
}

const char* nhmpc_last_error(void) { return g_last_error.c_str(); }

// --------------------------------------------------------------------- model

nhmpc_status nhmpc_model_create_unicycle(nhmpc_model** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    *out = new nhmpc_model{nhmpc::make_unicycle()};
    return NHMPC_OK;
  });
}

nhmpc_status nhmpc_model_create_kinematic_car(double wheelbase,
                                              nhmpc_model** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    *out = new nhmpc_model{nhmpc::make_kinematic_car(wheelbase)};
    return NHMPC_OK;
  });
}

nhmpc_status nhmpc_model_create_one_trailer(double hitch1, nhmpc_model** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    *out = new nhmpc_model{nhmpc::make_one_trailer(hitch1)};
    return NHMPC_OK;
  });
}

nhmpc_status nhmpc_model_create_two_trailer(double hitch1, double hitch2,
                                            nhmpc_model** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    *out = new nhmpc_model{nhmpc::make_two_trailer(hitch1, hitch2)};
    return NHMPC_OK;
  });
}

nhmpc_status nhmpc_model_create_custom(int n_states, int n_inputs,
                                       nhmpc_field_fn field,
                                       nhmpc_jacobian_fn jacobian, void* user,
                                       const double* u_min,
                                       const double* u_max,
                                       nhmpc_model** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    require(field != nullptr, "field callback must not be null");
    require(n_states >= 1 && n_inputs >= 1, "dimensions must be positive");
    require((u_min == nullptr) == (u_max == nullptr),
            "u_min and u_max must be given together");
    std::vector<nhmpc::Interval> bounds(n_inputs, {-1.0, 1.0});
    if (u_min != nullptr) {
      for (int j = 0; j < n_inputs; ++j) bounds[j] = {u_min[j], u_max[j]};
    }
    std::function<void(int, const double*, double*)> jac;
    if (jacobian != nullptr) {
      jac = [jacobian, user](int i, const double* x, double* j) {
        jacobian(i, x, j, user);
      };
    }
    *out = new nhmpc_model{nhmpc::make_custom(
        "custom", n_states, n_inputs,
        [field, user](int i, const double* x, double* dx) {
          field(i, x, dx, user);
        },
        jac, bounds)};
    return NHMPC_OK;
  });
}

void nhmpc_model_destroy(nhmpc_model* model) { delete model; }

int nhmpc_model_num_states(const nhmpc_model* model) {
  return model == nullptr ? 0 : model->m.n_x;
}

int nhmpc_model_num_inputs(const nhmpc_model* model) {
  return model == nullptr ? 0 : model->m.n_u;
}

nhmpc_status nhmpc_model_dynamics(const nhmpc_model* model, const double* x,
                                  const double* u, double* dx) {
  return guarded([&] {
    require(model != nullptr && x != nullptr && u != nullptr && dx != nullptr,
            "model, x, u, dx must not be null");
    const Vec xv = Eigen::Map<const Vec>(x, model->m.n_x);
    const Vec uv = Eigen::Map<const Vec>(u, model->m.n_u);
    const Vec r = nhmpc::dynamics(model->m, xv, uv);
    Eigen::Map<Vec>(dx, model->m.n_x) = r;
    return NHMPC_OK;
  });
}

nhmpc_status nhmpc_find_insufficiency_state(const nhmpc_model* model,
                                            const double* q_diag, double eps,
                                            uint64_t seed, double* x0_out) {
  return guarded([&] {
    require(model != nullptr && x0_out != nullptr,
            "model and x0_out must not be null");
    const int n = model->m.n_x;
    Mat Q = Mat::Identity(n, n);
    if (q_diag != nullptr) {
      for (int i = 0; i < n; ++i) Q(i, i) = q_diag[i];
    }
    const Vec x0 = nhmpc::find_insufficiency_state(model->m, Q, eps, seed);
    Eigen::Map<Vec>(x0_out, n) = x0;
    return NHMPC_OK;
  });
}

// ------------------------------------------------------------------ analysis

nhmpc_status nhmpc_analysis_create(const nhmpc_model* model,
                                   const double* setpoint,
                                   nhmpc_analysis** out) {
  return guarded([&] {
    require(model != nullptr && setpoint != nullptr && out != nullptr,
            "model, setpoint, out must not be null");
    const Vec d = Eigen::Map<const Vec>(setpoint, model->m.n_x);
    *out = make_analysis(model->m, d).release();
    return NHMPC_OK;
  });
}

void nhmpc_analysis_destroy(nhmpc_analysis* analysis) { delete analysis; }

nhmpc_status nhmpc_analysis_growth_vector(const nhmpc_analysis* analysis,
                                          int* out, int* count) {
  return guarded([&] {
    require(analysis != nullptr && count != nullptr,
            "analysis and count must not be null");
    const auto& growth = analysis->filtration->growth;
    const int len = static_cast<int>(growth.size());
    const int cap = *count;
    *count = len;
    if (out == nullptr) return NHMPC_OK;
    if (cap < len) {
      set_error("growth vector needs " + std::to_string(len) + " entries");
      return NHMPC_ERR_BUFFER_TOO_SMALL;
    }
    for (int i = 0; i < len; ++i) out[i] = growth[i];
    return NHMPC_OK;
  });
}

nhmpc_status nhmpc_analysis_weights(const nhmpc_analysis* analysis, int* out) {
  return guarded([&] {
    require(analysis != nullptr && out != nullptr,
            "analysis and out must not be null");
    const auto& weights = analysis->filtration->weights;
    for (size_t i = 0; i < weights.size(); ++i)
      out[i] = weights[i];
    return NHMPC_OK;
  });
}

int nhmpc_analysis_degree(const nhmpc_analysis* analysis) {
  return analysis == nullptr ? 0 : analysis->filtration->degree;
}

nhmpc_status nhmpc_analysis_to_privileged(const nhmpc_analysis* analysis,
                                          const double* x, double* z) {
  return guarded([&] {
    require(analysis != nullptr && x != nullptr && z != nullptr,
            "analysis, x, z must not be null");
    const int n = analysis->model->n_x;
    const Vec zv =
        analysis->chart->to_privileged(Eigen::Map<const Vec>(x, n));
    Eigen::Map<Vec>(z, n) = zv;
    return NHMPC_OK;
  });
}

nhmpc_status nhmpc_analysis_from_privileged(const nhmpc_analysis* analysis,
                                            const double* z, double* x) {
  return guarded([&] {
    require(analysis != nullptr && z != nullptr && x != nullptr,
            "analysis, z, x must not be null");
    const int n = analysis->model->n_x;
    const Vec xv =
        analysis->chart->from_privileged(Eigen::Map<const Vec>(z, n));
    Eigen::Map<Vec>(x, n) = xv;
    return NHMPC_OK;
  });
}

nhmpc_status nhmpc_analysis_homogeneity_residual(
    const nhmpc_analysis* analysis, double* out) {
  return guarded([&] {
    require(analysis != nullptr && out != nullptr,
            "analysis and out must not be null");
    *out = analysis->residual;
    return NHMPC_OK;
  });
}

nhmpc_status nhmpc_analysis_report(const nhmpc_analysis* analysis,
                                   char* buffer, size_t cap, size_t* needed) {
  return guarded([&] {
    require(analysis != nullptr, "analysis must not be null");
    const std::string text =
        nhmpc::analysis_report(*analysis->filtration, *analysis->chart,
                               analysis->approx, analysis->residual);
    return fill_text(text, buffer, cap, needed);
  });
}

// ------------------------------------------------------------------ scenario

nhmpc_status nhmpc_scenario_create_from_config(const char* config_text,
                                               nhmpc_scenario** out) {
  return guarded([&] {
    require(config_text != nullptr && out != nullptr,
            "config_text and out must not be null");
    auto s = std::make_unique<nhmpc_scenario>();
    s->config = nhmpc::parse_config(config_text);
    s->scenario = nhmpc::to_scenario(s->config);
    *out = s.release();
    return NHMPC_OK;
  });
}

void nhmpc_scenario_destroy(nhmpc_scenario* scenario) { delete scenario; }

nhmpc_status nhmpc_scenario_dump_config(const nhmpc_scenario* scenario,
                                        char* buffer, size_t cap,
                                        size_t* needed) {
  return guarded([&] {
    require(scenario != nullptr, "scenario must not be null");
    return fill_text(nhmpc::dump_config(scenario->config), buffer, cap,
                     needed);
  });
}

int nhmpc_scenario_num_states(const nhmpc_scenario* scenario) {
  return scenario == nullptr ? 0 : scenario->scenario.model.n_x;
}

int nhmpc_scenario_num_inputs(const nhmpc_scenario* scenario) {
  return scenario == nullptr ? 0 : scenario->scenario.model.n_u;
}

nhmpc_status nhmpc_scenario_vehicle_name(const nhmpc_scenario* scenario,
                                         char* buffer, size_t cap,
                                         size_t* needed) {
  return guarded([&] {
    require(scenario != nullptr, "scenario must not be null");
    return fill_text(scenario->scenario.model.name, buffer, cap, needed);
  });
}

nhmpc_status nhmpc_scenario_setpoint(const nhmpc_scenario* scenario,
                                     double* out) {
  return guarded([&] {
    require(scenario != nullptr && out != nullptr,
            "scenario and out must not be null");
    const Vec& d = scenario->scenario.setpoint;
    Eigen::Map<Vec>(out, d.size()) = d;
    return NHMPC_OK;
  });
}

nhmpc_status nhmpc_scenario_initial_state(const nhmpc_scenario* scenario,
                                          double* out) {
  return guarded([&] {
    require(scenario != nullptr && out != nullptr,
            "scenario and out must not be null");
    const Vec& x0 = scenario->scenario.x0;
    Eigen::Map<Vec>(out, x0.size()) = x0;
    return NHMPC_OK;
  });
}

int nhmpc_scenario_cost_kind(const nhmpc_scenario* scenario) {
  if (scenario == nullptr) return -1;
  return scenario->scenario.cost.kind == nhmpc::CostKind::kTailored ? 0 : 1;
}

double nhmpc_scenario_dt(const nhmpc_scenario* scenario) {
  return scenario == nullptr ? 0.0 : scenario->scenario.dt;
}

double nhmpc_scenario_duration(const nhmpc_scenario* scenario) {
  return scenario == nullptr ? 0.0 : scenario->scenario.duration;
}

int nhmpc_scenario_horizon(const nhmpc_scenario* scenario) {
  return scenario == nullptr ? 0 : scenario->scenario.H;
}

nhmpc_status nhmpc_scenario_set_seed(nhmpc_scenario* scenario, uint64_t seed) {
  return guarded([&] {
    require(scenario != nullptr, "scenario must not be null");
    scenario->config.solver.seed = seed;
    scenario->scenario.solver.seed = seed;
    return NHMPC_OK;
  });
}

nhmpc_status nhmpc_scenario_output_path(const nhmpc_scenario* scenario,
                                        int which, char* buffer, size_t cap,
                                        size_t* needed) {
  return guarded([&] {
    require(scenario != nullptr, "scenario must not be null");
    require(which == 0 || which == 1, "which must be 0 (csv) or 1 (svg)");
    const auto& output = scenario->config.output;
    return fill_text(which == 0 ? output.csv : output.svg, buffer, cap,
                     needed);
  });
}

int nhmpc_scenario_plot_requested(const nhmpc_scenario* scenario) {
  return scenario != nullptr && scenario->config.output.plot ? 1 : 0;
}

nhmpc_status nhmpc_scenario_analyze(const nhmpc_scenario* scenario,
                                    char* buffer, size_t cap,
                                    size_t* needed) {
  return guarded([&] {
    require(scenario != nullptr, "scenario must not be null");
    const nhmpc::Scenario& sc = scenario->scenario;
    const auto bundle = make_analysis(sc.model, sc.setpoint);
    std::string text =
        nhmpc::analysis_report(*bundle->filtration, *bundle->chart,
                               bundle->approx, bundle->residual);
    if (sc.cost.kind == nhmpc::CostKind::kTailored) {
      std::vector<double> q = sc.cost.q;
      std::vector<double> r_in = sc.cost.r_in;
      if (q.empty()) q.assign(sc.model.n_x, 1.0);
      if (r_in.empty()) r_in.assign(sc.model.n_u, 1.0);
      const nhmpc::StageCost cost = nhmpc::build_tailored(
          *bundle->chart, q, r_in, sc.cost.cancel_gcd,
          sc.cost.scale > 0.0 ? sc.cost.scale : 1.0);
      std::ostringstream os;
      os << "\nstage cost (tailored)\n  state exponents:";
      for (int e : cost.e) os << " " << e;
      os << "\n  input exponents:";
      for (int f : cost.f) os << " " << f;
      os << "\n  homogeneity degree: " << cost.d_hom << "\n";
      text += os.str();
    }
    return fill_text(text, buffer, cap, needed);
  });
}

// --------------------------------------------------------------- closed loop

nhmpc_status nhmpc_run_closed_loop(const nhmpc_scenario* scenario,
                                   nhmpc_trace** out) {
  return guarded([&] {
    require(scenario != nullptr && out != nullptr,
            "scenario and out must not be null");
    auto t = std::make_unique<nhmpc_trace>();
    t->trace = nhmpc::run_closed_loop(scenario->scenario);
    t->setpoint = scenario->scenario.setpoint;
    t->vehicle = scenario->scenario.model.name;
    *out = t.release();
    return NHMPC_OK;
  });
}

void nhmpc_trace_destroy(nhmpc_trace* trace) { delete trace; }

int nhmpc_trace_rows(const nhmpc_trace* trace) {
  return trace == nullptr ? 0 : trace->trace.rows();
}

int nhmpc_trace_num_states(const nhmpc_trace* trace) {
  return trace == nullptr ? 0 : static_cast<int>(trace->trace.states.cols());
}

int nhmpc_trace_num_inputs(const nhmpc_trace* trace) {
  return trace == nullptr ? 0 : static_cast<int>(trace->trace.inputs.cols());
}

int nhmpc_trace_diverged(const nhmpc_trace* trace) {
  return trace != nullptr && trace->trace.diverged ? 1 : 0;
}

nhmpc_status nhmpc_trace_row(const nhmpc_trace* trace, int row, double* time,
                             double* x, double* u, double* value,
                             int* iterations, int* solve_status) {
  return guarded([&] {
    require(trace != nullptr, "trace must not be null");
    require(row >= 0 && row < trace->trace.rows(), "row out of range");
    const auto& t = trace->trace;
    if (time != nullptr) *time = t.times[row];
    if (x != nullptr)
      Eigen::Map<Vec>(x, t.states.cols()) = t.states.row(row);
    if (u != nullptr)
      Eigen::Map<Vec>(u, t.inputs.cols()) = t.inputs.row(row);
    if (value != nullptr) *value = t.value[row];
    if (iterations != nullptr) *iterations = t.diagnostics[row].iterations;
    if (solve_status != nullptr)
      *solve_status = static_cast<int>(t.diagnostics[row].status);
    return NHMPC_OK;
  });
}

nhmpc_status nhmpc_trace_stationary(const nhmpc_trace* trace, double tol,
                                    int* out) {
  return guarded([&] {
    require(trace != nullptr && out != nullptr,
            "trace and out must not be null");
    *out = nhmpc::stationarity_check(trace->trace, tol) ? 1 : 0;
    return NHMPC_OK;
  });
}

nhmpc_status nhmpc_trace_value_stats(const nhmpc_trace* trace,
                                     double* max_increase,
                                     double* max_rel_increase,
                                     double* floor_value,
                                     double* decrease_ratio, int* stagnant) {
  return guarded([&] {
    require(trace != nullptr, "trace must not be null");
    const nhmpc::ValueFunctionReport report =
        nhmpc::value_function_report(trace->trace);
    if (max_increase != nullptr) *max_increase = report.max_increase;
    if (max_rel_increase != nullptr)
      *max_rel_increase = report.max_rel_increase;
    if (floor_value != nullptr) *floor_value = report.floor;
    if (decrease_ratio != nullptr) *decrease_ratio = report.decrease_ratio;
    if (stagnant != nullptr) *stagnant = report.stagnant_from_start ? 1 : 0;
    return NHMPC_OK;
  });
}

nhmpc_status nhmpc_trace_to_csv(const nhmpc_trace* trace, char* buffer,
                                size_t cap, size_t* needed) {
  return guarded([&] {
    require(trace != nullptr, "trace must not be null");
    return fill_text(nhmpc::trace_to_csv(trace->trace), buffer, cap, needed);
  });
}

nhmpc_status nhmpc_trace_summary(const nhmpc_trace* trace, char* buffer,
                                 size_t cap, size_t* needed) {
  return guarded([&] {
    require(trace != nullptr, "trace must not be null");
    const auto& t = trace->trace;
    require(t.rows() > 0, "trace is empty");
    const int last = t.rows() - 1;
    const Vec final_state = t.states.row(last);
    const Vec dev = final_state - trace->setpoint;

    long total_iterations = 0;
    int max_iterations = 0;
    int clipped_steps = 0;
    for (const auto& diag : t.diagnostics) {
      total_iterations += diag.iterations;
      max_iterations = std::max(max_iterations, diag.iterations);
      if (diag.status == nhmpc::SolveStatus::kMaxIter) ++clipped_steps;
    }
    const nhmpc::ValueFunctionReport report = nhmpc::value_function_report(t);

    std::ostringstream os;
    os << "vehicle: " << trace->vehicle << "\n";
    os << "samples: " << t.rows() << " (t = " << fmt(t.times.front())
       << " .. " << fmt(t.times.back()) << ")\n";
    os << "diverged: " << (t.diverged ? "yes" : "no") << "\n";
    os << "final state:";
    for (int i = 0; i < final_state.size(); ++i)
      os << " " << fmt(final_state[i]);
    os << "\nfinal deviation from setpoint:";
    for (int i = 0; i < dev.size(); ++i) os << " " << fmt(dev[i]);
    os << "\nfinal deviation (max abs): "
       << fmt(dev.cwiseAbs().maxCoeff()) << "\n";
    os << "value function: initial " << fmt(report.initial) << ", final "
       << fmt(report.final_value) << ", floor " << fmt(report.floor) << "\n";
    os << "value monotonicity: max increase " << fmt(report.max_increase)
       << ", max relative increase " << fmt(report.max_rel_increase)
       << ", decreasing pairs " << fmt(100.0 * report.decrease_ratio)
       << "%\n";
    os << "loop stationary within 1e-6: "
       << (nhmpc::stationarity_check(t, 1e-6) ? "yes" : "no") << "\n";
    os << "solver iterations: total " << total_iterations << ", max per step "
       << max_iterations << ", iteration-limited steps " << clipped_steps
       << "\n";
    return fill_text(os.str(), buffer, cap, needed);
  });
}

nhmpc_status nhmpc_trace_svg(const nhmpc_trace* trace_a, const char* label_a,
                             const nhmpc_trace* trace_b, const char* label_b,
                             const char* title, char* buffer, size_t cap,
                             size_t* needed) {
  return guarded([&] {
    require(trace_a != nullptr, "trace_a must not be null");
    std::vector<nhmpc::PlotSeries> series;
    series.push_back({&trace_a->trace,
                      label_a != nullptr ? label_a : trace_a->vehicle, ""});
    if (trace_b != nullptr) {
      require(trace_b->trace.states.cols() == trace_a->trace.states.cols(),
              "traces have different state dimensions");
      series.push_back({&trace_b->trace,
                        label_b != nullptr ? label_b : trace_b->vehicle, ""});
    }
    const std::string text = nhmpc::render_scenario_svg(
        series, trace_a->setpoint, title != nullptr ? title : "");
    return fill_text(text, buffer, cap, needed);
  });
}

}  // extern "C"

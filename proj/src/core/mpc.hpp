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

#ifndef NHMPC_CORE_MPC_HPP_
#define NHMPC_CORE_MPC_HPP_

#include <memory>
#include <vector>

#include "cost.hpp"
#include "liealg.hpp"
#include "models.hpp"
#include "ocp.hpp"
#include "privcoord.hpp"
#include "types.hpp"

namespace nhmpc {

struct CostSpec {
  CostKind kind = CostKind::kTailored;
  // Tailored: per-state and per-input weights (empty = all ones), optional
  // exponent GCD cancellation, and a global scale. scale <= 0 requests
  // normalization so that the stage cost of the initial deviation with zero
  // input equals 1 (pure positive scaling never changes minimizers).
  std::vector<double> q, r_in;
  bool cancel_gcd = false;
  double scale = 0.0;
  // Quadratic: weight matrices (empty = identities).
  Mat Q, R;
};

// One closed-loop experiment: drive `model` from x0 to the setpoint.
struct Scenario {
  VehicleModel model;
  Vec setpoint;
  Vec x0;
  CostSpec cost;
  double dt = 0.25;
  int H = 60;
  double duration = 15.0;        // seconds; must be a multiple of dt
  std::vector<Interval> bounds;  // empty = model.input_bounds
  SolverSettings solver;
};

// Scenario with all derived objects built and internally wired: the chart at
// the setpoint (full privileged chart for tailored costs, plain translation
// for quadratic ones), the stage cost, and the OCP skeleton whose z0 is set
// at each sampling instant. Heap members keep borrowed pointers stable under
// moves.
struct PreparedScenario {
  Scenario scenario;
  std::unique_ptr<VehicleModel> model;
  std::unique_ptr<LieFiltration> filtration;  // null for quadratic costs
  std::unique_ptr<PrivilegedChart> chart;
  std::unique_ptr<StageCost> cost;
  OcpProblem problem;
};

PreparedScenario prepare(const Scenario& scenario);

struct StepDiagnostics {
  int iterations = 0;
  double residual = 0.0;
  SolveStatus status = SolveStatus::kConverged;
};

// Closed-loop log, one row per sampling instant t_k = k dt, k = 0..N.
// Row k of `inputs` is the input held on [t_k, t_k + dt); the final row is
// the planned-but-unapplied first block of the last solve.
struct ClosedLoopTrace {
  std::vector<double> times;
  Mat states;                 // original coordinates
  Mat inputs;
  std::vector<double> value;  // V(t_k) = OCP optimal objective
  std::vector<StepDiagnostics> diagnostics;
  bool diverged = false;  // rollout divergence truncated the run
  int rows() const { return static_cast<int>(times.size()); }
};

// Exact-model RK4 step in original coordinates (the nominal plant).
Vec plant_step(const VehicleModel& model, const Vec& x, const Vec& u,
               double dt, int substeps);

// Receding-horizon loop: solve the OCP at each sampling instant (warm-started
// with the shifted previous solution when enabled), apply the first input
// block to the plant, log the value function. Solver max_iter is recorded and
// the loop continues; a divergent rollout truncates the trace and sets
// `diverged`.
ClosedLoopTrace run_closed_loop(const Scenario& scenario);

// max_t |x(t) - x(0)|_inf <= tol: the loop never left its initial state.
bool stationarity_check(const ClosedLoopTrace& trace, double tol);

struct ValueFunctionReport {
  double initial = 0.0;
  double final_value = 0.0;
  double floor = 0.0;            // minimum sample
  double max_increase = 0.0;     // max consecutive increase (0 if monotone)
  double max_rel_increase = 0.0; // relative to V_k, pairs above the floor cut
  double decrease_ratio = 0.0;   // fraction of strictly decreasing pairs
  int floor_reached_at = -1;     // first k with V_k < 1e-12 V(0); -1 if never
  bool stagnant_from_start = false;  // floor > 0.99 V(0)
};

// Monotonicity statistics of the value-function samples. Pairs whose base
// value is already below 1e-10 V(0) sit at the numerical floor of the cost
// and are excluded from the relative-increase statistic.
ValueFunctionReport value_function_report(const ClosedLoopTrace& trace);

// |x' Q G(x)|_inf: the first-order obstruction of a quadratic cost at x (zero
// means the zero input satisfies the necessary optimality conditions there).
double quadratic_blind_spot_residual(const VehicleModel& model, const Mat& Q,
                                     const Vec& x);

// Finds x0 with |x0| <= eps, x0 != 0, and |x0' Q G(x0)|_inf < 1e-12: a state
// where a quadratic-cost controller is frozen. Built-in vehicles with Q = I
// use the closed form (0, eps/2, 0, ..., 0); otherwise damped Gauss-Newton
// root finding on the sphere of radius eps/2, up to 100 seeded restarts
// (NoSolutionFound after that).
Vec find_insufficiency_state(const VehicleModel& model, const Mat& Q,
                             double eps, std::uint64_t seed = 0);

}  // namespace nhmpc

#endif  // NHMPC_CORE_MPC_HPP_

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

#include "mpc.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace nhmpc {
namespace {

constexpr double kBlindSpotTarget = 1e-13;  // root-finder target, with margin
constexpr double kBlindSpotBound = 1e-12;   // contract bound on the residual
constexpr int kRootRestarts = 100;
constexpr int kRootIterations = 200;
constexpr double kValueFloorFraction = 1e-12;   // converged-floor declaration
constexpr double kRelIncreaseCutoff = 1e-10;    // pairs below this are floor
constexpr double kStagnantFraction = 0.99;

int step_count(const Scenario& sc) {
  if (!(sc.dt > 0.0) || !std::isfinite(sc.dt))
    throw InvalidArgument("sampling time must be positive and finite");
  if (!(sc.duration >= 0.0) || !std::isfinite(sc.duration))
    throw InvalidArgument("duration must be nonnegative and finite");
  const double ratio = sc.duration / sc.dt;
  const int n = static_cast<int>(std::llround(ratio));
  if (std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio))
    throw InvalidArgument("duration must be a whole number of sampling steps");
  return n;
}

void shrink_to(ClosedLoopTrace& trace, int rows) {
  trace.times.resize(rows);
  trace.states.conservativeResize(rows, Eigen::NoChange);
  trace.inputs.conservativeResize(rows, Eigen::NoChange);
  trace.value.resize(rows);
  trace.diagnostics.resize(rows);
}

}  // namespace

PreparedScenario prepare(const Scenario& scenario) {
  PreparedScenario ps;
  ps.scenario = scenario;
  ps.model = std::make_unique<VehicleModel>(scenario.model);

  const int n = ps.model->n_x;
  const int m = ps.model->n_u;
  if (scenario.setpoint.size() != n)
    throw InvalidArgument("setpoint dimension mismatch");
  if (scenario.x0.size() != n)
    throw InvalidArgument("initial state dimension mismatch");
  if (scenario.H < 1) throw InvalidArgument("horizon must be at least one");
  step_count(scenario);  // validates dt/duration consistency

  if (scenario.cost.kind == CostKind::kTailored) {
    ps.filtration = std::make_unique<LieFiltration>(
        build_filtration(*ps.model, scenario.setpoint, 8));
    ps.chart =
        std::make_unique<PrivilegedChart>(build_chart(*ps.filtration, *ps.model));
    // The filtration inside the chart references the caller's model; rewire
    // both onto the owned copy.
    ps.filtration->model = ps.model.get();
    ps.chart->model = ps.model.get();
    ps.chart->filtration.model = ps.model.get();

    std::vector<double> q = scenario.cost.q;
    std::vector<double> r_in = scenario.cost.r_in;
    if (q.empty()) q.assign(n, 1.0);
    if (r_in.empty()) r_in.assign(m, 1.0);
    double sigma = scenario.cost.scale;
    if (!(sigma > 0.0)) {
      // Normalize so the initial deviation has unit stage cost; pure scaling
      // leaves the minimizers untouched but keeps solver tolerances
      // meaningful across exponent ranges.
      const StageCost unit = build_tailored(*ps.chart, q, r_in,
                                            scenario.cost.cancel_gcd, 1.0);
      const double v0 = eval_in_chart(
          unit, ps.chart->to_privileged(scenario.x0), Vec::Zero(m));
      sigma = (v0 > 1e-300 && std::isfinite(v0)) ? 1.0 / v0 : 1.0;
    }
    ps.cost = std::make_unique<StageCost>(build_tailored(
        *ps.chart, q, r_in, scenario.cost.cancel_gcd, sigma));
  } else {
    ps.chart = std::make_unique<PrivilegedChart>(
        make_translation_chart(*ps.model, scenario.setpoint));
    ps.chart->model = ps.model.get();
    ps.chart->filtration.model = ps.model.get();
    Mat Q = scenario.cost.Q.size() ? scenario.cost.Q
                                   : Mat(Mat::Identity(n, n));
    Mat R = scenario.cost.R.size() ? scenario.cost.R
                                   : Mat(Mat::Identity(m, m));
    ps.cost = std::make_unique<StageCost>(build_quadratic(Q, R));
  }

  ps.problem.chart = ps.chart.get();
  ps.problem.cost = ps.cost.get();
  ps.problem.dt = scenario.dt;
  ps.problem.H = scenario.H;
  ps.problem.bounds =
      scenario.bounds.empty() ? ps.model->input_bounds : scenario.bounds;
  ps.problem.z0 = ps.chart->to_privileged(scenario.x0);
  ps.problem.settings = scenario.solver;
  ps.problem.validate();
  return ps;
}

Vec plant_step(const VehicleModel& model, const Vec& x, const Vec& u,
               double dt, int substeps) {
  if (x.size() != model.n_x || u.size() != model.n_u)
    throw InvalidArgument("plant step dimension mismatch");
  if (substeps < 1) throw InvalidArgument("substep count must be positive");
  const double h = dt / substeps;
  Vec z = x;
  for (int ss = 0; ss < substeps; ++ss) {
    const Vec k1 = dynamics(model, z, u);
    const Vec k2 = dynamics(model, z + (0.5 * h) * k1, u);
    const Vec k3 = dynamics(model, z + (0.5 * h) * k2, u);
    const Vec k4 = dynamics(model, z + h * k3, u);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!z.allFinite())
      throw RolloutDiverged("plant state became non-finite");
  }
  return z;
}

ClosedLoopTrace run_closed_loop(const Scenario& scenario) {
  PreparedScenario ps = prepare(scenario);
  const int steps = step_count(scenario);
  const int n = ps.model->n_x;
  const int m = ps.model->n_u;

  ClosedLoopTrace trace;
  trace.times.resize(steps + 1);
  trace.states.resize(steps + 1, n);
  trace.inputs.resize(steps + 1, m);
  trace.value.resize(steps + 1);
  trace.diagnostics.resize(steps + 1);

  Vec x = scenario.x0;
  OcpSolution previous;
  bool have_previous = false;
  int filled = 0;
  const bool tailored = ps.cost->kind == CostKind::kTailored;
  const double sigma_global = ps.cost->sigma;
  const Vec zero_u = Vec::Zero(m);
  double prev_unit = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k <= steps; ++k) {
    ps.problem.z0 = ps.chart->to_privileged(x);
    // High even exponents flatten the tailored cost by many decades as the
    // state homes in, while the solver's stopping test stays anchored at the
    // initial scale. Rescaling each solve so the current deviation has unit
    // stage cost keeps the surface O(1) — pure scaling never moves
    // minimizers — and the logged value function is converted back to the
    // fixed scenario scale, so the reported V stream stays comparable.
    double to_global = 1.0;
    double unit = std::numeric_limits<double>::quiet_NaN();
    if (tailored) {
      ps.cost->sigma = 1.0;
      unit = eval_in_chart(*ps.cost, ps.problem.z0, zero_u);
      if (std::isfinite(unit) && unit > 1e-300) {
        ps.cost->sigma = 1.0 / unit;
        to_global = sigma_global * unit;
      } else {
        ps.cost->sigma = sigma_global;
      }
    }
    OcpSolution sol;
    try {
      if (have_previous && scenario.solver.warm_start) {
        OcpSolution guess;
        guess.inputs = shift_warm_start(previous);
        // Near the setpoint the problem is asymptotically invariant under
        // the anisotropic dilation, so the new optimal inputs are close to
        // the shifted previous ones contracted by the dilation factor; the
        // stage-cost ratio raised to 1/degree measures that factor (input
        // exponents all equal the effective degree). Offer both starts and
        // keep whichever begins lower.
        if (tailored && prev_unit > 0.0 && unit > 0.0 &&
            !ps.cost->f.empty()) {
          const double alpha =
              std::pow(unit / prev_unit, 1.0 / ps.cost->f[0]);
          if (std::isfinite(alpha) && alpha > 0.0 && alpha != 1.0) {
            Mat scaled = alpha * guess.inputs;
            for (int j = 0; j < m; ++j)
              scaled.col(j) = scaled.col(j)
                                  .cwiseMax(ps.problem.bounds[j].lo)
                                  .cwiseMin(ps.problem.bounds[j].hi);
            try {
              if (objective(ps.problem, scaled) <
                  objective(ps.problem, guess.inputs))
                guess.inputs = std::move(scaled);
            } catch (const RolloutDiverged&) {
              // Keep the plain shifted start.
            }
          }
        }
        sol = solve(ps.problem, &guess);
      } else {
        sol = solve(ps.problem);
      }
    } catch (const RolloutDiverged&) {
      trace.diverged = true;
      break;
    }
    prev_unit = unit;

    trace.times[k] = k * scenario.dt;
    trace.states.row(k) = x;
    trace.inputs.row(k) = sol.inputs.row(0);
    trace.value[k] = sol.objective * to_global;
    trace.diagnostics[k] = {sol.iterations, sol.residual, sol.status};
    ++filled;

    if (k < steps) {
      try {
        x = plant_step(*ps.model, x, sol.inputs.row(0), scenario.dt,
                       scenario.solver.substeps);
      } catch (const RolloutDiverged&) {
        trace.diverged = true;
        break;
      }
    }
    previous = std::move(sol);
    have_previous = true;
  }
  if (filled < steps + 1) shrink_to(trace, filled);
  return trace;
}

bool stationarity_check(const ClosedLoopTrace& trace, double tol) {
  if (trace.rows() == 0) throw InvalidArgument("trace is empty");
  if (!(tol >= 0.0)) throw InvalidArgument("tolerance must be nonnegative");
  const Vec x0 = trace.states.row(0);
  for (int k = 1; k < trace.rows(); ++k) {
    if ((trace.states.row(k).transpose() - x0).cwiseAbs().maxCoeff() > tol)
      return false;
  }
  return true;
}

ValueFunctionReport value_function_report(const ClosedLoopTrace& trace) {
  if (trace.rows() < 2)
    throw InvalidArgument("value-function report needs at least two samples");
  ValueFunctionReport rep;
  const std::vector<double>& v = trace.value;
  rep.initial = v.front();
  rep.final_value = v.back();
  rep.floor = *std::min_element(v.begin(), v.end());

  int decreases = 0;
  const int pairs = static_cast<int>(v.size()) - 1;
  for (int k = 0; k < pairs; ++k) {
    const double diff = v[k + 1] - v[k];
    if (diff > rep.max_increase) rep.max_increase = diff;
    if (diff < 0.0) ++decreases;
    if (v[k] > kRelIncreaseCutoff * rep.initial && v[k] > 0.0) {
      const double rel = diff / v[k];
      if (rel > rep.max_rel_increase) rep.max_rel_increase = rel;
    }
  }
  rep.decrease_ratio = pairs > 0 ? static_cast<double>(decreases) / pairs : 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k] < kValueFloorFraction * rep.initial) {
      rep.floor_reached_at = static_cast<int>(k);
      break;
    }
  }
  rep.stagnant_from_start = rep.floor > kStagnantFraction * rep.initial;
  return rep;
}

double quadratic_blind_spot_residual(const VehicleModel& model, const Mat& Q,
                                     const Vec& x) {
  if (Q.rows() != model.n_x || Q.cols() != model.n_x)
    throw InvalidArgument("weight matrix dimension mismatch");
  if (x.size() != model.n_x)
    throw InvalidArgument("state dimension mismatch");
  double worst = 0.0;
  const Vec qx = Q.transpose() * x;  // x' Q X_i = (Q' x) . X_i
  for (int i = 0; i < model.n_u; ++i)
    worst = std::max(worst, std::abs(qx.dot(field_value(model, i, x))));
  return worst;
}

Vec find_insufficiency_state(const VehicleModel& model, const Mat& Q,
                             double eps, std::uint64_t seed) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw InvalidArgument("radius must be positive and finite");
  if (Q.rows() != model.n_x || Q.cols() != model.n_x)
    throw InvalidArgument("weight matrix dimension mismatch");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * (1.0 + Q.cwiseAbs().maxCoeff()))
    throw NotPositiveDefinite("weight matrix is not symmetric");
  Eigen::LLT<Mat> llt(Q);
  if (llt.info() != Eigen::Success || Q.diagonal().minCoeff() <= 0.0)
    throw NotPositiveDefinite("weight matrix is not positive definite");

  const int n = model.n_x;
  const double radius = 0.5 * eps;

  // Built-in vehicles with identity weights: zeroing every orientation state
  // and placing the position laterally blocks both input directions.
  const bool identity_q = (Q - Mat::Identity(n, n)).cwiseAbs().maxCoeff() <
                          1e-12;
  if (identity_q && model.kind != VehicleKind::kCustom) {
    Vec x0 = Vec::Zero(n);
    x0[1] = radius;
    if (quadratic_blind_spot_residual(model, Q, x0) < kBlindSpotBound)
      return x0;
  }

  // General case: solve g_i(x) = x' Q X_i(x) = 0, i = 1..n_u, on the sphere
  // |x| = radius by damped Gauss-Newton with projection back to the sphere.
  const int m = model.n_u;
  std::mt19937_64 eng(seed ^ 0x853c49e6748fea9bull);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int attempt = 0; attempt < kRootRestarts; ++attempt) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = gauss(eng);
    const double norm0 = x.norm();
    if (norm0 < 1e-12) continue;
    x *= radius / norm0;

    for (int it = 0; it < kRootIterations; ++it) {
      Vec g(m);
      Mat jac(m, n);
      const Vec qx = Q.transpose() * x;
      for (int i = 0; i < m; ++i) {
        const Vec xi = field_value(model, i, x);
        g[i] = qx.dot(xi);
        jac.row(i) =
            (Q * xi + field_jacobian(model, i, x).transpose() * (Q * x))
                .transpose();
      }
      const double res = g.cwiseAbs().maxCoeff();
      if (res < kBlindSpotTarget) return x;

      // Least-norm Gauss-Newton step with Tikhonov damping, then reproject.
      const Mat jjt = jac * jac.transpose();
      const double damp = 1e-12 + 1e-6 * jjt.diagonal().maxCoeff();
      const Vec step =
          jac.transpose() *
          (jjt + damp * Mat::Identity(m, m)).ldlt().solve(g);
      double t = 1.0;
      const double f0 = g.squaredNorm();
      bool moved = false;
      for (int bt = 0; bt < 30; ++bt) {
        Vec xt = x - t * step;
        const double nt = xt.norm();
        if (nt > 1e-12) {
          xt *= radius / nt;
          double ft = 0.0;
          const Vec qxt = Q.transpose() * xt;
          for (int i = 0; i < m; ++i) {
            const double gi = qxt.dot(field_value(model, i, xt));
            ft += gi * gi;
          }
          if (ft < f0 * (1.0 - 1e-4 * t) || ft < f0 - 1e-30) {
            x = xt;
            moved = true;
            break;
          }
        }
        t *= 0.5;
      }
      if (!moved) break;  // stalled; try a fresh start
    }
  }
  throw NoSolutionFound(
      "no state with a vanishing quadratic-cost gradient was found");
}

}  // namespace nhmpc

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

#include "ocp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <vector>

#include "models.hpp"

namespace nhmpc {
namespace {

constexpr double kArmijoC1 = 1e-4;
constexpr int kNonMonotoneWindow = 5;
constexpr int kPhase1Cap = 60;        // spectral-gradient iterations before
                                      // switching to the quasi-Newton phase
constexpr int kLbfgsMemory = 10;
constexpr int kMaxBacktracks = 60;
constexpr double kStepMin = 1e-10;
constexpr double kStepMax = 1e10;
// Random restarts trigger only when the initial chart state is genuinely away
// from the origin yet zero inputs are already stationary.
constexpr double kOriginStateTol = 1e-9;
constexpr double kSpuriousGradTol = 1e-11;
constexpr double kInf = std::numeric_limits<double>::infinity();

Vec dynamics(const OcpProblem& p, const Vec& z, const Vec& u) {
  return p.chart->push_control_matrix(z) * u;
}

// Advances z across one sampling interval (substeps classical RK4 steps with
// zero-order-hold input). Optionally records the four stage states of every
// substep into `stages[0..substeps-1]`. Returns false when z leaves the
// finite range.
bool advance(const OcpProblem& p, Vec& z, const Vec& u,
             std::array<Vec, 4>* stages) {
  const int S = p.settings.substeps;
  const double h = p.dt / S;
  for (int ss = 0; ss < S; ++ss) {
    const Vec k1 = dynamics(p, z, u);
    const Vec s2 = z + (0.5 * h) * k1;
    const Vec k2 = dynamics(p, s2, u);
    const Vec s3 = z + (0.5 * h) * k2;
    const Vec k3 = dynamics(p, s3, u);
    const Vec s4 = z + h * k3;
    const Vec k4 = dynamics(p, s4, u);
    if (stages) stages[ss] = {z, s2, s3, s4};
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!z.allFinite()) return false;
  }
  return true;
}

void check_inputs_shape(const OcpProblem& p, const Mat& inputs) {
  if (inputs.rows() != p.H || inputs.cols() != p.n_u())
    throw InvalidArgument("input sequence must be horizon x n_inputs");
}

// Objective that reports divergence instead of throwing; used by line
// searches, which must survive trial points with divergent rollouts.
bool try_objective(const OcpProblem& p, const Mat& inputs, double& value) {
  Vec z = p.z0;
  double acc = 0.0;
  for (int k = 0; k < p.H; ++k) {
    const Vec u = inputs.row(k);
    if (!advance(p, z, u, nullptr)) return false;
    acc += eval_in_chart(*p.cost, z, u);
  }
  value = p.dt * acc;
  return std::isfinite(value);
}

Mat clamp_to_bounds(const OcpProblem& p, Mat u) {
  for (int j = 0; j < p.n_u(); ++j)
    u.col(j) = u.col(j).cwiseMax(p.bounds[j].lo).cwiseMin(p.bounds[j].hi);
  return u;
}

double dot(const Mat& a, const Mat& b) {
  return (a.array() * b.array()).sum();
}

double residual_at(const OcpProblem& p, const Mat& u, const Mat& g) {
  return (u - clamp_to_bounds(p, u - g)).cwiseAbs().maxCoeff();
}

// Free-coordinate mask: 0 where the variable sits at a bound the gradient
// pushes against, 1 elsewhere.
Mat free_mask(const OcpProblem& p, const Mat& u, const Mat& g) {
  Mat mask = Mat::Ones(u.rows(), u.cols());
  for (int j = 0; j < p.n_u(); ++j) {
    const double lo = p.bounds[j].lo, hi = p.bounds[j].hi;
    const double eps = 1e-9 * std::max(1.0, hi - lo);
    for (int r = 0; r < u.rows(); ++r) {
      if ((u(r, j) <= lo + eps && g(r, j) > 0.0) ||
          (u(r, j) >= hi - eps && g(r, j) < 0.0))
        mask(r, j) = 0.0;
    }
  }
  return mask;
}

struct RunResult {
  Mat u;
  double objective = kInf;
  int iterations = 0;
  double residual = kInf;
  bool converged = false;
  std::vector<double> history;
};

// Two-phase projected descent from one starting point. Tracks the best
// evaluated iterate throughout; the returned point is always that best one.
RunResult run_two_phase(const OcpProblem& p, Mat u, int budget) {
  const double tol = p.settings.tol;
  RunResult out;
  u = clamp_to_bounds(p, u);

  double j_cur;
  Mat g(p.H, p.n_u());
  try {
    objective_and_gradient(p, u, j_cur, g);
  } catch (const RolloutDiverged&) {
    out.u = u;
    return out;  // objective stays +inf; caller discards this start
  }

  Mat u_best = u;
  double j_best = j_cur;
  out.history.push_back(j_best);

  std::deque<double> window{j_cur};
  double alpha = 1.0 / std::max(1e-12, g.cwiseAbs().maxCoeff());
  alpha = std::clamp(alpha, kStepMin, kStepMax);

  // Quasi-Newton memory (phase 2), stored masked to the free space.
  std::deque<Mat> mem_s, mem_y;
  std::deque<double> mem_rho;
  Mat mask = free_mask(p, u, g);
  auto flush_memory = [&]() {
    mem_s.clear();
    mem_y.clear();
    mem_rho.clear();
  };

  int iter = 0;
  bool converged = false;
  while (iter < budget) {
    if (residual_at(p, u, g) < tol * (1.0 + std::abs(j_cur))) {
      if (j_best < j_cur - 1e-14 * (1.0 + std::abs(j_cur))) {
        // A non-monotone excursion found something better than the point the
        // stopping test fired at: restart the search from the best iterate.
        u = u_best;
        objective_and_gradient(p, u, j_cur, g);
        window.assign(1, j_cur);
        flush_memory();
        mask = free_mask(p, u, g);
        ++iter;
        continue;
      }
      converged = true;
      break;
    }

    const bool phase1 = iter < kPhase1Cap;
    Mat direction;
    double model_slope = 0.0;  // directional derivative used by Armijo
    bool projected_arc = false;

    if (phase1) {
      direction = clamp_to_bounds(p, u - alpha * g) - u;
      model_slope = dot(g, direction);
      if (model_slope > -1e-18) {
        alpha = std::max(kStepMin, alpha * 0.25);
        ++iter;
        out.history.push_back(j_best);
        continue;
      }
    } else {
      // Two-loop recursion on the masked gradient.
      const Mat gf = g.cwiseProduct(mask);
      Mat q = gf;
      std::vector<double> a(mem_s.size());
      for (int i = static_cast<int>(mem_s.size()) - 1; i >= 0; --i) {
        a[i] = mem_rho[i] * dot(mem_s[i], q);
        q -= a[i] * mem_y[i];
      }
      double gamma = 1.0 / std::max(1e-12, gf.cwiseAbs().maxCoeff());
      if (!mem_s.empty()) {
        const double yy = dot(mem_y.back(), mem_y.back());
        const double sy = dot(mem_s.back(), mem_y.back());
        if (yy > 0.0 && sy > 0.0) gamma = sy / yy;
      }
      q *= gamma;
      for (std::size_t i = 0; i < mem_s.size(); ++i) {
        const double b = mem_rho[i] * dot(mem_y[i], q);
        q += (a[i] - b) * mem_s[i];
      }
      direction = (-q).cwiseProduct(mask);
      model_slope = dot(g, direction);
      if (model_slope > -1e-16 * (1.0 + std::abs(j_cur))) {
        direction = -g.cwiseProduct(mask);
        model_slope = dot(g, direction);
        flush_memory();
        if (model_slope > -1e-18) {
          // Entire free gradient is numerically zero; fall back to a
          // projected-gradient arc step.
          direction = clamp_to_bounds(p, u - alpha * g) - u;
          model_slope = dot(g, direction);
          if (model_slope > -1e-18) break;  // stationary, tolerance unmet
        }
      }
      projected_arc = true;  // trial points are re-clamped
    }

    const double f_ref = *std::max_element(window.begin(), window.end());
    double t = 1.0;
    double j_trial = kInf;
    Mat u_trial;
    bool accepted = false;
    for (int bt = 0; bt <= kMaxBacktracks; ++bt) {
      u_trial = projected_arc ? clamp_to_bounds(p, u + t * direction)
                              : (u + t * direction).eval();
      const double slope =
          projected_arc ? dot(g, u_trial - u) : t * model_slope;
      if (slope < 0.0 && try_objective(p, u_trial, j_trial) &&
          j_trial <= f_ref + kArmijoC1 * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    ++iter;

    if (!accepted) {
      if (phase1) {
        alpha = std::max(kStepMin, alpha * 0.25);
        out.history.push_back(j_best);
        continue;
      }
      break;  // quasi-Newton stalled; return best iterate
    }

    const Mat u_prev = u;
    const Mat g_prev = g;
    u = u_trial;
    objective_and_gradient(p, u, j_cur, g);
    window.push_back(j_cur);
    if (static_cast<int>(window.size()) > kNonMonotoneWindow)
      window.pop_front();
    if (j_cur < j_best) {
      j_best = j_cur;
      u_best = u;
    }
    out.history.push_back(j_best);

    const Mat s = u - u_prev;
    const Mat y = g - g_prev;
    const double sy = dot(s, y);
    if (phase1) {
      const double ss = dot(s, s);
      alpha = (sy > 1e-16 * std::sqrt(ss) * std::sqrt(dot(y, y)) && sy > 0.0)
                  ? ss / sy
                  : 1.0 / std::max(1e-12, g.cwiseAbs().maxCoeff());
      alpha = std::clamp(alpha, kStepMin, kStepMax);
    } else {
      const Mat new_mask = free_mask(p, u, g);
      if ((new_mask - mask).cwiseAbs().maxCoeff() > 0.0) {
        flush_memory();
      } else {
        const Mat sm = s.cwiseProduct(mask);
        const Mat ym = y.cwiseProduct(mask);
        const double smym = dot(sm, ym);
        if (smym > 1e-12 * std::sqrt(dot(sm, sm)) * std::sqrt(dot(ym, ym))) {
          mem_s.push_back(sm);
          mem_y.push_back(ym);
          mem_rho.push_back(1.0 / smym);
          if (static_cast<int>(mem_s.size()) > kLbfgsMemory) {
            mem_s.pop_front();
            mem_y.pop_front();
            mem_rho.pop_front();
          }
        }
      }
      mask = free_mask(p, u, g);
    }
  }

  // Commit the best iterate and describe the solution at that point.
  if (j_best < j_cur) {
    u = u_best;
    objective_and_gradient(p, u, j_cur, g);
  }
  out.u = u;
  out.objective = j_cur;
  out.iterations = iter;
  out.residual = residual_at(p, u, g);
  out.converged =
      converged || out.residual < tol * (1.0 + std::abs(j_cur));
  return out;
}

}  // namespace

void OcpProblem::validate() const {
  if (chart == nullptr || cost == nullptr)
    throw InvalidArgument("problem must reference a chart and a cost");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw InvalidArgument("sampling time must be positive and finite");
  if (H < 1) throw InvalidArgument("horizon must be at least one step");
  if (bounds.empty()) throw InvalidArgument("input bounds must be non-empty");
  if (static_cast<int>(bounds.size()) != chart->model->n_u)
    throw InvalidArgument("need exactly one bound interval per input");
  for (const Interval& b : bounds) {
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo <= b.hi))
      throw InvalidArgument("input bounds must be finite ordered intervals");
  }
  if (z0.size() != chart->dim())
    throw InvalidArgument("initial state dimension mismatch");
  if (!z0.allFinite())
    throw InvalidArgument("initial state must be finite");
  if (cost->n_x != chart->dim() ||
      cost->n_u != static_cast<int>(bounds.size()))
    throw InvalidArgument("cost dimensions do not match the problem");
  if (settings.substeps < 1 || settings.substeps > 64)
    throw InvalidArgument("substep count out of range");
  if (settings.max_iter < 1)
    throw InvalidArgument("iteration budget must be positive");
  if (!(settings.tol > 0.0))
    throw InvalidArgument("solver tolerance must be positive");
  if (settings.restarts < 0 || settings.restarts > 64)
    throw InvalidArgument("restart count out of range");
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kMaxIter:
      return "max_iter";
    case SolveStatus::kInfeasibleGuess:
      return "infeasible_guess";
  }
  return "unknown";
}

Mat rollout(const OcpProblem& p, const Vec& z0, const Mat& inputs) {
  p.validate();
  check_inputs_shape(p, inputs);
  if (!inputs.allFinite())
    throw InvalidArgument("input sequence must be finite");
  if (z0.size() != p.n_x())
    throw InvalidArgument("rollout start dimension mismatch");
  Mat states(p.H + 1, p.n_x());
  Vec z = z0;
  states.row(0) = z;
  for (int k = 0; k < p.H; ++k) {
    const Vec u = inputs.row(k);
    if (!advance(p, z, u, nullptr))
      throw RolloutDiverged("state became non-finite during rollout step " +
                            std::to_string(k));
    states.row(k + 1) = z;
  }
  return states;
}

double objective(const OcpProblem& p, const Mat& inputs) {
  p.validate();
  check_inputs_shape(p, inputs);
  if (!inputs.allFinite())
    throw InvalidArgument("input sequence must be finite");
  double value;
  if (!try_objective(p, inputs, value))
    throw RolloutDiverged("state became non-finite during rollout");
  return value;
}

void objective_and_gradient(const OcpProblem& p, const Mat& inputs,
                            double& value, Mat& grad) {
  p.validate();
  check_inputs_shape(p, inputs);
  if (!inputs.allFinite())
    throw InvalidArgument("input sequence must be finite");
  const int n = p.n_x(), m = p.n_u(), S = p.settings.substeps;
  const double h = p.dt / S;

  // Forward pass, caching every RK4 stage state for the reverse sweep.
  std::vector<std::array<Vec, 4>> stages(static_cast<std::size_t>(p.H) * S);
  Mat nodes(p.H + 1, n);
  Vec z = p.z0;
  nodes.row(0) = z;
  double acc = 0.0;
  for (int k = 0; k < p.H; ++k) {
    const Vec u = inputs.row(k);
    if (!advance(p, z, u, &stages[static_cast<std::size_t>(k) * S]))
      throw RolloutDiverged("state became non-finite during rollout step " +
                            std::to_string(k));
    nodes.row(k + 1) = z;
    acc += eval_in_chart(*p.cost, z, u);
  }
  value = p.dt * acc;

  // Reverse sweep. lambda carries dJ/d(node state); each RK4 substep is
  // unwound through its four stages:
  //   kb4 = (h/6) L;  kb3 = (h/3) L + h F4' kb4;
  //   kb2 = (h/3) L + (h/2) F3' kb3;  kb1 = (h/6) L + (h/2) F2' kb2;
  //   L  += sum_i Fi' kbi;  du += sum_i Gi' kbi,
  // with Fi the state Jacobian of G(z)u and Gi the input Jacobian (= G) at
  // stage i.
  grad.setZero(p.H, m);
  Vec lambda = Vec::Zero(n);
  Mat gmat(n, m);
  std::vector<Mat> dG;
  Vec gz(n), gu(m);
  double lval = 0.0;
  std::array<Mat, 4> fz, fu;
  for (int k = p.H - 1; k >= 0; --k) {
    const Vec u = inputs.row(k);
    const Vec z_end = nodes.row(k + 1);
    eval_grad_in_chart(*p.cost, z_end, u, lval, gz, gu);
    lambda += p.dt * gz;
    Vec du = p.dt * gu;
    for (int ss = S - 1; ss >= 0; --ss) {
      const auto& st = stages[static_cast<std::size_t>(k) * S + ss];
      for (int i = 0; i < 4; ++i) {
        p.chart->push_control_matrix_jac(st[i], gmat, dG);
        fu[i] = gmat;
        fz[i].setZero(n, n);
        for (int c = 0; c < m; ++c) fz[i] += u[c] * dG[c];
      }
      const Vec kb4 = (h / 6.0) * lambda;
      const Vec kb3 = (h / 3.0) * lambda + h * (fz[3].transpose() * kb4);
      const Vec kb2 =
          (h / 3.0) * lambda + (0.5 * h) * (fz[2].transpose() * kb3);
      const Vec kb1 =
          (h / 6.0) * lambda + (0.5 * h) * (fz[1].transpose() * kb2);
      du += fu[0].transpose() * kb1 + fu[1].transpose() * kb2 +
            fu[2].transpose() * kb3 + fu[3].transpose() * kb4;
      lambda += fz[0].transpose() * kb1 + fz[1].transpose() * kb2 +
                fz[2].transpose() * kb3 + fz[3].transpose() * kb4;
    }
    grad.row(k) = du;
  }
}

Mat gradient(const OcpProblem& p, const Mat& inputs) {
  double value;
  Mat grad;
  objective_and_gradient(p, inputs, value, grad);
  return grad;
}

OcpSolution solve(const OcpProblem& p, const OcpSolution* guess) {
  p.validate();
  const int H = p.H, m = p.n_u();

  if (guess != nullptr) {
    if (guess->inputs.rows() != H || guess->inputs.cols() != m)
      throw InvalidArgument("warm-start guess has wrong dimensions");
    if (!guess->inputs.allFinite()) {
      // Unusable guess: report it without optimizing so the caller can
      // decide whether to re-solve cold.
      OcpSolution sol;
      sol.status = SolveStatus::kInfeasibleGuess;
      sol.inputs = clamp_to_bounds(p, Mat::Zero(H, m));
      sol.states = rollout(p, p.z0, sol.inputs);
      Mat g;
      objective_and_gradient(p, sol.inputs, sol.objective, g);
      sol.residual = residual_at(p, sol.inputs, g);
      sol.iterations = 0;
      sol.objective_history = {sol.objective};
      return sol;
    }
  }

  const int budget = p.settings.max_iter;
  std::vector<Mat> starts;
  if (guess != nullptr) {
    starts.push_back(clamp_to_bounds(p, guess->inputs));
  } else {
    const Mat zero_start = clamp_to_bounds(p, Mat::Zero(H, m));
    starts.push_back(zero_start);
    // Away from the origin, zero inputs can satisfy the first-order
    // conditions of a tailored cost without being optimal (the cost is flat
    // to high order there). Detect that and add seeded random starts.
    if (p.cost->kind == CostKind::kTailored && p.settings.restarts > 0 &&
        p.z0.cwiseAbs().maxCoeff() > kOriginStateTol) {
      double j0;
      Mat g0;
      bool stationary = false;
      try {
        objective_and_gradient(p, zero_start, j0, g0);
        stationary = residual_at(p, zero_start, g0) <=
                     kSpuriousGradTol * (1.0 + std::abs(j0));
      } catch (const RolloutDiverged&) {
        stationary = false;
      }
      if (stationary) {
        for (int r = 0; r < p.settings.restarts; ++r) {
          std::mt19937_64 eng(p.settings.seed * 0x9E3779B97F4A7C15ull +
                              0xD1B54A32D192ED03ull * (r + 1));
          Mat start(H, m);
          for (int j = 0; j < m; ++j) {
            std::uniform_real_distribution<double> dist(p.bounds[j].lo,
                                                        p.bounds[j].hi);
            for (int k = 0; k < H; ++k) start(k, j) = dist(eng);
          }
          starts.push_back(start);
        }
      }
    }
  }

  RunResult best;
  int total_iters = 0;
  for (const Mat& s : starts) {
    RunResult r = run_two_phase(p, s, budget);
    total_iters += r.iterations;
    if (r.objective < best.objective) best = std::move(r);
  }
  if (!std::isfinite(best.objective))
    throw RolloutDiverged("every solver start produced a divergent rollout");

  OcpSolution sol;
  sol.inputs = best.u;
  sol.states = rollout(p, p.z0, sol.inputs);
  sol.objective = best.objective;
  sol.iterations = total_iters;
  sol.residual = best.residual;
  sol.status =
      best.converged ? SolveStatus::kConverged : SolveStatus::kMaxIter;
  sol.objective_history = std::move(best.history);
  return sol;
}

Mat shift_warm_start(const OcpSolution& previous) {
  const int H = static_cast<int>(previous.inputs.rows());
  if (H < 1) throw InvalidArgument("previous solution is empty");
  Mat g = previous.inputs;
  if (H >= 2)
    g.topRows(H - 1) = previous.inputs.bottomRows(H - 1);
  return g;
}

}  // namespace nhmpc

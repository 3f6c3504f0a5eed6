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

#ifndef NHMPC_CORE_OCP_HPP_
#define NHMPC_CORE_OCP_HPP_

#include <cstdint>
#include <vector>

#include "cost.hpp"
#include "models.hpp"
#include "privcoord.hpp"
#include "types.hpp"

namespace nhmpc {

struct SolverSettings {
  int max_iter = 2000;
  double tol = 1e-8;    // projected-gradient stopping tolerance (relative)
  int restarts = 8;     // extra random starts when zero inputs are stationary
  std::uint64_t seed = 0;
  int substeps = 4;     // RK4 substeps per sampling interval
  bool warm_start = true;  // consumed by the receding-horizon layer
};

// Finite-horizon optimal control problem over the chart dynamics
// z' = G_z(z) u with piecewise-constant inputs:
//   J(u) = dt * sum_{k=0}^{H-1} l(z_{k+1}, u_k),
// where z_{k+1} follows from classical RK4 (settings.substeps per interval).
struct OcpProblem {
  const PrivilegedChart* chart = nullptr;  // borrowed dynamics provider
  const StageCost* cost = nullptr;         // borrowed
  double dt = 0.25;
  int H = 1;
  std::vector<Interval> bounds;  // one per input channel
  Vec z0;
  SolverSettings settings;

  int n_x() const { return static_cast<int>(z0.size()); }
  int n_u() const { return static_cast<int>(bounds.size()); }
  void validate() const;
};

enum class SolveStatus { kConverged, kMaxIter, kInfeasibleGuess };

const char* to_string(SolveStatus s);

struct OcpSolution {
  Mat inputs;   // H x n_u, row k = input held on [k dt, (k+1) dt)
  Mat states;   // (H+1) x n_x, RK4 rollout of `inputs` from z0
  double objective = 0.0;
  int iterations = 0;
  double residual = 0.0;  // infinity norm of the projected gradient step
  SolveStatus status = SolveStatus::kConverged;
  // Best objective seen after each accepted iteration (non-increasing).
  std::vector<double> objective_history;
};

// RK4 rollout of an input sequence (rows of `inputs`) from z0. Throws
// RolloutDiverged when any state stops being finite.
Mat rollout(const OcpProblem& problem, const Vec& z0, const Mat& inputs);

// J(u) as defined above. Defined for any finite input sequence, in or out of
// bounds; throws RolloutDiverged when the rollout does.
double objective(const OcpProblem& problem, const Mat& inputs);

// dJ/du by reverse sweep through the RK4 steps (exact for the discretized
// problem, up to roundoff).
Mat gradient(const OcpProblem& problem, const Mat& inputs);
void objective_and_gradient(const OcpProblem& problem, const Mat& inputs,
                            double& value, Mat& grad);

// Two-phase box-constrained solver: projected spectral-gradient descent with
// a 5-step non-monotone acceptance window (the stage costs are flat to high
// order at the origin, where pure monotone Armijo stalls), then a projected
// limited-memory quasi-Newton refinement on the free coordinates. The best
// iterate seen is tracked throughout and returned.
//
// With no guess the solver starts from zero inputs; if the zero sequence is
// itself stationary under a tailored cost while z0 is away from the origin,
// `settings.restarts` additional seeded random starts are solved and the best
// objective wins (zero inputs can be a spurious stationary point). A guess
// with non-finite entries yields status kInfeasibleGuess (no optimization);
// a guess with wrong dimensions throws InvalidArgument; out-of-bounds guesses
// are clamped.
OcpSolution solve(const OcpProblem& problem,
                  const OcpSolution* guess = nullptr);

// Receding-horizon shift: drop the first input block, duplicate the last.
Mat shift_warm_start(const OcpSolution& previous);

}  // namespace nhmpc

#endif  // NHMPC_CORE_OCP_HPP_

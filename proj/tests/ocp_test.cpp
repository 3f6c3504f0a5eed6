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

#include "core/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "core/cost.hpp"
#include "core/liealg.hpp"
#include "core/models.hpp"
#include "core/privcoord.hpp"
#include "core/types.hpp"
#include "gtest/gtest.h"

namespace nhmpc {
namespace {

PrivilegedChart bracket_chart(const VehicleModel& m, const Vec& d) {
  LieFiltration f = build_filtration(m, d, 8);
  return build_chart(f, m);
}

std::vector<double> ones(int n) { return std::vector<double>(n, 1.0); }

Vec random_vec(int n, std::mt19937_64& rng, double span) {
  std::uniform_real_distribution<double> dist(-span, span);
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = dist(rng);
  return x;
}

TEST(Rollout, StraightLineIsExact) {
  VehicleModel m = make_unicycle();
  PrivilegedChart chart = make_translation_chart(m, Vec::Zero(3));
  StageCost cost = build_quadratic(Mat::Identity(3, 3), Mat::Identity(2, 2));
  OcpProblem p;
  p.chart = &chart;
  p.cost = &cost;
  p.dt = 0.25;
  p.H = 8;
  p.bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
  p.z0 = Vec::Zero(3);
  Mat u = Mat::Zero(8, 2);
  u.col(0).setConstant(1.0);
  Mat states = rollout(p, p.z0, u);
  for (int k = 0; k <= 8; ++k) {
    EXPECT_NEAR(states(k, 0), 0.25 * k, 1e-13);
    EXPECT_NEAR(states(k, 1), 0.0, 1e-13);
    EXPECT_NEAR(states(k, 2), 0.0, 1e-13);
  }
}

TEST(Rollout, CircularArcMatchesClosedForm) {
  VehicleModel m = make_unicycle();
  PrivilegedChart chart = make_translation_chart(m, Vec::Zero(3));
  StageCost cost = build_quadratic(Mat::Identity(3, 3), Mat::Identity(2, 2));
  OcpProblem p;
  p.chart = &chart;
  p.cost = &cost;
  p.dt = 0.25;
  p.H = 8;
  p.bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
  p.z0 = Vec::Zero(3);
  const double v = 0.8, w = 0.9;
  Mat u(8, 2);
  u.col(0).setConstant(v);
  u.col(1).setConstant(w);
  Mat states = rollout(p, p.z0, u);
  for (int k = 0; k <= 8; ++k) {
    const double t = 0.25 * k;
    EXPECT_NEAR(states(k, 0), v / w * std::sin(w * t), 5e-7);
    EXPECT_NEAR(states(k, 1), v / w * (1.0 - std::cos(w * t)), 5e-7);
    EXPECT_NEAR(states(k, 2), w * t, 1e-12);
  }
}

TEST(Rollout, PrivilegedChartTransportAgreesWithOriginalCoordinates) {
  // Integrating the transported dynamics must shadow the chart image of the
  // original-coordinates integration.
  VehicleModel m = make_kinematic_car(0.2);
  PrivilegedChart chart = bracket_chart(m, Vec::Zero(4));
  StageCost cost = build_tailored(chart, ones(4), ones(2), true, 1.0);
  OcpProblem p;
  p.chart = &chart;
  p.cost = &cost;
  p.dt = 0.25;
  p.H = 6;
  p.bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
  p.settings.substeps = 16;
  std::mt19937_64 rng(71);
  Vec x0 = random_vec(4, rng, 0.4);
  p.z0 = chart.to_privileged(x0);
  Mat u(6, 2);
  for (int k = 0; k < 6; ++k) u.row(k) = random_vec(2, rng, 0.9).transpose();
  Mat zs = rollout(p, p.z0, u);

  // Reference: classical RK4 on the original vehicle with the same grid.
  Vec x = x0;
  const int sub = 16;
  const double h = 0.25 / sub;
  for (int k = 0; k < 6; ++k) {
    Vec uk = u.row(k);
    for (int s = 0; s < sub; ++s) {
      Vec k1 = dynamics(m, x, uk);
      Vec k2 = dynamics(m, x + 0.5 * h * k1, uk);
      Vec k3 = dynamics(m, x + 0.5 * h * k2, uk);
      Vec k4 = dynamics(m, x + h * k3, uk);
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    Vec z_ref = chart.to_privileged(x);
    EXPECT_LT((zs.row(k + 1).transpose() - z_ref).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Objective, RightEndpointQuadratureExcludesInitialState) {
  VehicleModel m = make_unicycle();
  PrivilegedChart chart = make_translation_chart(m, Vec::Zero(3));
  Mat Q = Mat::Identity(3, 3), R = Mat::Identity(2, 2);
  StageCost cost = build_quadratic(Q, R);
  OcpProblem p;
  p.chart = &chart;
  p.cost = &cost;
  p.dt = 0.25;
  p.H = 2;
  p.bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
  Vec z0(3);
  z0 << 0.5, -0.2, 0.7;  // nonzero initial deviation
  p.z0 = z0;
  // Zero inputs hold a driftless system still: every stage sees the same
  // state, so J = dt * H * l(z0, 0). If the quadrature used the left
  // endpoint nothing would change here, so also exercise one moving step.
  Mat u0 = Mat::Zero(2, 2);
  EXPECT_NEAR(objective(p, u0), 0.25 * 2 * z0.squaredNorm(), 1e-13);

  Mat u1 = Mat::Zero(2, 2);
  u1(0, 0) = 0.4;  // move during the first interval only
  Mat states = rollout(p, p.z0, u1);
  Vec z1 = states.row(1), z2 = states.row(2);
  EXPECT_LT((z1 - z2).cwiseAbs().maxCoeff(), 1e-14);
  const double expect = 0.25 * ((z1.squaredNorm() + 0.4 * 0.4) +
                                z2.squaredNorm());
  EXPECT_NEAR(objective(p, u1), expect, 1e-12);
  // Left-endpoint quadrature would have charged z0 and the moving input:
  const double left = 0.25 * ((z0.squaredNorm() + 0.4 * 0.4) +
                              z1.squaredNorm());
  EXPECT_GT(std::abs(objective(p, u1) - left), 1e-3);
}

TEST(Gradient, AdjointMatchesFiniteDifferencesAcrossCatalog) {
  std::mt19937_64 rng(72);
  int instance = 0;
  struct Case {
    VehicleModel model;
    bool tailored;
  };
  std::vector<Case> cases;
  cases.push_back({make_unicycle(), true});
  cases.push_back({make_unicycle(), false});
  cases.push_back({make_kinematic_car(0.2), true});
  cases.push_back({make_kinematic_car(0.2), false});
  cases.push_back({make_one_trailer(0.19), true});
  cases.push_back({make_two_trailer(0.2, 0.2), true});
  for (const auto& c : cases) {
    const int n = c.model.n_x;
    PrivilegedChart chart = c.tailored
                                ? bracket_chart(c.model, Vec::Zero(n))
                                : make_translation_chart(c.model, Vec::Zero(n));
    StageCost cost =
        c.tailored
            ? build_tailored(chart, ones(n), ones(2), true, 1.0)
            : build_quadratic(Mat::Identity(n, n), Mat::Identity(2, 2));
    for (int rep = 0; rep < 5; ++rep) {
      OcpProblem p;
      p.chart = &chart;
      p.cost = &cost;
      p.dt = 0.2;
      p.H = 3;
      p.bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
      p.z0 = random_vec(n, rng, 0.8);
      Mat u(3, 2);
      for (int k = 0; k < 3; ++k)
        u.row(k) = random_vec(2, rng, 0.8).transpose();
      Mat g = gradient(p, u);
      Mat g_fd(3, 2);
      const double eps = 1e-6;
      for (int k = 0; k < 3; ++k) {
        for (int j = 0; j < 2; ++j) {
          Mat up = u, um = u;
          up(k, j) += eps;
          um(k, j) -= eps;
          g_fd(k, j) = (objective(p, up) - objective(p, um)) / (2.0 * eps);
        }
      }
      const double scale = std::max(1e-9, g_fd.cwiseAbs().maxCoeff());
      EXPECT_LT((g - g_fd).cwiseAbs().maxCoeff() / scale, 1e-5)
          << c.model.name << (c.tailored ? " tailored" : " quadratic");
      ++instance;
    }
  }
  EXPECT_GE(instance, 30);
}

TEST(Gradient, ValueAndGradientAgreeWithSeparateCalls) {
  VehicleModel m = make_one_trailer(0.19);
  PrivilegedChart chart = bracket_chart(m, Vec::Zero(4));
  StageCost cost = build_tailored(chart, ones(4), ones(2), true, 1.0);
  OcpProblem p;
  p.chart = &chart;
  p.cost = &cost;
  p.dt = 0.25;
  p.H = 4;
  p.bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
  std::mt19937_64 rng(73);
  p.z0 = random_vec(4, rng, 0.5);
  Mat u(4, 2);
  for (int k = 0; k < 4; ++k) u.row(k) = random_vec(2, rng, 0.7).transpose();
  double value;
  Mat g;
  objective_and_gradient(p, u, value, g);
  EXPECT_NEAR(value, objective(p, u), 1e-14 * (1.0 + std::abs(value)));
  EXPECT_LT((g - gradient(p, u)).cwiseAbs().maxCoeff(), 1e-14);
}

// Exhaustive constant-per-step grid over the input box.
double grid_oracle(const OcpProblem& p, int points_per_axis) {
  const int H = p.H, m = p.n_u();
  const int total_axes = H * m;
  std::vector<int> index(total_axes, 0);
  Mat u(H, m);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    for (int a = 0; a < total_axes; ++a) {
      const int k = a / m, j = a % m;
      const auto& b = p.bounds[j];
      u(k, j) = b.lo + (b.hi - b.lo) * index[a] / (points_per_axis - 1);
    }
    best = std::min(best, objective(p, u));
    int a = 0;
    while (a < total_axes && ++index[a] == points_per_axis) index[a++] = 0;
    if (a == total_axes) break;
  }
  return best;
}

TEST(Solver, BeatsExhaustiveGridOnShortHorizons) {
  VehicleModel m = make_unicycle();
  PrivilegedChart chart = bracket_chart(m, Vec::Zero(3));
  StageCost cost = build_tailored(chart, ones(3), ones(2), false, 1.0);
  for (int H : {1, 2}) {
    OcpProblem p;
    p.chart = &chart;
    p.cost = &cost;
    p.dt = 0.25;
    p.H = H;
    p.bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
    Vec z0(3);
    z0 << 0.6, -0.4, 0.5;
    p.z0 = z0;
    p.settings.max_iter = 2000;
    p.settings.tol = 1e-10;
    OcpSolution sol = solve(p);
    const double oracle = grid_oracle(p, 11);
    EXPECT_LE(sol.objective, oracle + 1e-6) << "H = " << H;
  }
}

TEST(Solver, ReportsInfeasibleGuessWithoutIterating) {
  VehicleModel m = make_unicycle();
  PrivilegedChart chart = make_translation_chart(m, Vec::Zero(3));
  StageCost cost = build_quadratic(Mat::Identity(3, 3), Mat::Identity(2, 2));
  OcpProblem p;
  p.chart = &chart;
  p.cost = &cost;
  p.dt = 0.25;
  p.H = 4;
  p.bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
  p.z0 = Vec::Constant(3, 0.3);
  OcpSolution guess;
  guess.inputs = Mat::Zero(4, 2);
  guess.inputs(2, 1) = std::numeric_limits<double>::quiet_NaN();
  OcpSolution sol = solve(p, &guess);
  EXPECT_EQ(sol.status, SolveStatus::kInfeasibleGuess);
  EXPECT_EQ(sol.iterations, 0);
  EXPECT_NEAR(sol.objective, 0.25 * 4 * p.z0.squaredNorm(), 1e-12);
}

TEST(Solver, RejectsWrongGuessDimensions) {
  VehicleModel m = make_unicycle();
  PrivilegedChart chart = make_translation_chart(m, Vec::Zero(3));
  StageCost cost = build_quadratic(Mat::Identity(3, 3), Mat::Identity(2, 2));
  OcpProblem p;
  p.chart = &chart;
  p.cost = &cost;
  p.dt = 0.25;
  p.H = 4;
  p.bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
  p.z0 = Vec::Zero(3);
  OcpSolution guess;
  guess.inputs = Mat::Zero(3, 2);
  EXPECT_THROW(solve(p, &guess), InvalidArgument);
}

TEST(Solver, ClampsOutOfBoundsGuess) {
  VehicleModel m = make_unicycle();
  PrivilegedChart chart = make_translation_chart(m, Vec::Zero(3));
  StageCost cost = build_quadratic(Mat::Identity(3, 3), Mat::Identity(2, 2));
  OcpProblem p;
  p.chart = &chart;
  p.cost = &cost;
  p.dt = 0.25;
  p.H = 5;
  p.bounds = {{-1.0, 1.0}, {-0.5, 0.5}};
  p.z0 = Vec::Constant(3, -0.4);
  OcpSolution guess;
  guess.inputs = Mat::Constant(5, 2, 7.0);
  OcpSolution sol = solve(p, &guess);
  EXPECT_EQ(sol.status, SolveStatus::kConverged);
  EXPECT_LE(sol.inputs.col(0).cwiseAbs().maxCoeff(), 1.0 + 1e-12);
  EXPECT_LE(sol.inputs.col(1).cwiseAbs().maxCoeff(), 0.5 + 1e-12);
}

TEST(Solver, ValidatesProblemShape) {
  VehicleModel m = make_unicycle();
  PrivilegedChart chart = make_translation_chart(m, Vec::Zero(3));
  StageCost cost = build_quadratic(Mat::Identity(3, 3), Mat::Identity(2, 2));
  OcpProblem p;
  p.chart = &chart;
  p.cost = &cost;
  p.dt = 0.25;
  p.H = 0;  // invalid horizon
  p.bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
  p.z0 = Vec::Zero(3);
  EXPECT_THROW(solve(p), InvalidArgument);
  p.H = 4;
  p.dt = 0.0;
  EXPECT_THROW(solve(p), InvalidArgument);
  p.dt = 0.25;
  p.settings.restarts = 100;
  EXPECT_THROW(solve(p), InvalidArgument);
}

TEST(Solver, EscapesSpuriousStationaryZeroStart) {
  // With the state on the doubly-bracketed axis, zero inputs satisfy the
  // first-order conditions of the tailored cost exactly, but moving is
  // strictly better; the seeded restarts must find that.
  VehicleModel m = make_unicycle();
  PrivilegedChart chart = bracket_chart(m, Vec::Zero(3));
  StageCost cost = build_tailored(chart, ones(3), ones(2), false, 1.0);
  OcpProblem p;
  p.chart = &chart;
  p.cost = &cost;
  p.dt = 0.25;
  p.H = 20;
  p.bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
  Vec z0 = Vec::Zero(3);
  z0[2] = 0.5;
  p.z0 = z0;
  p.settings.max_iter = 2000;
  p.settings.restarts = 8;
  p.settings.seed = 3;
  const double j_zero = objective(p, Mat::Zero(20, 2));
  OcpSolution sol = solve(p);
  EXPECT_LT(sol.objective, 0.9 * j_zero);
  EXPECT_GT(sol.inputs.cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Solver, ObjectiveHistoryIsMonotoneBestSoFar) {
  VehicleModel m = make_unicycle();
  PrivilegedChart chart = bracket_chart(m, Vec::Zero(3));
  StageCost cost = build_tailored(chart, ones(3), ones(2), false, 1.0);
  OcpProblem p;
  p.chart = &chart;
  p.cost = &cost;
  p.dt = 0.25;
  p.H = 10;
  p.bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
  Vec z0(3);
  z0 << 0.7, -0.5, 0.3;
  p.z0 = z0;
  OcpSolution sol = solve(p);
  ASSERT_FALSE(sol.objective_history.empty());
  for (std::size_t i = 1; i < sol.objective_history.size(); ++i)
    EXPECT_LE(sol.objective_history[i], sol.objective_history[i - 1] + 1e-15);
  EXPECT_NEAR(sol.objective_history.back(), sol.objective, 1e-12);
}

TEST(Solver, WarmStartReachesColdStartQuality) {
  VehicleModel m = make_unicycle();
  PrivilegedChart chart = make_translation_chart(m, Vec::Zero(3));
  StageCost cost = build_quadratic(Mat::Identity(3, 3), Mat::Identity(2, 2));
  OcpProblem p;
  p.chart = &chart;
  p.cost = &cost;
  p.dt = 0.25;
  p.H = 10;
  p.bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
  Vec z0(3);
  z0 << 0.3, 0.2, -0.4;
  p.z0 = z0;
  OcpSolution first = solve(p);
  EXPECT_EQ(first.status, SolveStatus::kConverged);

  // Advance one sample along the plan and re-solve warm and cold.
  p.z0 = first.states.row(1);
  OcpSolution guess;
  guess.inputs = shift_warm_start(first);
  OcpSolution warm = solve(p, &guess);
  OcpSolution cold = solve(p);
  EXPECT_EQ(warm.status, SolveStatus::kConverged);
  EXPECT_NEAR(warm.objective, cold.objective,
              1e-6 * (1.0 + std::abs(cold.objective)));
}

TEST(ShiftWarmStart, DropsFirstRowAndDuplicatesLast) {
  OcpSolution prev;
  prev.inputs = Mat(3, 2);
  prev.inputs << 1, 2, 3, 4, 5, 6;
  Mat shifted = shift_warm_start(prev);
  Mat expect(3, 2);
  expect << 3, 4, 5, 6, 5, 6;
  EXPECT_LT((shifted - expect).cwiseAbs().maxCoeff(), 1e-15);
}

}  // namespace
}  // namespace nhmpc

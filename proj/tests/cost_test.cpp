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

#include "core/cost.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "core/liealg.hpp"
#include "core/models.hpp"
#include "core/privcoord.hpp"
#include "core/types.hpp"
#include "gtest/gtest.h"

namespace nhmpc {
namespace {

constexpr int kMaxDepth = 8;

PrivilegedChart chart_at(const VehicleModel& m, const Vec& d) {
  LieFiltration f = build_filtration(m, d, kMaxDepth);
  return build_chart(f, m);
}

Vec random_vec(int n, std::mt19937_64& rng, double span = 1.0) {
  std::uniform_real_distribution<double> dist(-span, span);
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = dist(rng);
  return x;
}

std::vector<double> ones(int n) { return std::vector<double>(n, 1.0); }

TEST(TailoredCost, UnicycleExponents) {
  VehicleModel m = make_unicycle();
  PrivilegedChart chart = chart_at(m, Vec::Zero(3));
  StageCost cost = build_tailored(chart, ones(3), ones(2), false, 1.0);
  EXPECT_EQ(cost.e, (std::vector<int>{4, 4, 2}));
  EXPECT_EQ(cost.f, (std::vector<int>{4, 4}));
  EXPECT_EQ(cost.d_hom, 4);
  // Cancelling the common factor two halves every exponent; the homogeneity
  // degree bookkeeping keeps the uncancelled value.
  StageCost gcd = build_tailored(chart, ones(3), ones(2), true, 1.0);
  EXPECT_EQ(gcd.e, (std::vector<int>{2, 2, 1}));
  EXPECT_EQ(gcd.f, (std::vector<int>{2, 2}));
  EXPECT_EQ(gcd.d_hom, 4);
}

TEST(TailoredCost, KinematicCarExponents) {
  VehicleModel m = make_kinematic_car(0.2);
  PrivilegedChart chart = chart_at(m, Vec::Zero(4));
  StageCost raw = build_tailored(chart, ones(4), ones(2), false, 1.0);
  EXPECT_EQ(raw.e, (std::vector<int>{12, 12, 6, 4}));
  EXPECT_EQ(raw.f, (std::vector<int>{12, 12}));
  EXPECT_EQ(raw.d_hom, 12);
  StageCost gcd = build_tailored(chart, ones(4), ones(2), true, 1.0);
  EXPECT_EQ(gcd.e, (std::vector<int>{6, 6, 3, 2}));
  EXPECT_EQ(gcd.f, (std::vector<int>{6, 6}));
}

TEST(TailoredCost, OneTrailerExponents) {
  VehicleModel m = make_one_trailer(0.19);
  PrivilegedChart chart = chart_at(m, Vec::Zero(4));
  StageCost raw = build_tailored(chart, ones(4), ones(2), false, 1.0);
  EXPECT_EQ(raw.e, (std::vector<int>{12, 12, 6, 4}));
  EXPECT_EQ(raw.f, (std::vector<int>{12, 12}));
}

TEST(TailoredCost, TwoTrailerExponents) {
  VehicleModel m = make_two_trailer(0.2, 0.2);
  PrivilegedChart chart = chart_at(m, Vec::Zero(5));
  StageCost raw = build_tailored(chart, ones(5), ones(2), false, 1.0);
  EXPECT_EQ(raw.e, (std::vector<int>{48, 48, 24, 16, 12}));
  EXPECT_EQ(raw.f, (std::vector<int>{48, 48}));
  EXPECT_EQ(raw.d_hom, 48);
  StageCost gcd = build_tailored(chart, ones(5), ones(2), true, 1.0);
  EXPECT_EQ(gcd.e, (std::vector<int>{12, 12, 6, 4, 3}));
  EXPECT_EQ(gcd.f, (std::vector<int>{12, 12}));
}

TEST(TailoredCost, EvaluationMatchesMonomialSum) {
  VehicleModel m = make_unicycle();
  PrivilegedChart chart = chart_at(m, Vec::Zero(3));
  StageCost cost =
      build_tailored(chart, {2.0, 3.0, 4.0}, {0.5, 0.25}, false, 2.0);
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    Vec z = random_vec(3, rng);
    Vec u = random_vec(2, rng);
    const double expect =
        2.0 * (2.0 * std::pow(z[0], 4) + 3.0 * std::pow(z[1], 4) +
               4.0 * std::pow(z[2], 2) + 0.5 * std::pow(u[0], 4) +
               0.25 * std::pow(u[1], 4));
    EXPECT_NEAR(eval_in_chart(cost, z, u), expect, 1e-12 * (1.0 + expect));
  }
}

TEST(TailoredCost, EvalTransformsThroughChart) {
  VehicleModel m = make_kinematic_car(0.2);
  Vec d(4);
  d << 0.1, -0.2, 0.3, 0.2;
  PrivilegedChart chart = chart_at(m, d);
  StageCost cost = build_tailored(chart, ones(4), ones(2), true, 1.0);
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 10; ++trial) {
    Vec x = d + random_vec(4, rng, 0.5);
    Vec u = random_vec(2, rng);
    EXPECT_NEAR(eval(cost, x, u),
                eval_in_chart(cost, chart.to_privileged(x), u), 1e-12);
  }
}

TEST(TailoredCost, AnisotropicHomogeneity) {
  // l(Lambda_alpha z, alpha u) = alpha^d l(z, u) with the effective degree;
  // the identity is exact for the polynomial stage cost.
  VehicleModel m = make_two_trailer(0.2, 0.2);
  PrivilegedChart chart = chart_at(m, Vec::Zero(5));
  for (bool cancel : {false, true}) {
    StageCost cost = build_tailored(chart, ones(5), ones(2), cancel, 1.0);
    const int d_eff = cost.f[0];
    std::mt19937_64 rng(63);
    for (int trial = 0; trial < 20; ++trial) {
      Vec z = random_vec(5, rng);
      Vec u = random_vec(2, rng);
      const double alpha = std::uniform_real_distribution<double>(0.2, 1.8)(rng);
      Vec zl(5);
      for (int j = 0; j < 5; ++j)
        zl[j] = std::pow(alpha, chart.weights[j]) * z[j];
      const double lhs = eval_in_chart(cost, zl, alpha * u);
      const double rhs = std::pow(alpha, d_eff) * eval_in_chart(cost, z, u);
      EXPECT_NEAR(lhs, rhs, 1e-10 * (1.0 + std::abs(rhs)));
    }
  }
}

TEST(TailoredCost, PositiveDefiniteOnDeviations) {
  VehicleModel m = make_one_trailer(0.19);
  PrivilegedChart chart = chart_at(m, Vec::Zero(4));
  StageCost cost = build_tailored(chart, ones(4), ones(2), true, 1.0);
  EXPECT_EQ(eval_in_chart(cost, Vec::Zero(4), Vec::Zero(2)), 0.0);
  std::mt19937_64 rng(64);
  for (int trial = 0; trial < 50; ++trial) {
    Vec z = random_vec(4, rng);
    if (z.cwiseAbs().maxCoeff() < 1e-6) continue;
    EXPECT_GT(eval_in_chart(cost, z, Vec::Zero(2)), 0.0);
  }
}

TEST(TailoredCost, GradientMatchesFiniteDifferences) {
  VehicleModel m = make_kinematic_car(0.2);
  PrivilegedChart chart = chart_at(m, Vec::Zero(4));
  StageCost cost =
      build_tailored(chart, {1.0, 2.0, 0.5, 3.0}, {0.1, 0.4}, true, 1.7);
  std::mt19937_64 rng(65);
  const double eps = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    Vec z = random_vec(4, rng);
    Vec u = random_vec(2, rng);
    double value;
    Vec gz, gu;
    eval_grad_in_chart(cost, z, u, value, gz, gu);
    EXPECT_NEAR(value, eval_in_chart(cost, z, u), 1e-12 * (1.0 + value));
    for (int j = 0; j < 4; ++j) {
      Vec zp = z, zm = z;
      zp[j] += eps;
      zm[j] -= eps;
      const double fd =
          (eval_in_chart(cost, zp, u) - eval_in_chart(cost, zm, u)) /
          (2.0 * eps);
      EXPECT_NEAR(gz[j], fd, 1e-5 * (1.0 + std::abs(fd)));
    }
    for (int j = 0; j < 2; ++j) {
      Vec up = u, um = u;
      up[j] += eps;
      um[j] -= eps;
      const double fd =
          (eval_in_chart(cost, z, up) - eval_in_chart(cost, z, um)) /
          (2.0 * eps);
      EXPECT_NEAR(gu[j], fd, 1e-5 * (1.0 + std::abs(fd)));
    }
  }
}

TEST(TailoredCost, RejectsInvalidWeights) {
  VehicleModel m = make_unicycle();
  PrivilegedChart chart = chart_at(m, Vec::Zero(3));
  EXPECT_THROW(build_tailored(chart, {-1.0, 1.0, 1.0}, ones(2), false, 1.0),
               InvalidArgument);
  EXPECT_THROW(build_tailored(chart, {0.0, 0.0, 0.0}, ones(2), false, 1.0),
               InvalidArgument);
  EXPECT_THROW(build_tailored(chart, ones(3), {0.0, 1.0}, false, 1.0),
               InvalidArgument);
  EXPECT_THROW(build_tailored(chart, {1.0, 1.0}, ones(2), false, 1.0),
               InvalidArgument);
  EXPECT_THROW(build_tailored(chart, ones(3), ones(2), false, -2.0),
               InvalidArgument);
}

TEST(QuadraticCost, MatchesBilinearForm) {
  Mat Q(3, 3), R(2, 2);
  Q << 2, 0.5, 0, 0.5, 1, 0, 0, 0, 3;
  R << 1, 0.2, 0.2, 0.5;
  StageCost cost = build_quadratic(Q, R);
  std::mt19937_64 rng(66);
  for (int trial = 0; trial < 20; ++trial) {
    Vec z = random_vec(3, rng);
    Vec u = random_vec(2, rng);
    const double expect = z.dot(Q * z) + u.dot(R * u);
    EXPECT_NEAR(eval_in_chart(cost, z, u), expect, 1e-12 * (1.0 + expect));
    double value;
    Vec gz, gu;
    eval_grad_in_chart(cost, z, u, value, gz, gu);
    EXPECT_LT((gz - 2.0 * (Q * z)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((gu - 2.0 * (R * u)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(QuadraticCost, RejectsIndefiniteMatrices) {
  Mat Q = Mat::Identity(3, 3);
  Q(2, 2) = -1.0;
  EXPECT_THROW(build_quadratic(Q, Mat::Identity(2, 2)), NotPositiveDefinite);
  Mat R = Mat::Zero(2, 2);
  EXPECT_THROW(build_quadratic(Mat::Identity(3, 3), R), NotPositiveDefinite);
  Mat notsym = Mat::Identity(3, 3);
  notsym(0, 1) = 0.3;
  EXPECT_THROW(build_quadratic(notsym, Mat::Identity(2, 2)),
               NotPositiveDefinite);
}

TEST(TailoredCost, CancellationPreservesSublevelOrdering) {
  // Cancelled exponents are the raw ones divided by their common factor, so
  // pointwise the two costs are monotone transforms of each other along any
  // ray through the origin; in particular they rank any two points on a ray
  // identically.
  VehicleModel m = make_kinematic_car(0.2);
  PrivilegedChart chart = chart_at(m, Vec::Zero(4));
  StageCost raw = build_tailored(chart, ones(4), ones(2), false, 1.0);
  StageCost gcd = build_tailored(chart, ones(4), ones(2), true, 1.0);
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 20; ++trial) {
    Vec z = random_vec(4, rng);
    Vec u = random_vec(2, rng);
    Vec zl(4);
    const double a = 0.5, b = 1.3;
    for (int j = 0; j < 4; ++j) zl[j] = std::pow(a, chart.weights[j]) * z[j];
    Vec zh(4);
    for (int j = 0; j < 4; ++j) zh[j] = std::pow(b, chart.weights[j]) * z[j];
    EXPECT_LT(eval_in_chart(raw, zl, a * u), eval_in_chart(raw, zh, b * u));
    EXPECT_LT(eval_in_chart(gcd, zl, a * u), eval_in_chart(gcd, zh, b * u));
  }
}

}  // namespace
}  // namespace nhmpc

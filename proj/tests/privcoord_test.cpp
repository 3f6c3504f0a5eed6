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

#include "core/privcoord.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "core/liealg.hpp"
#include "core/models.hpp"
#include "core/types.hpp"
#include "gtest/gtest.h"

namespace nhmpc {
namespace {

constexpr double kMapTol = 1e-12;
constexpr double kHomTol = 1e-10;
constexpr int kMaxDepth = 8;

Vec random_state(int n, std::mt19937_64& rng, double span = 1.0) {
  std::uniform_real_distribution<double> dist(-span, span);
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = dist(rng);
  return x;
}

PrivilegedChart chart_at(const VehicleModel& m, const Vec& d) {
  LieFiltration f = build_filtration(m, d, kMaxDepth);
  return build_chart(f, m);
}

// ---------------------------------------------------------------------------
// Closed-form coordinate maps.
// ---------------------------------------------------------------------------

TEST(Chart, UnicycleClosedFormAtGenericSetpoint) {
  VehicleModel m = make_unicycle();
  std::mt19937_64 rng(41);
  Vec d(3);
  d << 1.0, 1.0, M_PI / 4.0;
  PrivilegedChart chart = chart_at(m, d);
  const double c = std::cos(d[2]), s = std::sin(d[2]);
  for (int trial = 0; trial < 100; ++trial) {
    Vec x = d + random_state(3, rng);
    Vec z = chart.to_privileged(x);
    EXPECT_NEAR(z[0], (x[0] - d[0]) * c + (x[1] - d[1]) * s, kMapTol);
    EXPECT_NEAR(z[1], x[2] - d[2], kMapTol);
    EXPECT_NEAR(z[2], (x[0] - d[0]) * s - (x[1] - d[1]) * c, kMapTol);
  }
  // All coordinate weights are at most two, so the polynomial corrections
  // vanish identically and z coincides with the linear stage.
  for (const auto& h : chart.corrections) EXPECT_TRUE(h.is_zero());
  EXPECT_EQ(chart.weights, (std::vector<int>{1, 1, 2}));
}

TEST(Chart, KinematicCarClosedFormAtOrigin) {
  const double ell = 0.2;
  VehicleModel m = make_kinematic_car(ell);
  PrivilegedChart chart = chart_at(m, Vec::Zero(4));
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    Vec x = random_state(4, rng);
    Vec z = chart.to_privileged(x);
    EXPECT_NEAR(z[0], x[0], kMapTol);
    EXPECT_NEAR(z[1], x[3], kMapTol);
    EXPECT_NEAR(z[2], -ell * x[2], kMapTol);
    EXPECT_NEAR(z[3], ell * x[1], kMapTol);
  }
  EXPECT_EQ(chart.weights, (std::vector<int>{1, 1, 2, 3}));
  // At the straight-ahead setpoint the weight-three correction vanishes.
  std::mt19937_64 rng2(43);
  for (int trial = 0; trial < 20; ++trial) {
    Vec y = random_state(4, rng2, 0.5);
    for (const auto& h : chart.corrections)
      EXPECT_LT(std::abs(h.is_zero() ? 0.0 : h.eval(y.data())), 1e-8);
  }
}

TEST(Chart, OneTrailerClosedFormAtOrigin) {
  const double h1 = 0.19;
  VehicleModel m = make_one_trailer(h1);
  PrivilegedChart chart = chart_at(m, Vec::Zero(4));
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 100; ++trial) {
    Vec x = random_state(4, rng);
    Vec z = chart.to_privileged(x);
    EXPECT_NEAR(z[0], x[0], kMapTol);
    EXPECT_NEAR(z[1], x[2], kMapTol);
    EXPECT_NEAR(z[2], -x[1], kMapTol);
    EXPECT_NEAR(z[3], h1 * (x[1] - h1 * x[3]), kMapTol);
  }
  EXPECT_EQ(chart.weights, (std::vector<int>{1, 1, 2, 3}));
}

TEST(Chart, TwoTrailerClosedFormAtOrigin) {
  const double h1 = 0.2, h2 = 0.2;
  VehicleModel m = make_two_trailer(h1, h2);
  PrivilegedChart chart = chart_at(m, Vec::Zero(5));
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 100; ++trial) {
    Vec x = random_state(5, rng);
    Vec z = chart.to_privileged(x);
    EXPECT_NEAR(z[0], x[0], kMapTol);
    EXPECT_NEAR(z[1], x[2], kMapTol);
    EXPECT_NEAR(z[2], -x[1], kMapTol);
    EXPECT_NEAR(z[3],
                x[1] * (h1 + h2) - x[3] * h1 * (h1 + h2) - x[4] * h2 * h2,
                kMapTol);
    EXPECT_NEAR(z[4], -x[1] * h1 * h2 + x[3] * h1 * h1 * h2 + x[4] * h1 * h2 * h2,
                kMapTol);
  }
  EXPECT_EQ(chart.weights, (std::vector<int>{1, 1, 2, 3, 4}));
}

// ---------------------------------------------------------------------------
// Structural properties that hold at any regular setpoint.
// ---------------------------------------------------------------------------

TEST(Chart, RoundTripIsExact) {
  std::mt19937_64 rng(46);
  for (const auto& m : {make_unicycle(), make_kinematic_car(0.2),
                        make_one_trailer(0.19), make_two_trailer(0.2, 0.2)}) {
    Vec d = random_state(m.n_x, rng, 0.5);
    PrivilegedChart chart = chart_at(m, d);
    EXPECT_LT(chart.to_privileged(d).cwiseAbs().maxCoeff(), kMapTol);
    for (int trial = 0; trial < 50; ++trial) {
      Vec x = d + random_state(m.n_x, rng, 0.8);
      Vec z = chart.to_privileged(x);
      Vec back = chart.from_privileged(z);
      EXPECT_LT((back - x).cwiseAbs().maxCoeff(), kMapTol) << m.name;
      Vec y = chart.to_y(x);
      EXPECT_LT((chart.z_to_y(chart.y_to_z(y)) - y).cwiseAbs().maxCoeff(),
                kMapTol)
          << m.name;
    }
  }
}

TEST(Chart, PushforwardMatchesDirectionalDerivative) {
  std::mt19937_64 rng(47);
  const double eps = 1e-6;
  for (const auto& m : {make_unicycle(), make_kinematic_car(0.2),
                        make_one_trailer(0.19), make_two_trailer(0.2, 0.2)}) {
    Vec d = random_state(m.n_x, rng, 0.4);
    PrivilegedChart chart = chart_at(m, d);
    for (int trial = 0; trial < 10; ++trial) {
      Vec x = d + random_state(m.n_x, rng, 0.5);
      Vec z = chart.to_privileged(x);
      for (int i = 0; i < m.n_u; ++i) {
        Vec dir = field_value(m, i, x);
        Vec fd = (chart.to_privileged(x + eps * dir) -
                  chart.to_privileged(x - eps * dir)) /
                 (2.0 * eps);
        Vec zi = chart.push_control_field(i, z);
        EXPECT_LT((fd - zi).cwiseAbs().maxCoeff(), 1e-6) << m.name;
      }
    }
  }
}

TEST(Chart, PushforwardJacobianMatchesFiniteDifferences) {
  VehicleModel m = make_one_trailer(0.19);
  Vec d = Vec::Zero(4);
  PrivilegedChart chart = chart_at(m, d);
  std::mt19937_64 rng(48);
  const double eps = 1e-6;
  for (int trial = 0; trial < 5; ++trial) {
    Vec z = random_state(4, rng, 0.4);
    Mat G;
    std::vector<Mat> dG;
    chart.push_control_matrix_jac(z, G, dG);
    EXPECT_LT((G - chart.push_control_matrix(z)).cwiseAbs().maxCoeff(),
              kMapTol);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 4; ++j) {
        Vec zp = z, zm = z;
        zp[j] += eps;
        zm[j] -= eps;
        Vec col = (chart.push_control_field(i, zp) -
                   chart.push_control_field(i, zm)) /
                  (2.0 * eps);
        EXPECT_LT((col - dG[i].col(j)).cwiseAbs().maxCoeff(), 1e-6);
      }
    }
  }
}

TEST(Chart, PrivilegedCoordinatesRestoreFullOrders) {
  // At a heading aligned with the y axis the raw x coordinate only responds
  // at second order, yet in the adapted chart every coordinate attains its
  // weight exactly.
  VehicleModel m = make_unicycle();
  Vec d(3);
  d << 0.4, -0.2, M_PI / 2.0;
  LieFiltration f = build_filtration(m, d, kMaxDepth);
  EXPECT_EQ(nonholonomic_order(m, f, 0), 2);  // deficient in raw coordinates
  PrivilegedChart chart = build_chart(f, m);
  auto pushed = [&chart](int i, const Vec& z) {
    return chart.push_control_field(i, z);
  };
  for (int j = 0; j < 3; ++j) {
    EXPECT_EQ(nonholonomic_order_generic(pushed, 2, Vec::Zero(3), j, 4),
              chart.weights[j]);
  }
}

TEST(Chart, CarOrdersMatchWeightsAtGenericSetpoint) {
  VehicleModel m = make_kinematic_car(0.2);
  Vec d(4);
  d << 0.3, -0.2, 0.5, 0.35;  // bent steering: corrections become nontrivial
  PrivilegedChart chart = chart_at(m, d);
  bool has_nonzero_correction = false;
  for (const auto& h : chart.corrections)
    has_nonzero_correction = has_nonzero_correction || !h.is_zero();
  EXPECT_TRUE(has_nonzero_correction);
  std::mt19937_64 rng(49);
  for (int trial = 0; trial < 50; ++trial) {
    Vec x = d + random_state(4, rng, 0.6);
    EXPECT_LT((chart.from_privileged(chart.to_privileged(x)) - x)
                  .cwiseAbs()
                  .maxCoeff(),
              kMapTol);
  }
  auto pushed = [&chart](int i, const Vec& z) {
    return chart.push_control_field(i, z);
  };
  for (int j = 0; j < 4; ++j) {
    EXPECT_EQ(nonholonomic_order_generic(pushed, 2, Vec::Zero(4), j, 5),
              chart.weights[j]);
  }
}

TEST(Chart, TranslationChartIsIdentityFrame) {
  VehicleModel m = make_kinematic_car(0.2);
  Vec d(4);
  d << 0.1, 0.2, 0.3, 0.1;
  PrivilegedChart chart = make_translation_chart(m, d);
  EXPECT_LT((chart.A - Mat::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-15);
  std::mt19937_64 rng(50);
  Vec x = random_state(4, rng);
  EXPECT_LT((chart.to_privileged(x) - (x - d)).cwiseAbs().maxCoeff(), kMapTol);
  EXPECT_EQ(chart.weights, (std::vector<int>{1, 1, 1, 1}));
  // The pushforward of a translation is the field itself.
  Vec z = chart.to_privileged(x);
  EXPECT_LT((chart.push_control_field(0, z) - field_value(m, 0, x))
                .cwiseAbs()
                .maxCoeff(),
            kMapTol);
}

// ---------------------------------------------------------------------------
// Homogeneous approximations.
// ---------------------------------------------------------------------------

struct Monomial {
  std::vector<int> exps;
  double coeff;
};

void expect_poly(const Poly& p, const std::vector<Monomial>& expected,
                 double tol) {
  for (const auto& mono : expected) {
    auto it = p.terms().find(mono.exps);
    const double got = (it == p.terms().end()) ? 0.0 : it->second;
    EXPECT_NEAR(got, mono.coeff, tol);
  }
  // No unexpected terms above the tolerance.
  for (const auto& [e, c] : p.terms()) {
    bool known = false;
    for (const auto& mono : expected) known = known || mono.exps == e;
    if (!known) EXPECT_LT(std::abs(c), tol);
  }
}

TEST(Approx, UnicycleCoefficients) {
  VehicleModel m = make_unicycle();
  Vec d(3);
  d << 1.0, 1.0, M_PI / 4.0;
  PrivilegedChart chart = chart_at(m, d);
  HomogeneousApprox approx = extract_homogeneous_approx(chart, m);
  ASSERT_EQ(approx.fields.size(), 2u);
  expect_poly(approx.fields[0][0], {{{0, 0, 0}, 1.0}}, 1e-6);
  expect_poly(approx.fields[0][1], {}, 1e-6);
  expect_poly(approx.fields[0][2], {{{0, 1, 0}, -1.0}}, 1e-6);
  expect_poly(approx.fields[1][0], {}, 1e-6);
  expect_poly(approx.fields[1][1], {{{0, 0, 0}, 1.0}}, 1e-6);
  expect_poly(approx.fields[1][2], {}, 1e-6);
  EXPECT_EQ(approx.r, (std::vector<int>{1, 1, 2}));
  EXPECT_EQ(approx.s, (std::vector<int>{1, 1}));
  EXPECT_EQ(approx.tau, 0);
}

TEST(Approx, KinematicCarCoefficients) {
  VehicleModel m = make_kinematic_car(0.2);
  PrivilegedChart chart = chart_at(m, Vec::Zero(4));
  HomogeneousApprox approx = extract_homogeneous_approx(chart, m);
  expect_poly(approx.fields[0][0], {{{0, 0, 0, 0}, 1.0}}, 1e-6);
  expect_poly(approx.fields[0][1], {}, 1e-6);
  expect_poly(approx.fields[0][2], {{{0, 1, 0, 0}, -1.0}}, 1e-6);
  expect_poly(approx.fields[0][3], {{{0, 0, 1, 0}, -1.0}}, 1e-6);
  for (int j = 0; j < 4; ++j) {
    expect_poly(approx.fields[1][j],
                j == 1 ? std::vector<Monomial>{{{0, 0, 0, 0}, 1.0}}
                       : std::vector<Monomial>{},
                1e-6);
  }
}

TEST(Approx, OneTrailerCoefficients) {
  VehicleModel m = make_one_trailer(0.19);
  PrivilegedChart chart = chart_at(m, Vec::Zero(4));
  HomogeneousApprox approx = extract_homogeneous_approx(chart, m);
  // Same chained-integrator normal form as the car.
  expect_poly(approx.fields[0][0], {{{0, 0, 0, 0}, 1.0}}, 1e-6);
  expect_poly(approx.fields[0][2], {{{0, 1, 0, 0}, -1.0}}, 1e-6);
  expect_poly(approx.fields[0][3], {{{0, 0, 1, 0}, -1.0}}, 1e-6);
  expect_poly(approx.fields[1][1], {{{0, 0, 0, 0}, 1.0}}, 1e-6);
}

TEST(Approx, TwoTrailerCoefficients) {
  VehicleModel m = make_two_trailer(0.2, 0.2);
  PrivilegedChart chart = chart_at(m, Vec::Zero(5));
  HomogeneousApprox approx = extract_homogeneous_approx(chart, m);
  expect_poly(approx.fields[0][0], {{{0, 0, 0, 0, 0}, 1.0}}, 1e-6);
  expect_poly(approx.fields[0][1], {}, 1e-6);
  expect_poly(approx.fields[0][2], {{{0, 1, 0, 0, 0}, -1.0}}, 1e-6);
  expect_poly(approx.fields[0][3], {{{0, 0, 1, 0, 0}, -1.0}}, 1e-6);
  expect_poly(approx.fields[0][4], {{{0, 0, 0, 1, 0}, -1.0}}, 1e-6);
  expect_poly(approx.fields[1][1], {{{0, 0, 0, 0, 0}, 1.0}}, 1e-6);
}

TEST(Approx, HomogeneityResidualIsNumericallyZero) {
  std::mt19937_64 rng(51);
  for (const auto& m : {make_unicycle(), make_kinematic_car(0.2),
                        make_one_trailer(0.19), make_two_trailer(0.2, 0.2)}) {
    Vec d = Vec::Zero(m.n_x);
    PrivilegedChart chart = chart_at(m, d);
    HomogeneousApprox approx = extract_homogeneous_approx(chart, m);
    EXPECT_LT(verify_homogeneity(approx), kHomTol) << m.name;
  }
}

TEST(Approx, FieldsAreTriangularInWeightedDegree) {
  // Component j of every approximating field only carries monomials of
  // weighted degree w_j - 1, which forces triangularity and hence nilpotency
  // of the flows.
  VehicleModel m = make_two_trailer(0.2, 0.2);
  PrivilegedChart chart = chart_at(m, Vec::Zero(5));
  HomogeneousApprox approx = extract_homogeneous_approx(chart, m);
  for (const auto& field : approx.fields) {
    for (int j = 0; j < 5; ++j) {
      for (const auto& [e, c] : field[j].terms()) {
        int wdeg = 0;
        for (int k = 0; k < 5; ++k) wdeg += e[k] * approx.r[k];
        EXPECT_EQ(wdeg, approx.r[j] - 1);
      }
    }
  }
}

TEST(Approx, OverstatedWeightsAreRejected) {
  VehicleModel m = make_unicycle();
  LieFiltration f = build_filtration(m, Vec::Zero(3), kMaxDepth);
  PrivilegedChart chart = build_chart(f, m);
  chart.weights = {2, 1, 2};  // first coordinate actually has weight one
  EXPECT_THROW(extract_homogeneous_approx(chart, m), DivergentLimit);
}

TEST(Approx, CarBentSteeringSetpoint) {
  // Correction polynomials are active here; the approximation must still be
  // exactly homogeneous.
  VehicleModel m = make_kinematic_car(0.2);
  Vec d(4);
  d << 0.0, 0.0, 0.0, 0.35;
  PrivilegedChart chart = chart_at(m, d);
  HomogeneousApprox approx = extract_homogeneous_approx(chart, m);
  EXPECT_LT(verify_homogeneity(approx), kHomTol);
}

}  // namespace
}  // namespace nhmpc

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

#ifndef NHMPC_CORE_COST_HPP_
#define NHMPC_CORE_COST_HPP_

#include <vector>

#include "privcoord.hpp"
#include "types.hpp"

namespace nhmpc {

enum class CostKind { kTailored, kQuadratic };

// Stage cost. Tailored costs are evaluated in the privileged coordinates of
// their chart:
//   l(z, u) = sigma * (sum_i q_i |z_i|^{e_i} + sum_j r_in_j |u_j|^{f_j}),
// with e_i = d / w_i, f_j = d (unit input dilation weights), d = 2 * prod w_i,
// optionally divided by the common GCD of all exponents. Absolute-value bases
// keep the cost nonnegative for odd exponents; the derivative at a zero base
// is taken as 0 (the subgradient choice that makes the origin stationary).
// Quadratic costs are evaluated on the state deviation directly:
//   l(e, u) = e' Q e + u' R u.
struct StageCost {
  CostKind kind = CostKind::kQuadratic;

  // Tailored fields.
  const PrivilegedChart* chart = nullptr;  // borrowed; must outlive the cost
  std::vector<double> q;                   // state weights, >= 0, not all 0
  std::vector<double> r_in;                // input weights, > 0
  std::vector<int> e;                      // state exponents
  std::vector<int> f;                      // input exponents
  double sigma = 1.0;                      // global scale > 0
  int d_hom = 0;                           // uncancelled homogeneity degree

  // Quadratic fields.
  Mat Q, R;

  int n_x = 0, n_u = 0;
};

// Builds the tailored cost from the chart's coordinate weights. `scale`
// multiplies the whole stage cost (callers wanting eval(z0, 0) = 1 pass the
// reciprocal of the unscaled value).
StageCost build_tailored(const PrivilegedChart& chart,
                         const std::vector<double>& q,
                         const std::vector<double>& r_in, bool cancel_gcd,
                         double scale);

// Quadratic baseline; Q, R must be symmetric positive definite.
StageCost build_quadratic(const Mat& Q, const Mat& R);

// Evaluates at a state given in the cost's natural outer coordinates:
// tailored costs transform `state` (original coordinates) through their
// chart; quadratic costs expect the deviation from the setpoint.
double eval(const StageCost& cost, const Vec& state, const Vec& u);

// Evaluates at a point already expressed in the cost's working coordinates
// (privileged z for tailored, deviation for quadratic). The OCP hot path.
double eval_in_chart(const StageCost& cost, const Vec& z, const Vec& u);

// Value plus gradients in working coordinates.
void eval_grad_in_chart(const StageCost& cost, const Vec& z, const Vec& u,
                        double& value, Vec& gz, Vec& gu);

}  // namespace nhmpc

#endif  // NHMPC_CORE_COST_HPP_

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

#include "cost.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numeric>

namespace nhmpc {
namespace {

// |b|^p for integer p >= 0 and its derivative sign convention are handled by
// the callers; this is plain repeated squaring via std::pow.
inline double ipow_abs(double b, int p) { return std::pow(std::abs(b), p); }

}  // namespace

StageCost build_tailored(const PrivilegedChart& chart,
                         const std::vector<double>& q,
                         const std::vector<double>& r_in, bool cancel_gcd,
                         double scale) {
  const int n = chart.dim();
  const int m = chart.model->n_u;
  if (static_cast<int>(q.size()) != n)
    throw InvalidArgument("state weight vector must have one entry per state");
  if (static_cast<int>(r_in.size()) != m)
    throw InvalidArgument("input weight vector must have one entry per input");
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw InvalidArgument("cost scale must be positive and finite");
  bool any_q = false;
  for (double v : q) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidArgument("state weights must be finite and nonnegative");
    if (v > 0.0) any_q = true;
  }
  if (!any_q) throw InvalidArgument("state weights must not all be zero");
  for (double v : r_in) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw InvalidArgument("input weights must be finite and positive");
  }

  StageCost cost;
  cost.kind = CostKind::kTailored;
  cost.chart = &chart;
  cost.q = q;
  cost.r_in = r_in;
  cost.sigma = scale;
  cost.n_x = n;
  cost.n_u = m;

  long long d = 2;
  for (int w : chart.weights) d *= w;
  if (d <= 0 || d > 1000000)
    throw Error("homogeneity degree out of supported range");
  cost.d_hom = static_cast<int>(d);

  cost.e.resize(n);
  for (int i = 0; i < n; ++i) {
    if (d % chart.weights[i] != 0)
      throw Error("state exponent is not an integer");
    cost.e[i] = static_cast<int>(d / chart.weights[i]);
  }
  cost.f.assign(m, static_cast<int>(d));  // input dilation weights are all 1

  if (cancel_gcd) {
    int g = 0;
    for (int v : cost.e) g = std::gcd(g, v);
    for (int v : cost.f) g = std::gcd(g, v);
    if (g > 1) {
      for (int& v : cost.e) v /= g;
      for (int& v : cost.f) v /= g;
    }
  }
  for (int v : cost.e)
    if (v < 1) throw Error("state exponent dropped below one");
  return cost;
}

StageCost build_quadratic(const Mat& Q, const Mat& R) {
  if (Q.rows() != Q.cols() || R.rows() != R.cols())
    throw InvalidArgument("weight matrices must be square");
  const double q_asym = (Q - Q.transpose()).cwiseAbs().maxCoeff();
  const double r_asym = (R - R.transpose()).cwiseAbs().maxCoeff();
  if (q_asym > 1e-12 * (1.0 + Q.cwiseAbs().maxCoeff()) ||
      r_asym > 1e-12 * (1.0 + R.cwiseAbs().maxCoeff()))
    throw NotPositiveDefinite("weight matrix is not symmetric");
  Eigen::LLT<Mat> lq(Q), lr(R);
  if (lq.info() != Eigen::Success || Q.diagonal().minCoeff() <= 0.0)
    throw NotPositiveDefinite("state weight matrix is not positive definite");
  if (lr.info() != Eigen::Success || R.diagonal().minCoeff() <= 0.0)
    throw NotPositiveDefinite("input weight matrix is not positive definite");

  StageCost cost;
  cost.kind = CostKind::kQuadratic;
  cost.Q = Q;
  cost.R = R;
  cost.n_x = static_cast<int>(Q.rows());
  cost.n_u = static_cast<int>(R.rows());
  return cost;
}

double eval(const StageCost& cost, const Vec& state, const Vec& u) {
  if (state.size() != cost.n_x || u.size() != cost.n_u)
    throw InvalidArgument("state or input dimension mismatch in cost");
  if (cost.kind == CostKind::kTailored)
    return eval_in_chart(cost, cost.chart->to_privileged(state), u);
  return eval_in_chart(cost, state, u);
}

double eval_in_chart(const StageCost& cost, const Vec& z, const Vec& u) {
  if (z.size() != cost.n_x || u.size() != cost.n_u)
    throw InvalidArgument("state or input dimension mismatch in cost");
  if (cost.kind == CostKind::kQuadratic)
    return z.dot(cost.Q * z) + u.dot(cost.R * u);
  double s = 0.0;
  for (int i = 0; i < cost.n_x; ++i)
    if (cost.q[i] != 0.0) s += cost.q[i] * ipow_abs(z[i], cost.e[i]);
  for (int j = 0; j < cost.n_u; ++j)
    s += cost.r_in[j] * ipow_abs(u[j], cost.f[j]);
  return cost.sigma * s;
}

void eval_grad_in_chart(const StageCost& cost, const Vec& z, const Vec& u,
                        double& value, Vec& gz, Vec& gu) {
  if (z.size() != cost.n_x || u.size() != cost.n_u)
    throw InvalidArgument("state or input dimension mismatch in cost");
  gz.setZero(cost.n_x);
  gu.setZero(cost.n_u);
  if (cost.kind == CostKind::kQuadratic) {
    const Vec qz = cost.Q * z;
    const Vec ru = cost.R * u;
    value = z.dot(qz) + u.dot(ru);
    gz = 2.0 * qz;
    gu = 2.0 * ru;
    return;
  }
  double s = 0.0;
  for (int i = 0; i < cost.n_x; ++i) {
    if (cost.q[i] == 0.0) continue;
    const double a = std::abs(z[i]);
    s += cost.q[i] * ipow_abs(z[i], cost.e[i]);
    if (z[i] != 0.0) {
      gz[i] = cost.sigma * cost.q[i] * cost.e[i] *
              std::pow(a, cost.e[i] - 1) * (z[i] > 0.0 ? 1.0 : -1.0);
    }
  }
  for (int j = 0; j < cost.n_u; ++j) {
    const double a = std::abs(u[j]);
    s += cost.r_in[j] * ipow_abs(u[j], cost.f[j]);
    if (u[j] != 0.0) {
      gu[j] = cost.sigma * cost.r_in[j] * cost.f[j] *
              std::pow(a, cost.f[j] - 1) * (u[j] > 0.0 ? 1.0 : -1.0);
    }
  }
  value = cost.sigma * s;
}

}  // namespace nhmpc

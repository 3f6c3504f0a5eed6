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

#include "privcoord.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "dual.hpp"

namespace nhmpc {
namespace {

constexpr double kExactCoefDust = 1e-12;  // dual-path coefficients below this
                                          // are floating-point dust
constexpr double kFdCoefDust = 1e-7;      // central-difference noise floor
constexpr double kExtractZeroTol = 1e-8;
constexpr double kExtractResidualTol = 1e-6;
constexpr double kSampleLo = 0.025;  // sample magnitudes per coordinate
constexpr double kSampleHi = 0.1;
constexpr int kBaseDraws = 4;
constexpr std::uint64_t kExtractSeed = 0x517cc1b727220a95ull;
constexpr std::uint64_t kHomogeneitySeed = 0x2545f4914f6cdd1dull;
constexpr int kHomogeneitySamples = 200;

// ---------------------------------------------------------------------------
// Transported control fields, scalar-generic for built-in models.

template <class T>
void chart_y_from_z(const PrivilegedChart& c, const T* z, std::vector<T>& y) {
  const int n = c.dim();
  y.assign(n, T(0.0));
  for (int j = 0; j < n; ++j) {
    // h_j reads only y_0..y_{j-1}, which are already final.
    y[j] = z[j] + c.corrections[j].template eval<T>(y.data());
  }
}

template <class T>
void push_all_fields_t(const PrivilegedChart& c, const T* z,
                       std::vector<T>& out) {
  const int n = c.dim();
  const int m = c.model->n_u;
  std::vector<T> y, x(n), v(n), vy(n);
  chart_y_from_z(c, z, y);
  for (int k = 0; k < n; ++k) {
    T acc(c.d(k));
    for (int q = 0; q < n; ++q) acc = acc + c.A(k, q) * y[q];
    x[k] = acc;
  }
  out.assign(static_cast<size_t>(n) * m, T(0.0));
  for (int i = 0; i < m; ++i) {
    eval_builtin_field(c.model->kind, c.model->params.data(), i, x.data(),
                       v.data());
    for (int k = 0; k < n; ++k) {
      T acc(0.0);
      for (int q = 0; q < n; ++q) acc = acc + c.A_inv(k, q) * v[q];
      vy[k] = acc;
    }
    for (int j = 0; j < n; ++j) {
      T acc = vy[j];
      for (int k = 0; k < j; ++k) {
        const Poly& dh = c.correction_derivs[j][k];
        if (!dh.is_zero()) acc = acc - dh.template eval<T>(y.data()) * vy[k];
      }
      out[static_cast<size_t>(i) * n + j] = acc;
    }
  }
}

// Double-only path that also serves custom models.
Mat push_matrix_generic(const PrivilegedChart& c, const Vec& z) {
  const int n = c.dim();
  const int m = c.model->n_u;
  const Vec y = c.z_to_y(z);
  const Vec x = c.d + c.A * y;
  Mat G(n, m);
  for (int i = 0; i < m; ++i) {
    const Vec vy = c.A_inv * field_value(*c.model, i, x);
    Vec vz = vy;
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < j; ++k) {
        const Poly& dh = c.correction_derivs[j][k];
        if (!dh.is_zero()) vz(j) -= dh.eval<double>(y.data()) * vy(k);
      }
    }
    G.col(i) = vz;
  }
  return G;
}

// ---------------------------------------------------------------------------
// Step-2 machinery.

struct FrameFieldFunctor {
  const LieFiltration* filt;
  const VehicleModel* model;
  const Mat* A;
  const Mat* A_inv;

  // Y_i(y) = A^{-1} W_i(d + A y) with W_i the i-th adapted-frame word.
  template <class T>
  std::vector<T> operator()(int i, const std::vector<T>& y) const {
    const int n = model->n_x;
    std::vector<T> x(n), w, r(n);
    for (int k = 0; k < n; ++k) {
      T acc(filt->base_point(k));
      for (int q = 0; q < n; ++q) acc = acc + (*A)(k, q) * y[q];
      x[k] = acc;
    }
    word_value_rec(model->kind, model->params.data(), *filt->frame[i].word, x,
                   w);
    for (int k = 0; k < n; ++k) {
      T acc(0.0);
      for (int q = 0; q < n; ++q) acc = acc + (*A_inv)(k, q) * w[q];
      r[k] = acc;
    }
    return r;
  }
};

struct PolyFunctor {
  const Poly* g;
  template <class T>
  T operator()(const std::vector<T>& y) const {
    return g->template eval<T>(y.data());
  }
};

// Frame fields in y-coordinates for custom models (plain doubles).
Vec frame_field_fd(const LieFiltration& filt, const VehicleModel& model,
                   const Mat& A, const Mat& A_inv, int i, const Vec& y) {
  const Vec x = filt.base_point + A * y;
  return A_inv * word_value(model, *filt.frame[i].word, x);
}

double nested_fd_poly(const LieFiltration& filt, const VehicleModel& model,
                      const Mat& A, const Mat& A_inv, const Poly& g,
                      const int* seq, int len, const Vec& y) {
  if (len == 0) return g.eval(y);
  constexpr double h = 1e-4;
  const Vec v = frame_field_fd(filt, model, A, A_inv, seq[0], y);
  return (nested_fd_poly(filt, model, A, A_inv, g, seq + 1, len - 1,
                         y + h * v) -
          nested_fd_poly(filt, model, A, A_inv, g, seq + 1, len - 1,
                         y - h * v)) /
         (2.0 * h);
}

// Enumerates multi-indices alpha over positions 0..top-1 with |alpha| = k.
void for_each_multi_index(int top, int k,
                          const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> alpha(top, 0);
  std::function<void(int, int)> rec = [&](int pos, int remaining) {
    if (pos == top - 1) {
      alpha[pos] = remaining;
      fn(alpha);
      return;
    }
    for (int a = 0; a <= remaining; ++a) {
      alpha[pos] = a;
      rec(pos + 1, remaining - a);
    }
  };
  if (top > 0 && k >= 0) rec(0, k);
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// ---------------------------------------------------------------------------
// Monomial dictionary of a fixed weighted degree.

void enumerate_weighted_monomials(const std::vector<int>& w, int target,
                                  std::vector<std::vector<int>>& out) {
  const int n = static_cast<int>(w.size());
  std::vector<int> e(n, 0);
  std::function<void(int, int)> rec = [&](int pos, int remaining) {
    if (pos == n) {
      if (remaining == 0) out.push_back(e);
      return;
    }
    for (int a = 0; a * w[pos] <= remaining; ++a) {
      e[pos] = a;
      rec(pos + 1, remaining - a * w[pos]);
      e[pos] = 0;
    }
  };
  rec(0, target);
}

}  // namespace

// ---------------------------------------------------------------------------
// PrivilegedChart maps.

Vec PrivilegedChart::to_y(const Vec& x) const {
  if (x.size() != d.size()) {
    throw InvalidArgument("chart: state dimension mismatch");
  }
  return A_inv * (x - d);
}

Vec PrivilegedChart::y_to_z(const Vec& y) const {
  const int n = dim();
  Vec z(n);
  for (int j = 0; j < n; ++j) {
    z(j) = y(j) - corrections[j].eval<double>(y.data());
  }
  return z;
}

Vec PrivilegedChart::z_to_y(const Vec& z) const {
  const int n = dim();
  std::vector<double> y;
  chart_y_from_z(*this, z.data(), y);
  return Eigen::Map<const Vec>(y.data(), n);
}

Vec PrivilegedChart::to_privileged(const Vec& x) const { return y_to_z(to_y(x)); }

Vec PrivilegedChart::from_privileged(const Vec& z) const {
  return d + A * z_to_y(z);
}

Vec PrivilegedChart::push_control_field(int i, const Vec& z) const {
  if (i < 0 || i >= model->n_u) {
    throw InvalidArgument("push_control_field: input index out of range");
  }
  return push_control_matrix(z).col(i);
}

Mat PrivilegedChart::push_control_matrix(const Vec& z) const {
  if (z.size() != d.size()) {
    throw InvalidArgument("push_control_matrix: dimension mismatch");
  }
  return push_matrix_generic(*this, z);
}

void PrivilegedChart::push_control_matrix_jac(const Vec& z, Mat& G,
                                              std::vector<Mat>& dG) const {
  const int n = dim();
  const int m = model->n_u;
  G = push_control_matrix(z);
  dG.assign(m, Mat::Zero(n, n));
  if (model->kind != VehicleKind::kCustom) {
    std::vector<Dual<double>> zd(n), out;
    for (int q = 0; q < n; ++q) {
      for (int k = 0; k < n; ++k) zd[k] = Dual<double>(z(k), k == q ? 1.0 : 0.0);
      push_all_fields_t(*this, zd.data(), out);
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
          dG[i](j, q) = out[static_cast<size_t>(i) * n + j].d;
        }
      }
    }
    return;
  }
  const double h = 1e-6 * (1.0 + z.lpNorm<Eigen::Infinity>());
  for (int q = 0; q < n; ++q) {
    Vec zp = z, zm = z;
    zp(q) += h;
    zm(q) -= h;
    const Mat Gp = push_control_matrix(zp);
    const Mat Gm = push_control_matrix(zm);
    for (int i = 0; i < m; ++i) dG[i].col(q) = (Gp.col(i) - Gm.col(i)) / (2.0 * h);
  }
}

// ---------------------------------------------------------------------------

Vec step1_transform(const LieFiltration& filtration, const Vec& x) {
  const int n = static_cast<int>(filtration.base_point.size());
  if (static_cast<int>(filtration.frame.size()) != n) {
    throw InvalidArgument("step1_transform: incomplete frame");
  }
  Mat A(n, n);
  for (int j = 0; j < n; ++j) A.col(j) = filtration.frame[j].value_at_base;
  Eigen::FullPivLU<Mat> lu(A);
  if (!lu.isInvertible()) {
    throw Error("step1_transform: adapted frame is singular");
  }
  return lu.solve(x - filtration.base_point);
}

std::vector<Poly> step2_corrections(const LieFiltration& filtration,
                                    const VehicleModel& model) {
  const int n = model.n_x;
  if (static_cast<int>(filtration.frame.size()) != n) {
    throw InvalidArgument("step2_corrections: incomplete frame");
  }
  Mat A(n, n);
  for (int j = 0; j < n; ++j) A.col(j) = filtration.frame[j].value_at_base;
  Eigen::FullPivLU<Mat> lu(A);
  if (!lu.isInvertible()) {
    throw Error("step2_corrections: adapted frame is singular");
  }
  const Mat A_inv = lu.inverse();
  const std::vector<int>& w = filtration.weights;
  const bool exact = model.kind != VehicleKind::kCustom;
  const double dust = exact ? kExactCoefDust : kFdCoefDust;

  std::vector<Poly> corrections(n, Poly(n));
  FrameFieldFunctor frame{&filtration, &model, &A, &A_inv};
  const std::vector<double> y0(n, 0.0);
  const Vec y0v = Vec::Zero(n);

  for (int j = 0; j < n; ++j) {
    if (w[j] < 3) continue;
    // g starts as y_j and loses each correction layer as it is found.
    Poly g = Poly::variable(n, j);
    Poly h_total(n);
    for (int k = 2; k <= w[j] - 1; ++k) {
      Poly h_jk(n);
      for_each_multi_index(j, k, [&](const std::vector<int>& alpha) {
        int wa = 0;
        for (int i = 0; i < j; ++i) wa += alpha[i] * w[i];
        if (wa >= w[j]) return;
        // Derivative sequence: Y_1^{a_1} ... Y_{j-1}^{a_{j-1}}, rightmost
        // factor applied first (innermost).
        std::vector<int> seq;
        for (int i = 0; i < j; ++i) {
          for (int rep = 0; rep < alpha[i]; ++rep) seq.push_back(i);
        }
        double value;
        if (exact) {
          PolyFunctor fun{&g};
          value = nested_lie_derivative(frame, fun, seq.data(),
                                        static_cast<int>(seq.size()), y0);
        } else {
          value = nested_fd_poly(filtration, model, A, A_inv, g, seq.data(),
                                 static_cast<int>(seq.size()), y0v);
        }
        double fact = 1.0;
        for (int i = 0; i < j; ++i) fact *= factorial(alpha[i]);
        const double coef = value / fact;
        if (std::abs(coef) > dust) {
          std::vector<int> e(n, 0);
          for (int i = 0; i < j; ++i) e[i] = alpha[i];
          h_jk.add_term(e, coef);
        }
      });
      g -= h_jk;
      h_total += h_jk;
    }
    corrections[j] = h_total;
  }
  return corrections;
}

PrivilegedChart build_chart(const LieFiltration& filtration,
                            const VehicleModel& model) {
  const int n = model.n_x;
  if (filtration.model != &model && filtration.model &&
      filtration.model->n_x != model.n_x) {
    throw InvalidArgument("build_chart: filtration belongs to another model");
  }
  PrivilegedChart c;
  c.model = &model;
  c.filtration = filtration;
  c.filtration.model = &model;
  c.d = filtration.base_point;
  c.A.resize(n, n);
  for (int j = 0; j < n; ++j) c.A.col(j) = filtration.frame[j].value_at_base;
  Eigen::FullPivLU<Mat> lu(c.A);
  if (!lu.isInvertible()) {
    throw Error("build_chart: adapted frame is singular");
  }
  c.A_inv = lu.inverse();
  c.weights = filtration.weights;
  c.corrections = step2_corrections(filtration, model);
  c.correction_derivs.assign(n, std::vector<Poly>(n, Poly(n)));
  for (int j = 0; j < n; ++j) {
    for (const auto& [e, coef] : c.corrections[j].terms()) {
      for (int k = j; k < n; ++k) {
        if (e[k] != 0) {
          throw Error("build_chart: correction breaks triangular structure");
        }
      }
    }
    for (int k = 0; k < j; ++k) {
      c.correction_derivs[j][k] = c.corrections[j].derivative(k);
    }
  }
  return c;
}

PrivilegedChart make_translation_chart(const VehicleModel& model,
                                       const Vec& d) {
  if (d.size() != model.n_x) {
    throw InvalidArgument("make_translation_chart: dimension mismatch");
  }
  const int n = model.n_x;
  PrivilegedChart c;
  c.model = &model;
  c.d = d;
  c.A = Mat::Identity(n, n);
  c.A_inv = Mat::Identity(n, n);
  c.weights.assign(n, 1);
  c.corrections.assign(n, Poly(n));
  c.correction_derivs.assign(n, std::vector<Poly>(n, Poly(n)));
  c.filtration.model = &model;
  c.filtration.base_point = d;
  return c;
}

// ---------------------------------------------------------------------------

HomogeneousApprox extract_homogeneous_approx(const PrivilegedChart& chart,
                                             const VehicleModel& model) {
  const int n = chart.dim();
  const int m = model.n_u;
  const std::vector<int>& w = chart.weights;
  if (static_cast<int>(w.size()) != n) {
    throw InvalidArgument("extract_homogeneous_approx: missing weights");
  }

  // Sign-symmetric sample set: every draw of coordinate magnitudes appears
  // with all 2^n sign patterns, so polynomial contaminants of higher
  // weighted degree left over by the extrapolation are exactly orthogonal
  // to the fitted dictionary (their projections cancel in sign pairs).
  std::mt19937_64 rng(kExtractSeed);
  std::uniform_real_distribution<double> mag(kSampleLo, kSampleHi);
  const int orbit = 1 << n;
  const int n_samples = kBaseDraws * orbit;
  std::vector<Vec> samples;
  samples.reserve(n_samples);
  for (int b = 0; b < kBaseDraws; ++b) {
    Vec base(n);
    for (int k = 0; k < n; ++k) base(k) = mag(rng);
    for (int sgn = 0; sgn < orbit; ++sgn) {
      Vec z = base;
      for (int k = 0; k < n; ++k) {
        if (sgn & (1 << k)) z(k) = -z(k);
      }
      samples.push_back(z);
    }
  }

  // Three dilation levels per sample; each level needs one field-matrix
  // evaluation shared by all (i, j) pairs.
  const double eps0 = 1e-2;
  const double eps_levels[3] = {eps0, eps0 / 2.0, eps0 / 4.0};
  std::vector<std::array<Mat, 3>> G(n_samples);
  for (int s = 0; s < n_samples; ++s) {
    for (int lev = 0; lev < 3; ++lev) {
      Vec zd(n);
      for (int k = 0; k < n; ++k) {
        zd(k) = std::pow(eps_levels[lev], w[k]) * samples[s](k);
      }
      G[s][lev] = chart.push_control_matrix(zd);
    }
  }

  HomogeneousApprox approx;
  approx.fields.assign(m, std::vector<Poly>(n, Poly(n)));
  approx.r = w;
  approx.s.assign(m, 1);
  approx.tau = 0;

  for (int j = 0; j < n; ++j) {
    std::vector<std::vector<int>> dict;
    enumerate_weighted_monomials(w, w[j] - 1, dict);
    const int nd = static_cast<int>(dict.size());
    Mat M(n_samples, nd);
    for (int s = 0; s < n_samples; ++s) {
      for (int t = 0; t < nd; ++t) {
        double val = 1.0;
        for (int k = 0; k < n; ++k) {
          for (int p = 0; p < dict[t][k]; ++p) val *= samples[s](k);
        }
        M(s, t) = val;
      }
    }
    const Eigen::ColPivHouseholderQR<Mat> qr(M);
    for (int i = 0; i < m; ++i) {
      Vec L(n_samples);
      for (int s = 0; s < n_samples; ++s) {
        const double f0 = std::pow(eps_levels[0], 1 - w[j]) * G[s][0](j, i);
        const double f1 = std::pow(eps_levels[1], 1 - w[j]) * G[s][1](j, i);
        const double f2 = std::pow(eps_levels[2], 1 - w[j]) * G[s][2](j, i);
        const double t11 = 2.0 * f1 - f0;
        const double t12 = 2.0 * f2 - f1;
        L(s) = (4.0 * t12 - t11) / 3.0;
      }
      if (!L.allFinite()) {
        throw DivergentLimit("dilation limit diverges for field " +
                             std::to_string(i + 1) + ", component " +
                             std::to_string(j + 1));
      }
      const Vec c = qr.solve(L);
      const double scale = 1.0 + L.lpNorm<Eigen::Infinity>();
      const double resid = (M * c - L).lpNorm<Eigen::Infinity>() / scale;
      if (resid > kExtractResidualTol) {
        throw DivergentLimit(
            "dilation limit is not a weighted-homogeneous polynomial for "
            "field " +
            std::to_string(i + 1) + ", component " + std::to_string(j + 1) +
            " (fit residual " + std::to_string(resid) + ")");
      }
      Poly p(n);
      for (int t = 0; t < nd; ++t) {
        if (std::abs(c(t)) >= kExtractZeroTol) p.add_term(dict[t], c(t));
      }
      approx.fields[i][j] = p;
    }
  }
  return approx;
}

double verify_homogeneity(const HomogeneousApprox& approx) {
  if (approx.fields.empty() || approx.fields[0].empty()) {
    throw InvalidArgument("verify_homogeneity: empty approximation");
  }
  const int m = static_cast<int>(approx.fields.size());
  const int n = static_cast<int>(approx.fields[0].size());
  std::mt19937_64 rng(kHomogeneitySeed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < kHomogeneitySamples; ++trial) {
    Vec z(n), u(m);
    for (int k = 0; k < n; ++k) z(k) = unit(rng);
    for (int i = 0; i < m; ++i) u(i) = unit(rng);
    const double alpha = 2.0 * (1.0 - u01(rng));  // in (0, 2]
    Vec zd(n), ud(m);
    for (int k = 0; k < n; ++k) zd(k) = std::pow(alpha, approx.r[k]) * z(k);
    for (int i = 0; i < m; ++i) ud(i) = std::pow(alpha, approx.s[i]) * u(i);
    Vec lhs = Vec::Zero(n), rhs = Vec::Zero(n);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        lhs(j) += approx.fields[i][j].eval(zd) * ud(i);
        rhs(j) += approx.fields[i][j].eval(z) * u(i);
      }
    }
    const double at = std::pow(alpha, approx.tau);
    for (int j = 0; j < n; ++j) {
      rhs(j) *= at * std::pow(alpha, approx.r[j]);
    }
    worst = std::max(worst, (lhs - rhs).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

}  // namespace nhmpc

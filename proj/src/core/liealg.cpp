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

#include "liealg.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <random>
#include <vector>

namespace nhmpc {
namespace {

constexpr double kRankRelTol = 1e-9;
constexpr double kOrderStep = 1e-4;
constexpr double kOrderZeroTol = 1e-8;
constexpr double kOrderNonzeroTol = 1e-6;
constexpr double kIrregularRadius = 1e-4;
constexpr int kIrregularProbes = 8;
constexpr std::uint64_t kIrregularSeed = 0x9e3779b97f4a7c15ull;

int matrix_rank(const Mat& m) {
  if (m.cols() == 0 || m.rows() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  if (smax <= 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > kRankRelTol * smax) ++rank;
  }
  return rank;
}

// Jacobian-vector product of a bracket word for models without an exact
// path: the Jacobian of a leaf comes from the model (analytic or its own
// finite differences), compound words use a directional central difference.
Vec word_jvp_fd(const VehicleModel& model, const BracketWord& w, const Vec& x,
                const Vec& v);

Vec word_value_fd(const VehicleModel& model, const BracketWord& w,
                  const Vec& x) {
  if (w.is_leaf()) return field_value(model, w.generator, x);
  const Vec va = word_value_fd(model, *w.a, x);
  const Vec vb = word_value_fd(model, *w.b, x);
  return word_jvp_fd(model, *w.b, x, va) - word_jvp_fd(model, *w.a, x, vb);
}

Vec word_jvp_fd(const VehicleModel& model, const BracketWord& w, const Vec& x,
                const Vec& v) {
  if (w.is_leaf()) return field_jacobian(model, w.generator, x) * v;
  const double vn = v.lpNorm<Eigen::Infinity>();
  if (vn == 0.0) return Vec::Zero(x.size());
  const Vec dir = v / vn;
  const double h = 1e-6 * (1.0 + x.lpNorm<Eigen::Infinity>());
  const Vec fp = word_value_fd(model, w, x + h * dir);
  const Vec fm = word_value_fd(model, w, x - h * dir);
  return (vn / (2.0 * h)) * (fp - fm);
}

Vec word_value_exact(const VehicleModel& model, const BracketWord& w,
                     const Vec& x) {
  if (w.length - 1 > kMaxNest) {
    throw Error("bracket word of length " + std::to_string(w.length) +
                " exceeds the exact-evaluation budget");
  }
  std::vector<double> xv(x.data(), x.data() + x.size());
  std::vector<double> out;
  word_value_rec(model.kind, model.params.data(), w, xv, out);
  return Eigen::Map<const Vec>(out.data(), static_cast<Eigen::Index>(out.size()));
}

struct SweepResult {
  std::vector<FrameElement> frame;
  std::vector<int> growth;
  int degree = 0;
};

// Greedy sweep; throws NotControllableAtDepth when the span cannot reach
// full rank. Does not perform the regularity probe.
SweepResult greedy_sweep(const VehicleModel& model, const Vec& d,
                         int max_depth) {
  const int n = model.n_x;
  SweepResult res;
  Mat accepted(n, 0);
  int rank = 0;
  std::vector<std::vector<WordPtr>> by_depth(1);  // by_depth[k] : depth k+1

  auto try_accept = [&](const WordPtr& word, int depth) {
    const Vec v = word_value(model, *word, d);
    Mat aug(n, accepted.cols() + 1);
    aug.leftCols(accepted.cols()) = accepted;
    aug.col(accepted.cols()) = v;
    if (matrix_rank(aug) > rank) {
      accepted = std::move(aug);
      ++rank;
      res.frame.push_back(FrameElement{word, v, depth});
      while (static_cast<int>(by_depth.size()) < depth) by_depth.emplace_back();
      by_depth[depth - 1].push_back(word);
      return true;
    }
    return false;
  };

  for (int depth = 1; depth <= max_depth && rank < n; ++depth) {
    const int rank_before = rank;
    if (depth == 1) {
      for (int i = 0; i < model.n_u && rank < n; ++i) {
        try_accept(make_leaf(i), 1);
      }
    } else {
      if (static_cast<int>(by_depth.size()) < depth - 1 ||
          by_depth[depth - 2].empty()) {
        throw NotControllableAtDepth(max_depth);
      }
      // Copy: try_accept may grow by_depth while we iterate.
      const std::vector<WordPtr> prev = by_depth[depth - 2];
      for (int i = 0; i < model.n_u && rank < n; ++i) {
        for (const WordPtr& w : prev) {
          if (try_accept(make_bracket(make_leaf(i), w), depth)) {
            if (rank == n) break;
          }
        }
      }
    }
    res.growth.push_back(rank);
    if (rank == n) {
      res.degree = depth;
      return res;
    }
    if (rank == rank_before) {
      // No candidate at this depth added anything; deeper brackets are
      // brackets of these same values and cannot enlarge the span either.
      throw NotControllableAtDepth(max_depth);
    }
  }
  throw NotControllableAtDepth(max_depth);
}

double nested_central_fd(const std::function<Vec(int, const Vec&)>& field,
                         const int* seq, int len, int j, double center_j,
                         const Vec& x) {
  if (len == 0) return x(j) - center_j;
  const Vec v = field(seq[0], x);
  const Vec xp = x + kOrderStep * v;
  const Vec xm = x - kOrderStep * v;
  return (nested_central_fd(field, seq + 1, len - 1, j, center_j, xp) -
          nested_central_fd(field, seq + 1, len - 1, j, center_j, xm)) /
         (2.0 * kOrderStep);
}

}  // namespace

Vec lie_bracket(const FieldWithJacobian& X, const FieldWithJacobian& Y,
                const Vec& x) {
  if (!X.value || !X.jacobian || !Y.value || !Y.jacobian) {
    throw InvalidArgument("lie_bracket: both fields need value and jacobian");
  }
  return Y.jacobian(x) * X.value(x) - X.jacobian(x) * Y.value(x);
}

Vec word_value(const VehicleModel& model, const BracketWord& word,
               const Vec& x) {
  if (x.size() != model.n_x) {
    throw InvalidArgument("word_value: state dimension mismatch");
  }
  if (word.is_leaf() && word.generator >= model.n_u) {
    throw InvalidArgument("word_value: generator index out of range");
  }
  if (model.kind != VehicleKind::kCustom && word.length - 1 <= kMaxNest) {
    return word_value_exact(model, word, x);
  }
  return word_value_fd(model, word, x);
}

LieFiltration build_filtration(const VehicleModel& model, const Vec& d,
                               int max_depth) {
  if (d.size() != model.n_x) {
    throw InvalidArgument("build_filtration: base point dimension mismatch");
  }
  if (max_depth < 1) {
    throw InvalidArgument("build_filtration: max_depth must be at least 1");
  }
  SweepResult base = greedy_sweep(model, d, max_depth);

  // Regularity probe: the growth vector must be locally constant.
  std::mt19937_64 rng(kIrregularSeed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int probe = 0; probe < kIrregularProbes; ++probe) {
    Vec dp = d;
    for (int j = 0; j < model.n_x; ++j) dp(j) += kIrregularRadius * unit(rng);
    bool same = true;
    try {
      const SweepResult near = greedy_sweep(model, dp, max_depth);
      same = (near.growth == base.growth);
    } catch (const NotControllableAtDepth&) {
      same = false;
    }
    if (!same) throw IrregularPoint("growth vector changes near the base point");
  }

  LieFiltration f;
  f.model = &model;
  f.base_point = d;
  f.frame = std::move(base.frame);
  f.growth = std::move(base.growth);
  f.degree = base.degree;
  f.weights.reserve(f.frame.size());
  for (const FrameElement& e : f.frame) f.weights.push_back(e.depth);
  return f;
}

bool larc_check(const VehicleModel& model, const Vec& d, int max_depth) {
  try {
    (void)greedy_sweep(model, d, max_depth);
    return true;
  } catch (const NotControllableAtDepth&) {
    return false;
  }
}

int nonholonomic_order_generic(
    const std::function<Vec(int, const Vec&)>& field, int n_u, const Vec& center,
    int j, int max_len) {
  if (j < 0 || j >= center.size()) {
    throw InvalidArgument("nonholonomic_order: coordinate index out of range");
  }
  if (n_u < 1 || max_len < 1) {
    throw InvalidArgument("nonholonomic_order: need n_u >= 1 and max_len >= 1");
  }
  const double cj = center(j);
  std::vector<int> seq;
  for (int len = 1; len <= max_len; ++len) {
    seq.assign(len, 0);
    bool nonzero = false;
    while (true) {
      const double v =
          nested_central_fd(field, seq.data(), len, j, cj, center);
      const double a = std::abs(v);
      if (a >= kOrderZeroTol && a <= kOrderNonzeroTol) {
        throw AmbiguousOrder(
            "derivative magnitude " + std::to_string(a) +
            " falls between the zero and nonzero thresholds");
      }
      if (a > kOrderNonzeroTol) nonzero = true;
      // Odometer over {0..n_u-1}^len.
      int k = len - 1;
      while (k >= 0 && ++seq[k] == n_u) seq[k--] = 0;
      if (k < 0) break;
    }
    if (nonzero) return len;
  }
  throw Error("nonholonomic_order: no nonvanishing derivative up to length " +
              std::to_string(max_len));
}

int nonholonomic_order(const VehicleModel& model,
                       const LieFiltration& filtration, int j) {
  if (filtration.weights.empty()) {
    throw InvalidArgument("nonholonomic_order: empty filtration");
  }
  const int max_len = filtration.weights.back();
  auto field = [&model](int i, const Vec& x) {
    return field_value(model, i, x);
  };
  return nonholonomic_order_generic(field, model.n_u, filtration.base_point, j,
                                    max_len);
}

}  // namespace nhmpc

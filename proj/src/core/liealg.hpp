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

#ifndef NHMPC_CORE_LIEALG_HPP_
#define NHMPC_CORE_LIEALG_HPP_

#include <functional>
#include <string>
#include <vector>

#include "models.hpp"
#include "types.hpp"
#include "word_engine.hpp"

namespace nhmpc {

// A vector field given by callables for its value and Jacobian at a point.
struct FieldWithJacobian {
  std::function<Vec(const Vec&)> value;
  std::function<Mat(const Vec&)> jacobian;
};

// [X, Y](x) = JY(x) X(x) - JX(x) Y(x).
Vec lie_bracket(const FieldWithJacobian& X, const FieldWithJacobian& Y,
                const Vec& x);

// One accepted frame element: the bracket word, its value at the base point,
// and its depth (word length).
struct FrameElement {
  WordPtr word;
  Vec value_at_base;
  int depth = 1;
};

// Result of the greedy bracket-generation sweep at a point.
struct LieFiltration {
  const VehicleModel* model = nullptr;  // borrowed; outlives the filtration
  Vec base_point;
  std::vector<FrameElement> frame;  // n_x elements, in acceptance order
  std::vector<int> growth;          // growth[s-1] = dim of span at depth s
  std::vector<int> weights;         // weights[j] = depth of frame[j]
  int degree = 0;                   // smallest depth with full rank
};

// Greedy adapted-frame construction at `d`: generators in index order first,
// then for each depth, candidates [X_i, W] over generators i (ascending) and
// previously accepted words W of the preceding depth (in acceptance order).
// A candidate is kept iff it increases the rank of the stacked value matrix
// (singular values above 1e-9 times the largest). Throws
// NotControllableAtDepth if the span stalls below full rank or `max_depth`
// is exhausted, and IrregularPoint if nearby points yield a different growth
// vector.
LieFiltration build_filtration(const VehicleModel& model, const Vec& d,
                               int max_depth);

// True iff the brackets span the full tangent space at d within max_depth.
bool larc_check(const VehicleModel& model, const Vec& d, int max_depth);

// Value of a bracket word at x: exact (nested duals) for built-in models,
// finite differences for custom ones.
Vec word_value(const VehicleModel& model, const BracketWord& word,
               const Vec& x);

// Non-holonomic order of the coordinate function x_j - d_j at d: the
// smallest L such that some nested derivative of length L along the control
// fields is nonvanishing at d. Derivatives are taken with nested central
// differences (step 1e-4); magnitudes below 1e-8 count as zero and values in
// [1e-8, 1e-6] raise AmbiguousOrder. The search is bounded by the largest
// weight in `filtration`.
int nonholonomic_order(const VehicleModel& model,
                       const LieFiltration& filtration, int j);

// Same, over arbitrary field callbacks (used to re-check transformed
// systems). `field(i, x)` returns the i-th control field at x; the function
// differentiated is x[j] - center[j].
int nonholonomic_order_generic(
    const std::function<Vec(int, const Vec&)>& field, int n_u, const Vec& center,
    int j, int max_len);

}  // namespace nhmpc

#endif  // NHMPC_CORE_LIEALG_HPP_

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
//
// Exact evaluation of iterated Lie brackets and nested Lie derivatives for
// the built-in vehicle fields, via nested forward-mode dual numbers. Every
// routine here is scalar-generic; the compile-time nesting budget kMaxNest
// bounds template recursion while the actual nesting need is checked at run
// time (a bracket word of length L consumes L-1 levels, each enclosing Lie
// derivative one more).

#ifndef NHMPC_CORE_WORD_ENGINE_HPP_
#define NHMPC_CORE_WORD_ENGINE_HPP_

#include <memory>
#include <string>
#include <vector>

#include "dual.hpp"
#include "models.hpp"
#include "types.hpp"

namespace nhmpc {

// Bracket expression over generator indices (0-based): either a leaf X_i or
// [a, b]. Immutable, shared subtrees. `length` counts leaves, which is the
// filtration depth of the word ([X_i, W] has length(W) + 1).
struct BracketWord {
  int generator = -1;
  std::shared_ptr<const BracketWord> a, b;
  int length = 1;

  bool is_leaf() const { return generator >= 0; }
};

using WordPtr = std::shared_ptr<const BracketWord>;

inline WordPtr make_leaf(int generator) {
  auto w = std::make_shared<BracketWord>();
  w->generator = generator;
  w->length = 1;
  return w;
}

inline WordPtr make_bracket(WordPtr a, WordPtr b) {
  auto w = std::make_shared<BracketWord>();
  w->generator = -1;
  w->length = a->length + b->length;
  w->a = std::move(a);
  w->b = std::move(b);
  return w;
}

// Display form with 1-based generator labels, e.g. "[X1,[X1,X2]]".
inline std::string word_to_string(const BracketWord& w) {
  if (w.is_leaf()) return "X" + std::to_string(w.generator + 1);
  return "[" + word_to_string(*w.a) + "," + word_to_string(*w.b) + "]";
}

// Nesting depth of a scalar type: double -> 0, Dual<T> -> 1 + depth(T).
template <class T>
struct DualDepth {
  static constexpr int value = 0;
};
template <class U>
struct DualDepth<Dual<U>> {
  static constexpr int value = 1 + DualDepth<U>::value;
};

// Maximum total dual nesting. Filtration frames need words of length <= 5
// (budget 4); step-2 corrections stack up to 3 Lie derivatives on top of
// words of length <= 3, so 6 levels cover every built-in use with slack.
inline constexpr int kMaxNest = 6;

// Value of a bracket word at x, recursing [a,b](x) = Jb(x) a(x) - Ja(x) b(x)
// with Jacobian-vector products done by one extra dual level each.
template <class T>
void word_value_rec(VehicleKind kind, const double* params,
                    const BracketWord& w, const std::vector<T>& x,
                    std::vector<T>& out) {
  const int n = static_cast<int>(x.size());
  out.resize(n);
  if (w.is_leaf()) {
    eval_builtin_field(kind, params, w.generator, x.data(), out.data());
    return;
  }
  constexpr int budget = kMaxNest - DualDepth<T>::value;
  if constexpr (budget <= 0) {
    throw Error("bracket word exceeds the dual nesting budget");
  } else {
    std::vector<T> va, vb;
    word_value_rec(kind, params, *w.a, x, va);
    word_value_rec(kind, params, *w.b, x, vb);
    std::vector<Dual<T>> xd(n), r;
    for (int j = 0; j < n; ++j) xd[j] = Dual<T>(x[j], va[j]);
    word_value_rec(kind, params, *w.b, xd, r);
    for (int j = 0; j < n; ++j) out[j] = r[j].d;
    for (int j = 0; j < n; ++j) xd[j] = Dual<T>(x[j], vb[j]);
    word_value_rec(kind, params, *w.a, xd, r);
    for (int j = 0; j < n; ++j) out[j] = out[j] - r[j].d;
  }
}

// Nested Lie derivative (L_{F_{s_0}} (L_{F_{s_1}} (... fun))) (x); seq[0] is
// applied outermost. `field` must be callable as
// field(i, const std::vector<T>&) -> std::vector<T> and `fun` as
// fun(const std::vector<T>&) -> T for every nesting level used.
template <class FieldF, class FunF, class T>
T nested_lie_derivative(const FieldF& field, const FunF& fun, const int* seq,
                        int len, const std::vector<T>& x) {
  if (len == 0) return fun(x);
  constexpr int budget = kMaxNest - DualDepth<T>::value;
  if constexpr (budget <= 0) {
    throw Error("nested Lie derivative exceeds the dual nesting budget");
  } else {
    const int n = static_cast<int>(x.size());
    const std::vector<T> dir = field(seq[0], x);
    std::vector<Dual<T>> xd(n);
    for (int j = 0; j < n; ++j) xd[j] = Dual<T>(x[j], dir[j]);
    const Dual<T> g = nested_lie_derivative(field, fun, seq + 1, len - 1, xd);
    return g.d;
  }
}

}  // namespace nhmpc

#endif  // NHMPC_CORE_WORD_ENGINE_HPP_

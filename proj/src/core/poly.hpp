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
// Small dense-coefficient multivariate polynomials over a fixed variable
// count. Canonical form is a map from exponent vectors to coefficients, so
// arithmetic, printing, and comparison are deterministic. Sized for the
// low-degree, few-variable polynomials of coordinate corrections and
// homogeneous vector fields; not a general computer-algebra facility.

#ifndef NHMPC_CORE_POLY_HPP_
#define NHMPC_CORE_POLY_HPP_

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "types.hpp"

namespace nhmpc {

class Poly {
 public:
  using ExpVec = std::vector<int>;

  Poly() = default;
  explicit Poly(int nvars) : nvars_(nvars) {}

  static Poly constant(int nvars, double c) {
    Poly p(nvars);
    p.add_term(ExpVec(nvars, 0), c);
    return p;
  }

  static Poly variable(int nvars, int j) {
    Poly p(nvars);
    ExpVec e(nvars, 0);
    e[j] = 1;
    p.add_term(e, 1.0);
    return p;
  }

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<ExpVec, double>& terms() const { return terms_; }

  void add_term(const ExpVec& exp, double c) {
    if (static_cast<int>(exp.size()) != nvars_) {
      throw InvalidArgument("Poly::add_term: exponent size mismatch");
    }
    auto it = terms_.find(exp);
    if (it == terms_.end()) {
      if (c != 0.0) terms_.emplace(exp, c);
    } else {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  Poly& operator+=(const Poly& o) {
    check_same(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    check_same(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }

  friend Poly operator*(const Poly& a, double s) {
    Poly r(a.nvars_);
    if (s == 0.0) return r;
    for (const auto& [e, c] : a.terms_) r.terms_[e] = c * s;
    return r;
  }
  friend Poly operator*(double s, const Poly& a) { return a * s; }

  friend Poly operator*(const Poly& a, const Poly& b) {
    a.check_same(b);
    Poly r(a.nvars_);
    ExpVec e(a.nvars_);
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        for (int i = 0; i < a.nvars_; ++i) e[i] = ea[i] + eb[i];
        r.add_term(e, ca * cb);
      }
    }
    return r;
  }

  Poly derivative(int j) const {
    Poly r(nvars_);
    ExpVec e(nvars_);
    for (const auto& [exp, c] : terms_) {
      if (exp[j] == 0) continue;
      e = exp;
      e[j] -= 1;
      r.add_term(e, c * exp[j]);
    }
    return r;
  }

  // Drops terms with |coefficient| <= tol.
  void prune(double tol) {
    for (auto it = terms_.begin(); it != terms_.end();) {
      if (std::abs(it->second) <= tol) {
        it = terms_.erase(it);
      } else {
        ++it;
      }
    }
  }

  template <class T>
  T eval(const T* x) const {
    T acc(0.0);
    for (const auto& [e, c] : terms_) {
      T term(c);
      for (int i = 0; i < nvars_; ++i) {
        for (int k = 0; k < e[i]; ++k) term = term * x[i];
      }
      acc = acc + term;
    }
    return acc;
  }

  double eval(const Vec& x) const {
    if (x.size() != nvars_) {
      throw InvalidArgument("Poly::eval: point dimension mismatch");
    }
    return eval<double>(x.data());
  }

  // Largest weighted degree over terms (sum of exponent * weight); -1 for
  // the zero polynomial.
  int weighted_degree(const std::vector<int>& w) const {
    if (static_cast<int>(w.size()) != nvars_) {
      throw InvalidArgument("Poly::weighted_degree: weight size mismatch");
    }
    int deg = -1;
    for (const auto& [e, c] : terms_) {
      int d = 0;
      for (int i = 0; i < nvars_; ++i) d += e[i] * w[i];
      if (d > deg) deg = d;
    }
    return deg;
  }

  // Plain maximal total degree; -1 for the zero polynomial.
  int degree() const { return weighted_degree(std::vector<int>(nvars_, 1)); }

  // "0.5*z1^2*z3 - z2" with the given variable prefix (1-based indices).
  std::string to_string(const std::string& var_prefix = "z") const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    char buf[64];
    for (const auto& [e, c] : terms_) {
      double coef = c;
      if (first) {
        if (coef < 0) {
          out += "-";
          coef = -coef;
        }
      } else {
        out += coef < 0 ? " - " : " + ";
        coef = std::abs(coef);
      }
      bool any_var = false;
      std::string vars;
      for (int i = 0; i < nvars_; ++i) {
        if (e[i] == 0) continue;
        if (any_var) vars += "*";
        vars += var_prefix + std::to_string(i + 1);
        if (e[i] > 1) {
          std::snprintf(buf, sizeof buf, "^%d", e[i]);
          vars += buf;
        }
        any_var = true;
      }
      if (!any_var || std::abs(coef - 1.0) > 1e-15) {
        std::snprintf(buf, sizeof buf, "%.10g", coef);
        out += buf;
        if (any_var) out += "*";
      }
      out += vars;
      first = false;
    }
    return out;
  }

 private:
  void check_same(const Poly& o) const {
    if (nvars_ != o.nvars_) {
      throw InvalidArgument("Poly: mixed variable counts");
    }
  }

  int nvars_ = 0;
  std::map<ExpVec, double> terms_;
};

// Lie bracket of polynomial vector fields:
// [P, Q]_j = sum_k (dQ_j/dz_k * P_k - dP_j/dz_k * Q_k).
inline std::vector<Poly> poly_bracket(const std::vector<Poly>& P,
                                      const std::vector<Poly>& Q) {
  if (P.size() != Q.size() || P.empty()) {
    throw InvalidArgument("poly_bracket: field dimension mismatch");
  }
  const int n = static_cast<int>(P.size());
  std::vector<Poly> r(n, Poly(P[0].nvars()));
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      r[j] += Q[j].derivative(k) * P[k] - P[j].derivative(k) * Q[k];
    }
  }
  return r;
}

}  // namespace nhmpc

#endif  // NHMPC_CORE_POLY_HPP_

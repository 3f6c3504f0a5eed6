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
// Catalog of driftless kinematic vehicle models x' = sum_i X_i(x) u_i.
// Built-ins (unicycle, front-wheel-driven kinematic car, unicycle with one
// or two trailers) carry hand-coded analytic Jacobians and additionally
// expose their fields as scalar-generic templates so the Lie-algebra engine
// can differentiate through them exactly with nested dual numbers.
// User-defined models plug in double-precision callbacks and fall back to
// finite differences where derivatives are needed.

#ifndef NHMPC_CORE_MODELS_HPP_
#define NHMPC_CORE_MODELS_HPP_

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "types.hpp"

namespace nhmpc {

enum class VehicleKind { kUnicycle, kKinematicCar, kOneTrailer, kTwoTrailer, kCustom };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Immutable after construction; evaluators are pure, so a model can be shared
// freely across threads.
struct VehicleModel {
  std::string name;
  int n_x = 0;
  int n_u = 0;
  VehicleKind kind = VehicleKind::kCustom;
  // Geometric constants in field-evaluation order: car {wheelbase},
  // one-trailer {hitch1}, two-trailer {hitch1, hitch2}.
  std::vector<double> params;
  std::map<std::string, double> named_params;
  std::vector<Interval> input_bounds;  // closed, each containing 0

  // i in [0, n_u): writes X_i(x) into out[0..n_x).
  std::function<void(int i, const double* x, double* out)> field;
  // Row-major n_x * n_x Jacobian dX_i/dx. Analytic for built-ins; central
  // finite differences (step 1e-6 * (1 + |x_j|)) for callback models that do
  // not supply one.
  std::function<void(int i, const double* x, double* jac)> jacobian;
  bool analytic_jacobian = false;
};

// x' = G(x) u. Throws InvalidArgument on dimension mismatch.
Vec dynamics(const VehicleModel& model, const Vec& x, const Vec& u);

// Field value / Jacobian as Eigen types (convenience wrappers).
Vec field_value(const VehicleModel& model, int i, const Vec& x);
Mat field_jacobian(const VehicleModel& model, int i, const Vec& x);

VehicleModel make_unicycle();
VehicleModel make_kinematic_car(double wheelbase);
VehicleModel make_one_trailer(double hitch1);
VehicleModel make_two_trailer(double hitch1, double hitch2);

// Factory keyed by model name ("unicycle" | "kinematic_car" | "one_trailer"
// | "two_trailer") with named geometric parameters; used by the scenario
// config and the C API. Throws ParameterError on unknown names, missing or
// non-positive lengths.
VehicleModel make_model(const std::string& name,
                        const std::map<std::string, double>& params);

// User-defined driftless model from callbacks. jacobian may be empty, in
// which case finite differences are used. Custom models may be fully
// actuated (n_u == n_x); the built-in catalog is strictly underactuated.
VehicleModel make_custom(const std::string& name, int n_x, int n_u,
                         std::function<void(int, const double*, double*)> field,
                         std::function<void(int, const double*, double*)> jacobian,
                         std::vector<Interval> input_bounds);

// Replaces the default input box. Intervals must be non-empty and contain 0.
void set_input_bounds(VehicleModel& model, const std::vector<Interval>& bounds);

// ---------------------------------------------------------------------------
// Scalar-generic built-in fields. T is double or an arbitrarily nested
// Dual<...>; x and out have length n_x for the kind. Inline so the bracket
// engine can instantiate them at every dual depth it needs.
// ---------------------------------------------------------------------------

template <class T>
void eval_builtin_field(VehicleKind kind, const double* params, int i,
                        const T* x, T* out) {
  switch (kind) {
    case VehicleKind::kUnicycle: {
      // x = (x, y, theta), u = (v, omega).
      if (i == 0) {
        out[0] = cos(x[2]);
        out[1] = sin(x[2]);
        out[2] = T(0.0);
      } else {
        out[0] = T(0.0);
        out[1] = T(0.0);
        out[2] = T(1.0);
      }
      return;
    }
    case VehicleKind::kKinematicCar: {
      // Front-wheel driven: x = (x, y, theta, phi), u = (v, omega_steer).
      const double ell = params[0];
      if (i == 0) {
        out[0] = cos(x[2]) * cos(x[3]);
        out[1] = sin(x[2]) * cos(x[3]);
        out[2] = sin(x[3]) / ell;
        out[3] = T(0.0);
      } else {
        out[0] = T(0.0);
        out[1] = T(0.0);
        out[2] = T(0.0);
        out[3] = T(1.0);
      }
      return;
    }
    case VehicleKind::kOneTrailer: {
      // x = (x, y, theta, theta1), u = (v, omega).
      const double l1 = params[0];
      if (i == 0) {
        out[0] = cos(x[2]);
        out[1] = sin(x[2]);
        out[2] = T(0.0);
        out[3] = sin(x[2] - x[3]) / l1;
      } else {
        out[0] = T(0.0);
        out[1] = T(0.0);
        out[2] = T(1.0);
        out[3] = T(0.0);
      }
      return;
    }
    case VehicleKind::kTwoTrailer: {
      // x = (x, y, theta, theta1, theta2), u = (v, omega).
      const double l1 = params[0];
      const double l2 = params[1];
      if (i == 0) {
        out[0] = cos(x[2]);
        out[1] = sin(x[2]);
        out[2] = T(0.0);
        out[3] = sin(x[2] - x[3]) / l1;
        out[4] = cos(x[2] - x[3]) * sin(x[3] - x[4]) / l2;
      } else {
        out[0] = T(0.0);
        out[1] = T(0.0);
        out[2] = T(1.0);
        out[3] = T(0.0);
        out[4] = T(0.0);
      }
      return;
    }
    case VehicleKind::kCustom:
      break;
  }
  throw InvalidArgument("eval_builtin_field: custom models have no template path");
}

inline int builtin_state_dim(VehicleKind kind) {
  switch (kind) {
    case VehicleKind::kUnicycle:
      return 3;
    case VehicleKind::kKinematicCar:
    case VehicleKind::kOneTrailer:
      return 4;
    case VehicleKind::kTwoTrailer:
      return 5;
    case VehicleKind::kCustom:
      break;
  }
  return -1;
}

}  // namespace nhmpc

#endif  // NHMPC_CORE_MODELS_HPP_

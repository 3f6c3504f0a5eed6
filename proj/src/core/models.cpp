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

#include "models.hpp"

#include <cmath>
#include <cstring>
#include <utility>

namespace nhmpc {
namespace {

void check_bounds(const std::vector<Interval>& bounds, int n_u) {
  if (static_cast<int>(bounds.size()) != n_u) {
    throw ParameterError("input_bounds size must equal n_u");
  }
  for (const Interval& b : bounds) {
    if (!(b.lo < b.hi)) throw ParameterError("input bound interval is empty");
    if (b.lo > 0.0 || b.hi < 0.0) {
      throw ParameterError("input bound interval must contain 0");
    }
  }
}

// Central-difference Jacobian for callback models, step 1e-6 * (1 + |x_j|).
void fd_jacobian(const std::function<void(int, const double*, double*)>& field,
                 int n_x, int i, const double* x, double* jac) {
  std::vector<double> xp(x, x + n_x), xm(x, x + n_x);
  std::vector<double> fp(n_x), fm(n_x);
  for (int j = 0; j < n_x; ++j) {
    const double h = 1e-6 * (1.0 + std::abs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    field(i, xp.data(), fp.data());
    field(i, xm.data(), fm.data());
    for (int r = 0; r < n_x; ++r) jac[r * n_x + j] = (fp[r] - fm[r]) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
}

VehicleModel make_builtin(VehicleKind kind, std::string name,
                          std::vector<double> params,
                          std::map<std::string, double> named,
                          std::vector<Interval> bounds) {
  VehicleModel m;
  m.kind = kind;
  m.name = std::move(name);
  m.n_x = builtin_state_dim(kind);
  m.n_u = 2;
  m.params = std::move(params);
  m.named_params = std::move(named);
  m.input_bounds = std::move(bounds);
  check_bounds(m.input_bounds, m.n_u);

  const VehicleKind k = m.kind;
  const std::vector<double> p = m.params;
  m.field = [k, p](int i, const double* x, double* out) {
    eval_builtin_field(k, p.data(), i, x, out);
  };
  m.analytic_jacobian = true;
  return m;
}

}  // namespace

Vec dynamics(const VehicleModel& model, const Vec& x, const Vec& u) {
  if (x.size() != model.n_x) throw InvalidArgument("dynamics: state dimension mismatch");
  if (u.size() != model.n_u) throw InvalidArgument("dynamics: input dimension mismatch");
  Vec dx = Vec::Zero(model.n_x);
  Vec fi(model.n_x);
  for (int i = 0; i < model.n_u; ++i) {
    model.field(i, x.data(), fi.data());
    dx += u[i] * fi;
  }
  return dx;
}

Vec field_value(const VehicleModel& model, int i, const Vec& x) {
  if (x.size() != model.n_x) throw InvalidArgument("field_value: state dimension mismatch");
  if (i < 0 || i >= model.n_u) throw InvalidArgument("field_value: field index out of range");
  Vec f(model.n_x);
  model.field(i, x.data(), f.data());
  return f;
}

Mat field_jacobian(const VehicleModel& model, int i, const Vec& x) {
  if (x.size() != model.n_x) throw InvalidArgument("field_jacobian: state dimension mismatch");
  if (i < 0 || i >= model.n_u) throw InvalidArgument("field_jacobian: field index out of range");
  Mat jac(model.n_x, model.n_x);
  std::vector<double> buf(static_cast<size_t>(model.n_x) * model.n_x);
  model.jacobian(i, x.data(), buf.data());
  for (int r = 0; r < model.n_x; ++r)
    for (int c = 0; c < model.n_x; ++c) jac(r, c) = buf[r * model.n_x + c];
  return jac;
}

VehicleModel make_unicycle() {
  VehicleModel m = make_builtin(VehicleKind::kUnicycle, "unicycle", {}, {},
                                {{-1.0, 1.0}, {-1.0, 1.0}});
  m.jacobian = [](int i, const double* x, double* jac) {
    std::memset(jac, 0, sizeof(double) * 9);
    if (i == 0) {
      jac[0 * 3 + 2] = -std::sin(x[2]);
      jac[1 * 3 + 2] = std::cos(x[2]);
    }
  };
  return m;
}

VehicleModel make_kinematic_car(double wheelbase) {
  if (!(wheelbase > 0.0)) throw ParameterError("kinematic_car: wheelbase must be positive");
  VehicleModel m = make_builtin(VehicleKind::kKinematicCar, "kinematic_car",
                                {wheelbase}, {{"wheelbase", wheelbase}},
                                {{-1.0, 1.0}, {-1.0, 1.0}});
  m.jacobian = [wheelbase](int i, const double* x, double* jac) {
    std::memset(jac, 0, sizeof(double) * 16);
    if (i == 0) {
      const double ct = std::cos(x[2]), st = std::sin(x[2]);
      const double cp = std::cos(x[3]), sp = std::sin(x[3]);
      jac[0 * 4 + 2] = -st * cp;
      jac[0 * 4 + 3] = -ct * sp;
      jac[1 * 4 + 2] = ct * cp;
      jac[1 * 4 + 3] = -st * sp;
      jac[2 * 4 + 3] = cp / wheelbase;
    }
  };
  return m;
}

VehicleModel make_one_trailer(double hitch1) {
  if (!(hitch1 > 0.0)) throw ParameterError("one_trailer: hitch1 must be positive");
  VehicleModel m = make_builtin(VehicleKind::kOneTrailer, "one_trailer",
                                {hitch1}, {{"hitch1", hitch1}},
                                {{-1.0, 1.0}, {-1.0, 1.0}});
  m.jacobian = [hitch1](int i, const double* x, double* jac) {
    std::memset(jac, 0, sizeof(double) * 16);
    if (i == 0) {
      const double c = std::cos(x[2] - x[3]);
      jac[0 * 4 + 2] = -std::sin(x[2]);
      jac[1 * 4 + 2] = std::cos(x[2]);
      jac[3 * 4 + 2] = c / hitch1;
      jac[3 * 4 + 3] = -c / hitch1;
    }
  };
  return m;
}

VehicleModel make_two_trailer(double hitch1, double hitch2) {
  if (!(hitch1 > 0.0)) throw ParameterError("two_trailer: hitch1 must be positive");
  if (!(hitch2 > 0.0)) throw ParameterError("two_trailer: hitch2 must be positive");
  VehicleModel m = make_builtin(VehicleKind::kTwoTrailer, "two_trailer",
                                {hitch1, hitch2},
                                {{"hitch1", hitch1}, {"hitch2", hitch2}},
                                {{-1.0, 1.0}, {-1.0, 1.0}});
  m.jacobian = [hitch1, hitch2](int i, const double* x, double* jac) {
    std::memset(jac, 0, sizeof(double) * 25);
    if (i == 0) {
      const double a = x[2] - x[3];  // theta - theta1
      const double b = x[3] - x[4];  // theta1 - theta2
      jac[0 * 5 + 2] = -std::sin(x[2]);
      jac[1 * 5 + 2] = std::cos(x[2]);
      jac[3 * 5 + 2] = std::cos(a) / hitch1;
      jac[3 * 5 + 3] = -std::cos(a) / hitch1;
      jac[4 * 5 + 2] = -std::sin(a) * std::sin(b) / hitch2;
      jac[4 * 5 + 3] = (std::sin(a) * std::sin(b) + std::cos(a) * std::cos(b)) / hitch2;
      jac[4 * 5 + 4] = -std::cos(a) * std::cos(b) / hitch2;
    }
  };
  return m;
}

VehicleModel make_model(const std::string& name,
                        const std::map<std::string, double>& params) {
  auto get = [&params](const char* key) {
    auto it = params.find(key);
    if (it == params.end()) {
      throw ParameterError(std::string("missing model parameter: ") + key);
    }
    return it->second;
  };
  auto reject_unknown = [&params](std::initializer_list<const char*> known) {
    for (const auto& [key, value] : params) {
      bool ok = false;
      for (const char* k : known) ok = ok || key == k;
      if (!ok) throw ParameterError("unknown model parameter: " + key);
    }
  };
  if (name == "unicycle") {
    reject_unknown({});
    return make_unicycle();
  }
  if (name == "kinematic_car") {
    reject_unknown({"wheelbase"});
    return make_kinematic_car(get("wheelbase"));
  }
  if (name == "one_trailer") {
    reject_unknown({"hitch1"});
    return make_one_trailer(get("hitch1"));
  }
  if (name == "two_trailer") {
    reject_unknown({"hitch1", "hitch2"});
    return make_two_trailer(get("hitch1"), get("hitch2"));
  }
  throw ParameterError("unknown vehicle model: " + name);
}

VehicleModel make_custom(const std::string& name, int n_x, int n_u,
                         std::function<void(int, const double*, double*)> field,
                         std::function<void(int, const double*, double*)> jacobian,
                         std::vector<Interval> input_bounds) {
  if (n_x < 1 || n_u < 1) throw ParameterError("custom model: dimensions must be positive");
  if (n_u > n_x) throw ParameterError("custom model: n_u must not exceed n_x");
  if (!field) throw ParameterError("custom model: field callback required");
  VehicleModel m;
  m.kind = VehicleKind::kCustom;
  m.name = name;
  m.n_x = n_x;
  m.n_u = n_u;
  m.input_bounds = std::move(input_bounds);
  check_bounds(m.input_bounds, n_u);
  m.field = std::move(field);
  if (jacobian) {
    m.jacobian = std::move(jacobian);
    m.analytic_jacobian = true;
  } else {
    auto f = m.field;
    m.jacobian = [f, n_x](int i, const double* x, double* jac) {
      fd_jacobian(f, n_x, i, x, jac);
    };
    m.analytic_jacobian = false;
  }
  return m;
}

void set_input_bounds(VehicleModel& model, const std::vector<Interval>& bounds) {
  check_bounds(bounds, model.n_u);
  model.input_bounds = bounds;
}

}  // namespace nhmpc

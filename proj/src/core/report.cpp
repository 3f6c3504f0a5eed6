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

#include "report.hpp"

#include <cstdio>
#include <sstream>

#include "word_engine.hpp"

namespace nhmpc {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

template <typename Seq>
std::string tuple_of(const Seq& v) {
  std::string out = "(";
  bool first = true;
  for (const auto& e : v) {
    if (!first) out += ", ";
    out += std::to_string(e);
    first = false;
  }
  return out + ")";
}

}  // namespace

std::string analysis_report(const LieFiltration& filtration,
                            const PrivilegedChart& chart,
                            const HomogeneousApprox& approx,
                            double homogeneity_residual) {
  std::ostringstream out;
  const VehicleModel& model = *filtration.model;
  const int n = model.n_x;

  out << "vehicle: " << model.name << " (states " << n << ", inputs "
      << model.n_u << ")\n";
  out << "setpoint:";
  for (int i = 0; i < n; ++i) out << " " << num(filtration.base_point[i]);
  out << "\n\n";

  out << "growth vector: " << tuple_of(filtration.growth) << "\n";
  out << "weights:       " << tuple_of(filtration.weights) << "\n";
  out << "degree of non-holonomy: " << filtration.degree << "\n\n";

  out << "adapted frame (bracket words and their value at the setpoint):\n";
  for (int j = 0; j < n; ++j) {
    const FrameElement& fe = filtration.frame[j];
    out << "  W" << j + 1 << " = " << word_to_string(*fe.word)
        << "   [weight " << filtration.weights[j] << "]   (";
    for (int i = 0; i < n; ++i) {
      if (i) out << ", ";
      out << num(fe.value_at_base[i]);
    }
    out << ")\n";
  }

  out << "\nchart step 1: y = A^{-1} (x - d), columns of A = frame values\n";
  out << "chart step 2 corrections (z_j = y_j - h_j):\n";
  bool any = false;
  for (int j = 0; j < n; ++j) {
    if (chart.corrections[j].is_zero()) continue;
    any = true;
    out << "  h" << j + 1 << "(y) = " << chart.corrections[j].to_string("y")
        << "\n";
  }
  if (!any) out << "  all corrections vanish (step 1 already privileged)\n";

  out << "\nhomogeneous approximation (polynomial fields in z):\n";
  for (std::size_t i = 0; i < approx.fields.size(); ++i) {
    out << "  Z" << i + 1 << " = (";
    for (int j = 0; j < n; ++j) {
      if (j) out << ", ";
      out << approx.fields[i][j].to_string();
    }
    out << ")\n";
  }
  out << "state dilation exponents: " << tuple_of(approx.r) << "\n";
  out << "input dilation exponents: " << tuple_of(approx.s) << "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", homogeneity_residual);
  out << "homogeneity residual: " << buf << "\n";
  return out.str();
}

}  // namespace nhmpc

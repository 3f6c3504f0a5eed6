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

#ifndef NHMPC_CORE_SVG_HPP_
#define NHMPC_CORE_SVG_HPP_

#include <string>
#include <vector>

#include "mpc.hpp"

namespace nhmpc {

struct PlotSeries {
  const ClosedLoopTrace* trace = nullptr;
  std::string label;
  std::string color;  // CSS color; empty picks a default per index
};

// Static two-panel figure: closed-loop plane trajectory (x1 vs x2, vehicle
// heading glyphs along the first series) and the value function over time on
// a log scale. Self-contained SVG, deterministic bytes for identical input.
std::string render_scenario_svg(const std::vector<PlotSeries>& series,
                                const Vec& setpoint,
                                const std::string& title);

}  // namespace nhmpc

#endif  // NHMPC_CORE_SVG_HPP_

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

#ifndef NHMPC_CORE_CONFIG_HPP_
#define NHMPC_CORE_CONFIG_HPP_

#include <map>
#include <string>
#include <vector>

#include "mpc.hpp"
#include "types.hpp"

namespace nhmpc {

struct OutputSpec {
  std::string csv;  // trace file name; empty = derived by the caller
  std::string svg;  // plot file name; empty = derived
  bool plot = false;

  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

// Parsed scenario document. Sections: [vehicle], [setpoint], [initial_state],
// [cost], [horizon], [solver], [output]. Unknown sections or keys are
// rejected with the offending line number.
struct ScenarioConfig {
  // [vehicle]
  std::string vehicle;  // unicycle | kinematic_car | one_trailer | two_trailer
  std::map<std::string, double> params;  // wheelbase / hitch1 / hitch2
  std::vector<double> u_min, u_max;      // optional bounds override

  // [setpoint] / [initial_state]
  std::vector<double> setpoint;
  std::vector<double> x0;

  // [cost]
  std::string cost_kind = "tailored";  // tailored | quadratic
  std::vector<double> q, r;  // tailored weights / quadratic diagonals
  bool cancel_gcd = false;
  double scale = 0.0;  // <= 0: normalize the initial stage cost to 1

  // [horizon]
  double dt = 0.25;
  int H = 60;
  double duration = 15.0;

  // [solver]
  SolverSettings solver;

  // [output]
  OutputSpec output;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&);
};

bool operator==(const SolverSettings& a, const SolverSettings& b);

// Parses a config document. Throws ParseError (with 1-based line number) on
// syntax errors, unknown sections/keys, duplicate keys, or type mismatches.
ScenarioConfig parse_config(const std::string& text);

// Reads and parses a file; file-system failures raise Error.
ScenarioConfig load_config(const std::string& path);

// Canonical echo: fixed section and key order, shortest round-trip number
// formatting. parse_config(dump_config(c)) == c.
std::string dump_config(const ScenarioConfig& config);

// Instantiates the scenario (vehicle factory, cost spec, solver settings).
// Dimension or range problems raise InvalidArgument/ParameterError.
Scenario to_scenario(const ScenarioConfig& config);

}  // namespace nhmpc

#endif  // NHMPC_CORE_CONFIG_HPP_

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

#include "core/config.hpp"

#include <string>

#include "core/types.hpp"
#include "gtest/gtest.h"

namespace nhmpc {
namespace {

const char* kFullDocument = R"(# parking scenario
[vehicle]
name = "kinematic_car"
wheelbase = 0.2
u_min = [-1, -1]
u_max = [1, 1]

[setpoint]
d = [0, 0, 0, 0]

[initial_state]
x0 = [0, 0.2, 0, 0]

[cost]
kind = "tailored"
q = [1, 1, 1, 10]
r = [0.01, 0.01]
cancel_gcd = true
scale = 0   # normalize at the initial deviation

[horizon]
dt = 0.25
H = 60
duration = 15

[solver]
max_iter = 2000
tol = 1e-8
restarts = 8
seed = 1
substeps = 4
warm_start = true

[output]
csv = "car.csv"
plot = true
)";

TEST(Config, ParsesFullDocument) {
  ScenarioConfig c = parse_config(kFullDocument);
  EXPECT_EQ(c.vehicle, "kinematic_car");
  EXPECT_EQ(c.params.at("wheelbase"), 0.2);
  EXPECT_EQ(c.u_min, (std::vector<double>{-1, -1}));
  EXPECT_EQ(c.setpoint, (std::vector<double>{0, 0, 0, 0}));
  EXPECT_EQ(c.x0, (std::vector<double>{0, 0.2, 0, 0}));
  EXPECT_EQ(c.cost_kind, "tailored");
  EXPECT_EQ(c.q, (std::vector<double>{1, 1, 1, 10}));
  EXPECT_TRUE(c.cancel_gcd);
  EXPECT_EQ(c.scale, 0.0);
  EXPECT_EQ(c.dt, 0.25);
  EXPECT_EQ(c.H, 60);
  EXPECT_EQ(c.duration, 15.0);
  EXPECT_EQ(c.solver.max_iter, 2000);
  EXPECT_EQ(c.solver.tol, 1e-8);
  EXPECT_EQ(c.solver.seed, 1u);
  EXPECT_TRUE(c.solver.warm_start);
  EXPECT_EQ(c.output.csv, "car.csv");
  EXPECT_TRUE(c.output.plot);
  EXPECT_TRUE(c.output.svg.empty());
}

TEST(Config, DumpThenParseIsIdentity) {
  ScenarioConfig c = parse_config(kFullDocument);
  const std::string echoed = dump_config(c);
  ScenarioConfig c2 = parse_config(echoed);
  EXPECT_TRUE(c == c2);
  // The canonical form is a fixed point of the echo.
  EXPECT_EQ(dump_config(c2), echoed);
}

TEST(Config, MinimalDocumentGetsDefaults) {
  ScenarioConfig c = parse_config(
      "[vehicle]\nname = \"unicycle\"\n"
      "[setpoint]\nd = [1, 1, 0.785]\n"
      "[initial_state]\nx0 = [0, 0, 0]\n");
  EXPECT_EQ(c.cost_kind, "tailored");
  EXPECT_EQ(c.dt, 0.25);
  EXPECT_EQ(c.H, 60);
  EXPECT_EQ(c.duration, 15.0);
  EXPECT_EQ(c.solver.max_iter, 2000);
  EXPECT_FALSE(c.output.plot);
  EXPECT_TRUE(c.q.empty());
}

TEST(Config, RejectsUnknownSection) {
  try {
    parse_config("[vehicle]\nname = \"unicycle\"\n[velocity]\nv = 1\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 3);
  }
}

TEST(Config, RejectsUnknownKey) {
  try {
    parse_config(
        "[vehicle]\nname = \"unicycle\"\ncolor = \"red\"\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 3);
  }
}

TEST(Config, RejectsDuplicateKey) {
  try {
    parse_config(
        "[vehicle]\nname = \"unicycle\"\nname = \"unicycle\"\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 3);
  }
}

TEST(Config, RejectsMalformedNumber) {
  EXPECT_THROW(parse_config("[vehicle]\nname = \"unicycle\"\n"
                            "[horizon]\ndt = fast\n"),
               ParseError);
  EXPECT_THROW(parse_config("[vehicle]\nname = \"unicycle\"\n"
                            "[horizon]\nH = 2.5\n"),
               ParseError);
  EXPECT_THROW(parse_config("[vehicle]\nname = \"unicycle\"\n"
                            "[setpoint]\nd = [1, 2,\n"),
               ParseError);
  EXPECT_THROW(parse_config("[vehicle]\nname = \"unicycle\"\n"
                            "[horizon]\ndt = 0.25 extra\n"),
               ParseError);
  EXPECT_THROW(parse_config("key_outside_section = 1\n"), ParseError);
}

TEST(Config, RejectsMissingRequiredKeys) {
  EXPECT_THROW(parse_config("[setpoint]\nd = [0, 0, 0]\n"
                            "[initial_state]\nx0 = [0, 0, 0]\n"),
               ParseError);
  EXPECT_THROW(parse_config("[vehicle]\nname = \"unicycle\"\n"
                            "[initial_state]\nx0 = [0, 0, 0]\n"),
               ParseError);
  EXPECT_THROW(parse_config("[vehicle]\nname = \"unicycle\"\n"
                            "[setpoint]\nd = [0, 0, 0]\n"),
               ParseError);
}

TEST(Config, ToScenarioBuildsModelAndBounds) {
  ScenarioConfig c = parse_config(
      "[vehicle]\nname = \"one_trailer\"\nhitch1 = 0.19\n"
      "u_min = [-0.4, -0.3927]\nu_max = [0.4, 0.3927]\n"
      "[setpoint]\nd = [0, 0, 0, 0]\n"
      "[initial_state]\nx0 = [0, 0.3, 0, 0]\n"
      "[cost]\nkind = \"tailored\"\ncancel_gcd = true\n");
  Scenario sc = to_scenario(c);
  EXPECT_EQ(sc.model.name, "one_trailer");
  EXPECT_EQ(sc.model.n_x, 4);
  ASSERT_EQ(sc.bounds.size(), 2u);
  EXPECT_EQ(sc.bounds[0].lo, -0.4);
  EXPECT_EQ(sc.bounds[1].hi, 0.3927);
  EXPECT_EQ(sc.setpoint.size(), 4);
  EXPECT_EQ(sc.x0[1], 0.3);
  EXPECT_EQ(sc.cost.kind, CostKind::kTailored);
  EXPECT_TRUE(sc.cost.cancel_gcd);
}

TEST(Config, ToScenarioRejectsBadDimensionsAndParams) {
  // Setpoint dimension mismatch.
  EXPECT_THROW(to_scenario(parse_config(
                   "[vehicle]\nname = \"unicycle\"\n"
                   "[setpoint]\nd = [0, 0]\n"
                   "[initial_state]\nx0 = [0, 0, 0]\n")),
               InvalidArgument);
  // Missing wheelbase.
  EXPECT_THROW(to_scenario(parse_config(
                   "[vehicle]\nname = \"kinematic_car\"\n"
                   "[setpoint]\nd = [0, 0, 0, 0]\n"
                   "[initial_state]\nx0 = [0, 0, 0, 0]\n")),
               InvalidArgument);
  // Parameter that does not apply.
  EXPECT_THROW(to_scenario(parse_config(
                   "[vehicle]\nname = \"unicycle\"\nwheelbase = 0.2\n"
                   "[setpoint]\nd = [0, 0, 0]\n"
                   "[initial_state]\nx0 = [0, 0, 0]\n")),
               InvalidArgument);
  // Unknown cost kind.
  EXPECT_THROW(to_scenario(parse_config(
                   "[vehicle]\nname = \"unicycle\"\n"
                   "[setpoint]\nd = [0, 0, 0]\n"
                   "[initial_state]\nx0 = [0, 0, 0]\n"
                   "[cost]\nkind = \"cubic\"\n")),
               InvalidArgument);
}

TEST(Config, ParseErrorCarriesLineNumber) {
  try {
    parse_config("[vehicle]\nname = \"unicycle\"\n\n\n[horizon]\ndt = oops\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 6);
    EXPECT_NE(std::string(e.what()).find("number"), std::string::npos);
  }
}

}  // namespace
}  // namespace nhmpc

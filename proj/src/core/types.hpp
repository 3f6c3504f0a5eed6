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

#ifndef NHMPC_CORE_TYPES_HPP_
#define NHMPC_CORE_TYPES_HPP_

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace nhmpc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error taxonomy. Each subclass maps 1:1 onto a C API status code, so the
// boundary layer can translate exceptions without string matching.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller broke a documented precondition (dimension mismatch etc.).
struct InvalidArgument : Error {
  using Error::Error;
};

// A constructor parameter is outside its admissible range.
struct ParameterError : Error {
  using Error::Error;
};

// Bracket-generated distributions never reached full rank.
struct NotControllableAtDepth : Error {
  explicit NotControllableAtDepth(int max_depth)
      : Error("bracket span does not reach full rank within depth " +
              std::to_string(max_depth)),
        max_depth(max_depth) {}
  NotControllableAtDepth(int max_depth, const std::string& what)
      : Error(what), max_depth(max_depth) {}
  int max_depth;
};

// The rank pattern of the filtration changes under small perturbations of the
// expansion point, so growth vector and weights are not well defined there.
struct IrregularPoint : Error {
  using Error::Error;
};

// A numerically evaluated non-holonomic derivative landed inside the
// tolerance dead zone where it can be neither declared zero nor nonzero.
struct AmbiguousOrder : Error {
  using Error::Error;
};

// The dilation-limit extrapolation did not settle; usually means the weights
// do not belong to the chart, or the chart is not privileged.
struct DivergentLimit : Error {
  using Error::Error;
};

// A matrix required to be symmetric positive definite is not.
struct NotPositiveDefinite : Error {
  using Error::Error;
};

// An integration produced a non-finite state.
struct RolloutDiverged : Error {
  using Error::Error;
};

// A root search exhausted its restart budget.
struct NoSolutionFound : Error {
  using Error::Error;
};

// Scenario configuration text could not be parsed or validated.
struct ParseError : Error {
  explicit ParseError(int line, const std::string& what)
      : Error(what), line(line) {}
  int line;
};

}  // namespace nhmpc

#endif  // NHMPC_CORE_TYPES_HPP_

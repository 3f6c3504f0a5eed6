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

#ifndef NHMPC_CORE_CSVIO_HPP_
#define NHMPC_CORE_CSVIO_HPP_

#include <string>

#include "mpc.hpp"

namespace nhmpc {

// Shortest decimal representation that parses back to the same double;
// locale-independent.
std::string format_double(double v);

// One row per sampling instant, header `t,x1..xn,u1..um,V,iters,status`.
// Deterministic: the same trace always serializes to the same bytes.
std::string trace_to_csv(const ClosedLoopTrace& trace);

// Inverse of trace_to_csv (the `diverged` flag is not part of the format).
// Throws ParseError with the offending line on malformed input.
ClosedLoopTrace trace_from_csv(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace nhmpc

#endif  // NHMPC_CORE_CSVIO_HPP_

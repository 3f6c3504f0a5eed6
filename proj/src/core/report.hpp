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

#ifndef NHMPC_CORE_REPORT_HPP_
#define NHMPC_CORE_REPORT_HPP_

#include <string>

#include "liealg.hpp"
#include "privcoord.hpp"

namespace nhmpc {

// Human-readable summary of the analysis pipeline at one setpoint: growth
// vector, weights, degree of non-holonomy, adapted frame, both chart steps,
// the extracted polynomial approximation, and its homogeneity residual.
std::string analysis_report(const LieFiltration& filtration,
                            const PrivilegedChart& chart,
                            const HomogeneousApprox& approx,
                            double homogeneity_residual);

}  // namespace nhmpc

#endif  // NHMPC_CORE_REPORT_HPP_

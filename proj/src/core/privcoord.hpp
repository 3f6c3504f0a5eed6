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

#ifndef NHMPC_CORE_PRIVCOORD_HPP_
#define NHMPC_CORE_PRIVCOORD_HPP_

#include <vector>

#include "liealg.hpp"
#include "models.hpp"
#include "poly.hpp"
#include "types.hpp"
#include "word_engine.hpp"

namespace nhmpc {

// Local coordinates adapted to the bracket structure at a setpoint d.
// First a linear change y = A^{-1}(x - d), columns of A being the adapted
// frame at d; then polynomial corrections z_j = y_j - h_j(y_1..y_{j-1}),
// which are identically zero for coordinates of weight <= 2. The chart is
// exact (no truncation): both maps and the transported dynamics reproduce
// the original system.
struct PrivilegedChart {
  const VehicleModel* model = nullptr;  // borrowed; must outlive the chart
  Vec d;
  Mat A, A_inv;
  std::vector<int> weights;             // one per coordinate
  std::vector<Poly> corrections;        // h_j as polynomial in y; may be zero
  std::vector<std::vector<Poly>> correction_derivs;  // d h_j / d y_k
  LieFiltration filtration;             // frame words kept for reporting

  int dim() const { return static_cast<int>(d.size()); }
  Vec to_y(const Vec& x) const;          // step 1 only
  Vec y_to_z(const Vec& y) const;
  Vec z_to_y(const Vec& z) const;        // exact triangular inversion
  Vec to_privileged(const Vec& x) const;
  Vec from_privileged(const Vec& z) const;

  // Transported control field Z_i(z) = (dz/dx) X_i(x(z)); exact, no
  // approximation. Columns of the matrix version are Z_1..Z_{n_u}.
  Vec push_control_field(int i, const Vec& z) const;
  Mat push_control_matrix(const Vec& z) const;

  // G(z) together with the component Jacobians dZ_i/dz (exact duals for
  // built-in models, central differences for custom ones).
  void push_control_matrix_jac(const Vec& z, Mat& G,
                               std::vector<Mat>& dG) const;
};

// Step 1 of the chart construction: y = A^{-1}(x - d).
Vec step1_transform(const LieFiltration& filtration, const Vec& x);

// Step 2: correction polynomials h_j(y), nonzero only for weights >= 3.
// Coefficients come from nested derivatives of the partially corrected
// coordinate functions along the transported frame fields at d, divided by
// the factorials of the multi-index.
std::vector<Poly> step2_corrections(const LieFiltration& filtration,
                                    const VehicleModel& model);

// Full chart assembly (both steps).
PrivilegedChart build_chart(const LieFiltration& filtration,
                            const VehicleModel& model);

// Plain translation chart z = x - d (identity frame, no corrections); the
// working frame for costs defined directly in x - d.
PrivilegedChart make_translation_chart(const VehicleModel& model,
                                       const Vec& d);

// Polynomial vector fields obtained by keeping only the lowest
// weighted-degree part of each transported control field; triangular and
// nilpotent by construction of the dictionary.
struct HomogeneousApprox {
  std::vector<std::vector<Poly>> fields;  // fields[i][j]: comp j of field i
  std::vector<int> r;                     // state dilation exponents
  std::vector<int> s;                     // input dilation exponents
  int tau = 0;                            // degree of homogeneity
};

// Extracts the approximation numerically: Richardson-extrapolated dilation
// limits fitted over a sign-symmetric sample set onto monomials of weighted
// degree w_j - 1. Throws DivergentLimit when the limits do not fit such a
// polynomial (wrong weights or a chart that is not privileged).
HomogeneousApprox extract_homogeneous_approx(const PrivilegedChart& chart,
                                             const VehicleModel& model);

// Max over random (z, u, alpha) of
// |G(Lambda_alpha z) Delta_alpha u - alpha^tau Lambda_alpha G(z) u|_inf.
double verify_homogeneity(const HomogeneousApprox& approx);

}  // namespace nhmpc

#endif  // NHMPC_CORE_PRIVCOORD_HPP_

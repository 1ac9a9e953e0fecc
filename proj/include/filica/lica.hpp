// Copyright 2026 The filica Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FILICA_LICA_HPP
#define FILICA_LICA_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "filica/common.hpp"

namespace filica {

// Fitted linked decomposition Y_k ~ xw[k] * h. The component rows of h are
// shared across modalities; xw[k] is the weighted spatial map of modality k.
struct Decomposition {
  std::vector<Matrix> xw;       // per modality, voxels x L
  std::vector<Vector> weights;  // per modality, L; column rms of xw[k]
  Matrix h;                     // L x subjects
  std::vector<double> noise_var;       // per modality residual variance
  std::vector<double> objective_trace; // stacked LS residual per rotation step
  bool converged = false;              // final trace delta < 0.1
  int n_components = 0;

  Index n_modalities() const { return static_cast<Index>(xw.size()); }
  Index n_subjects() const { return h.cols(); }
};

// Fits the shared decomposition on fully observed matrices (all sharing the
// subject columns). The factorization is a rank-L basis of the row-wise
// stacked, 1/sqrt(voxels)-scaled data, rotated by a fixed-point ICA that
// maximizes the third-moment (skewness) non-Gaussianity of the spatial maps.
// Components whose variance sits at the noise floor (estimated from the
// trailing eigenvalues) are damped in the rotation statistics so their
// sampling noise cannot leak into the strong components.
//
// Deterministic: identical inputs and seed give bitwise-identical output.
// When init_h is given the rotation starts from its projection onto the
// score basis instead of a seeded random orthonormal matrix, which keeps
// component order and sign stable across warm-started refits.
Decomposition decompose(const std::vector<Matrix>& modalities, int n_components,
                        int max_iters, const std::optional<Matrix>& init_h,
                        std::uint64_t seed);

// Model prediction xw[k] * h for one modality.
Matrix reconstruct(const Decomposition& d, int modality);

}  // namespace filica

#endif  // FILICA_LICA_HPP

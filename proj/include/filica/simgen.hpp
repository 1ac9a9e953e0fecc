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

#ifndef FILICA_SIMGEN_HPP
#define FILICA_SIMGEN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "filica/dataset.hpp"

namespace filica::sim {

enum class Setting { mcar, mar_continuous, mar_mixed };

const char* setting_name(Setting s);
Setting setting_from_name(const std::string& name);

// Fixed geometry of the simulated studies: two modalities sharing 100
// subjects, two true components.
inline constexpr int kSubjects = 100;
inline constexpr int kVoxels[2] = {1000, 3000};
inline constexpr int kTrueComponents = 2;

struct SimTruth {
  std::vector<Matrix> xw_true;  // per modality, voxels x 2
  Matrix h_true;                // 2 x subjects
  Vector c1, c2;                // covariates; empty under mcar
  std::vector<std::vector<int>> missing_assign;  // per modality, disjoint
  Setting setting = Setting::mcar;
  double missing_pct = 0.0;
  std::uint64_t seed = 0;
};

struct Replicate {
  SimTruth truth;
  std::vector<MaskedModality> modalities;
};

// Two-component spatial map: component 1 is one on entries 0..99, component
// 2 on entries 100..199, zero elsewhere, plus iid standard normal noise on
// every entry scaled by noise_scale (a test hook; 1.0 in the studies).
Matrix gen_spatial_maps(int n_voxels, std::uint64_t seed,
                        double noise_scale = 1.0);

// Missing probability p = 1 / (1 + exp(0.6 - 0.5*c1 - 1.2*c2)).
double logistic_missing_prob(double c1, double c2);

// Generates one replicate. The data draws do not depend on missing_pct, so
// the same seed yields the same underlying matrices for every percentage;
// only the masks change. missing_pct must be one of {0, 0.05, 0.10, 0.20}.
Replicate gen_replicate(Setting setting, double missing_pct, std::uint64_t seed);

// Dataset view of a replicate (manifest + modalities) for persistence.
Dataset to_dataset(const Replicate& rep);

}  // namespace filica::sim

#endif  // FILICA_SIMGEN_HPP

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

#ifndef FILICA_DATASET_HPP
#define FILICA_DATASET_HPP

#include <string>
#include <vector>

#include "filica/common.hpp"

namespace filica {

// One modality's voxels-by-subjects matrix plus the per-subject observation
// mask. Missingness is subject-wise: a column is either fully observed or
// fully missing (NaN before imputation). Immutable after construction by
// convention; fits never mutate their inputs.
struct MaskedModality {
  std::string name;
  Matrix values;               // voxels x subjects
  std::vector<bool> observed;  // length = subjects

  Index n_voxels() const { return values.rows(); }
  Index n_subjects() const { return values.cols(); }
  int n_observed() const {
    int c = 0;
    for (bool o : observed) c += o ? 1 : 0;
    return c;
  }
  std::vector<int> missing_indices() const {
    std::vector<int> out;
    for (size_t s = 0; s < observed.size(); ++s) {
      if (!observed[s]) out.push_back(static_cast<int>(s));
    }
    return out;
  }
};

struct ModalityInfo {
  std::string name;
  int n_voxels = 0;
  std::string data_path;  // relative to the manifest file
};

struct DatasetManifest {
  int n_subjects = 0;
  std::vector<ModalityInfo> modalities;
  std::vector<std::string> subject_ids;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<MaskedModality> modalities;
};

}  // namespace filica

#endif  // FILICA_DATASET_HPP

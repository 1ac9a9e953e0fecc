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

#ifndef FILICA_FILICA_HPP
#define FILICA_FILICA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "filica/dataset.hpp"
#include "filica/lica.hpp"

namespace filica {

enum class Method { filica, completer, replace0, oracle };

const char* method_name(Method m);
Method method_from_name(const std::string& name);

struct FiLicaConfig {
  int n_components = 5;
  int lica_iters = 1000;
  int fi_updates = 20;
  double tol_rel = 1e-3;
  std::uint64_t seed = 0;

  void validate() const;
};

// Relative Frobenius change of the stacked maps and of h for one update.
struct FiDelta {
  double dxw = 0.0;
  double dh = 0.0;
};

struct FusionResult {
  Decomposition decomposition;
  Method method = Method::oracle;
  std::vector<FiDelta> fi_deltas;  // one per optimization update; filica only
  bool fi_converged = false;       // last dxw and dh both below tol_rel
  std::vector<MaskedModality> imputed;  // standardized scale; filica only
  // h columns -> original subject index (the completer subset for the
  // complete-case method, identity otherwise).
  std::vector<int> subjects;
  // Per-modality standardization transforms (voxel means and rms scales);
  // maps fitted on standardized data are taken back to the original data
  // scale with row_scales for reporting.
  std::vector<Vector> row_means;
  std::vector<Vector> row_scales;
  int effective_iters = 0;  // engine iteration budget actually used
};

// Per-voxel standardization over the observed subjects: subtract the mean,
// divide by the root mean square of the demeaned values. Missing cells stay
// missing; rows constant over the observed subjects become all-zero.
MaskedModality standardize(const MaskedModality& m);

// Least-squares recovery of the shared loadings for selected subjects from
// the stacked maps and stacked data of the modalities where those subjects
// are observed: pinv(XW^T XW) XW^T Y restricted to the selected columns.
Matrix crude_h(const Matrix& xw_stacked, const Matrix& y_stacked,
               const std::vector<int>& missing_subjects);

// Replaces the missing columns of m with the model prediction xw_k * h_cols;
// observed columns are untouched and the mask is preserved.
MaskedModality impute_missing(const MaskedModality& m, const Matrix& xw_k,
                              const Matrix& h_cols);

// Rescales every h row to unit standard deviation, absorbing the inverse
// into the matching xw columns; reconstruct() is unchanged.
Decomposition rescale_h(const Decomposition& d);

// Fit on the subjects observed in every modality.
FusionResult fit_complete_case(const std::vector<MaskedModality>& modalities,
                               const FiLicaConfig& cfg);

// The full-information fit: complete-case initialization, least-squares
// recovery of the missing loadings, then alternating impute/refit updates
// until the relative Frobenius deltas fall below cfg.tol_rel.
FusionResult fit_filica(const std::vector<MaskedModality>& modalities,
                        const FiLicaConfig& cfg);

// Zero-fill baseline. On engine failure the iteration budget is reduced by
// 25% (rounded up) and the fit retried until it succeeds or the budget is
// exhausted.
FusionResult fit_replace0(const std::vector<MaskedModality>& modalities,
                          const FiLicaConfig& cfg);

// Fit on fully observed data; errors if anything is missing.
FusionResult fit_oracle(const std::vector<MaskedModality>& modalities,
                        const FiLicaConfig& cfg);

FusionResult fit_method(Method method,
                        const std::vector<MaskedModality>& modalities,
                        const FiLicaConfig& cfg);

// Budget schedule for fit_replace0's retries. Returns the next iteration
// budget after a failure at `iters` (25% off, rounded up, always less than
// `iters`).
int reduced_budget(int iters);

}  // namespace filica

#endif  // FILICA_FILICA_HPP

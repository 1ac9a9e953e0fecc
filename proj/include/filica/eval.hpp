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

#ifndef FILICA_EVAL_HPP
#define FILICA_EVAL_HPP

#include <array>
#include <vector>

#include "filica/common.hpp"
#include "filica/report.hpp"

namespace filica::eval {

// Best-matching assignment of estimated components to the two true ones.
struct MatchResult {
  std::array<int, 2> mapping{-1, -1};       // estimated column per true comp
  std::array<double, 2> sign{1.0, 1.0};     // from the matched h correlation
  std::array<double, 2> xw_abs_corr{0.0, 0.0};
  std::array<double, 2> h_abs_corr{0.0, 0.0};
  bool duplicate = false;  // both true components hit the same estimate
};

// Pearson correlation; throws on zero variance.
double pearson(const Vector& a, const Vector& b);

// For each true component, picks the estimated column of xw_est_stacked with
// the largest |corr| against the true column. Zero-variance estimated columns
// are skipped; it is an error only if every column is skipped.
MatchResult best_match(const Matrix& xw_est_stacked, const Matrix& xw_true_stacked);

// Fills h_abs_corr and sign on a copy of `match`. h_est holds either all
// subjects or exactly the subset columns (ascending subject order); when
// subject_subset is empty all subjects are used.
MatchResult h_metrics(const Matrix& h_est, const Matrix& h_true,
                      const MatchResult& match,
                      const std::vector<int>& subject_subset = {});

enum class BiasKind { correlation, cohens_d };

// Statistic of the sign-adjusted matched loading row against a covariate,
// minus the stated truth. cohens_d uses the pooled-variance denominator
// sqrt(((n1-1)s1^2 + (n0-1)s0^2) / (n1+n0-2)) over the binary groups.
double covariate_bias(const Vector& h_row_matched, double sign,
                      const Vector& covariate, double truth, BiasKind kind);

// Group statistics (mean, sample sd, median, quartiles with linear
// interpolation) per (setting, pct, method, metric, component).
EvalReport aggregate(const std::vector<EvalRow>& rows);

}  // namespace filica::eval

#endif  // FILICA_EVAL_HPP

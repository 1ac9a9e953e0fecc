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

#ifndef FILICA_KERNELS_HPP
#define FILICA_KERNELS_HPP

#include <vector>

#include "filica/common.hpp"

namespace filica::kernels {

// OpenMP kernels for the hot dense-matrix loops, with serial twins kept as
// the reference implementation. Every parallel kernel partitions work so
// that each output element (or fixed chunk partial) is accumulated by
// exactly one thread in a fixed operation order; results are bitwise
// identical to the serial twins for any thread count.

// C = A * B. Parallel over output columns.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_serial(const Matrix& a, const Matrix& b);

// C = A^T * B. Parallel over output columns.
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
Matrix matmul_at_b_serial(const Matrix& a, const Matrix& b);

// C = A * B^T where A, B share the (long) column dimension. The reduction
// over that dimension is split into fixed-size chunks whose partials are
// combined in chunk order.
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);
Matrix matmul_a_bt_serial(const Matrix& a, const Matrix& b);

// Squared Frobenius norm of A, and of A - B. Per-column partial sums are
// combined in column order.
double frob_sq(const Matrix& a);
double frob_sq_serial(const Matrix& a);
double frob_sq_diff(const Matrix& a, const Matrix& b);
double frob_sq_diff_serial(const Matrix& a, const Matrix& b);

// Row standardization over a subject mask: for each row, subtract the mean
// of the observed entries and divide by their root mean square; rows that
// are constant over the observed entries become all-zero. Unobserved
// entries are left untouched. Writes the per-row mean and scale (the rms
// actually divided by, 1.0 for constant rows). Parallel over rows.
void standardize_rows(Matrix& m, const std::vector<bool>& observed,
                      Vector& row_mean, Vector& row_scale);
void standardize_rows_serial(Matrix& m, const std::vector<bool>& observed,
                             Vector& row_mean, Vector& row_scale);

}  // namespace filica::kernels

#endif  // FILICA_KERNELS_HPP

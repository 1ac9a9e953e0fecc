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

#include "filica/kernels.hpp"

#include <cmath>

namespace filica::kernels {

namespace {
// Chunk width for long-dimension reductions. Fixed so that the partial
// combination order does not depend on the thread count.
constexpr Index kChunk = 512;

void check_inner(Index a, Index b, const char* op) {
  if (a != b) throw Error(std::string(op) + ": inner dimensions differ");
}
}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.rows(), "matmul");
  Matrix c(a.rows(), b.cols());
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < b.cols(); ++j) {
    c.col(j).setZero();
    for (Index k = 0; k < a.cols(); ++k) {
      c.col(j) += a.col(k) * b(k, j);
    }
  }
  return c;
}

Matrix matmul_serial(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.rows(), "matmul");
  Matrix c(a.rows(), b.cols());
  for (Index j = 0; j < b.cols(); ++j) {
    c.col(j).setZero();
    for (Index k = 0; k < a.cols(); ++k) {
      c.col(j) += a.col(k) * b(k, j);
    }
  }
  return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
  check_inner(a.rows(), b.rows(), "matmul_at_b");
  Matrix c(a.cols(), b.cols());
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < b.cols(); ++j) {
    for (Index i = 0; i < a.cols(); ++i) {
      double s = 0.0;
      for (Index k = 0; k < a.rows(); ++k) s += a(k, i) * b(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

Matrix matmul_at_b_serial(const Matrix& a, const Matrix& b) {
  check_inner(a.rows(), b.rows(), "matmul_at_b");
  Matrix c(a.cols(), b.cols());
  for (Index j = 0; j < b.cols(); ++j) {
    for (Index i = 0; i < a.cols(); ++i) {
      double s = 0.0;
      for (Index k = 0; k < a.rows(); ++k) s += a(k, i) * b(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.cols(), "matmul_a_bt");
  const Index n = a.cols();
  const Index nchunks = (n + kChunk - 1) / kChunk;
  std::vector<Matrix> partial(static_cast<size_t>(nchunks));
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < nchunks; ++c) {
    const Index lo = c * kChunk;
    const Index hi = std::min(lo + kChunk, n);
    Matrix p = Matrix::Zero(a.rows(), b.rows());
    for (Index k = lo; k < hi; ++k) {
      for (Index j = 0; j < b.rows(); ++j) {
        p.col(j) += a.col(k) * b(j, k);
      }
    }
    partial[static_cast<size_t>(c)] = std::move(p);
  }
  Matrix out = Matrix::Zero(a.rows(), b.rows());
  for (const Matrix& p : partial) out += p;
  return out;
}

Matrix matmul_a_bt_serial(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.cols(), "matmul_a_bt");
  const Index n = a.cols();
  const Index nchunks = (n + kChunk - 1) / kChunk;
  Matrix out = Matrix::Zero(a.rows(), b.rows());
  for (Index c = 0; c < nchunks; ++c) {
    const Index lo = c * kChunk;
    const Index hi = std::min(lo + kChunk, n);
    Matrix p = Matrix::Zero(a.rows(), b.rows());
    for (Index k = lo; k < hi; ++k) {
      for (Index j = 0; j < b.rows(); ++j) {
        p.col(j) += a.col(k) * b(j, k);
      }
    }
    out += p;
  }
  return out;
}

namespace {

template <typename ColSq>
double frob_by_columns(Index ncols, ColSq col_sq) {
  std::vector<double> partial(static_cast<size_t>(ncols));
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < ncols; ++j) {
    partial[static_cast<size_t>(j)] = col_sq(j);
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

template <typename ColSq>
double frob_by_columns_serial(Index ncols, ColSq col_sq) {
  double s = 0.0;
  for (Index j = 0; j < ncols; ++j) s += col_sq(j);
  return s;
}

}  // namespace

double frob_sq(const Matrix& a) {
  return frob_by_columns(a.cols(), [&](Index j) {
    double s = 0.0;
    for (Index i = 0; i < a.rows(); ++i) s += a(i, j) * a(i, j);
    return s;
  });
}

double frob_sq_serial(const Matrix& a) {
  return frob_by_columns_serial(a.cols(), [&](Index j) {
    double s = 0.0;
    for (Index i = 0; i < a.rows(); ++i) s += a(i, j) * a(i, j);
    return s;
  });
}

double frob_sq_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error("frob_sq_diff: shape mismatch");
  }
  return frob_by_columns(a.cols(), [&](Index j) {
    double s = 0.0;
    for (Index i = 0; i < a.rows(); ++i) {
      double d = a(i, j) - b(i, j);
      s += d * d;
    }
    return s;
  });
}

double frob_sq_diff_serial(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error("frob_sq_diff: shape mismatch");
  }
  return frob_by_columns_serial(a.cols(), [&](Index j) {
    double s = 0.0;
    for (Index i = 0; i < a.rows(); ++i) {
      double d = a(i, j) - b(i, j);
      s += d * d;
    }
    return s;
  });
}

namespace {

// Shared per-row body so the omp and serial variants cannot drift apart.
inline void standardize_row(Matrix& m, const std::vector<bool>& observed,
                            Index i, Index nobs, Vector& row_mean,
                            Vector& row_scale) {
  double mean = 0.0;
  for (Index j = 0; j < m.cols(); ++j) {
    if (observed[static_cast<size_t>(j)]) mean += m(i, j);
  }
  mean /= static_cast<double>(nobs);
  double ss = 0.0;
  for (Index j = 0; j < m.cols(); ++j) {
    if (observed[static_cast<size_t>(j)]) {
      double d = m(i, j) - mean;
      ss += d * d;
    }
  }
  double rms = std::sqrt(ss / static_cast<double>(nobs));
  row_mean[i] = mean;
  if (rms == 0.0) {
    // Constant row: define the output as all-zero.
    row_scale[i] = 1.0;
    for (Index j = 0; j < m.cols(); ++j) {
      if (observed[static_cast<size_t>(j)]) m(i, j) = 0.0;
    }
    return;
  }
  row_scale[i] = rms;
  for (Index j = 0; j < m.cols(); ++j) {
    if (observed[static_cast<size_t>(j)]) m(i, j) = (m(i, j) - mean) / rms;
  }
}

Index count_observed(const Matrix& m, const std::vector<bool>& observed) {
  if (static_cast<Index>(observed.size()) != m.cols()) {
    throw Error("standardize_rows: mask length != column count");
  }
  Index nobs = 0;
  for (bool o : observed) nobs += o ? 1 : 0;
  if (nobs < 2) throw Error("standardize_rows: fewer than 2 observed subjects");
  return nobs;
}

}  // namespace

void standardize_rows(Matrix& m, const std::vector<bool>& observed,
                      Vector& row_mean, Vector& row_scale) {
  const Index nobs = count_observed(m, observed);
  row_mean.resize(m.rows());
  row_scale.resize(m.rows());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < m.rows(); ++i) {
    standardize_row(m, observed, i, nobs, row_mean, row_scale);
  }
}

void standardize_rows_serial(Matrix& m, const std::vector<bool>& observed,
                             Vector& row_mean, Vector& row_scale) {
  const Index nobs = count_observed(m, observed);
  row_mean.resize(m.rows());
  row_scale.resize(m.rows());
  for (Index i = 0; i < m.rows(); ++i) {
    standardize_row(m, observed, i, nobs, row_mean, row_scale);
  }
}

}  // namespace filica::kernels

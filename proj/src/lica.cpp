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

#include "filica/lica.hpp"

#include <cmath>

#include "filica/kernels.hpp"
#include "filica/rng.hpp"

namespace filica {

namespace {

constexpr std::uint64_t kIcaInitStream = 0x1caull;
constexpr double kRankTol = 1e-12;       // relative eigenvalue cutoff
constexpr double kRotationTol = 1e-10;   // fixed-point alignment stop
constexpr double kMinDamp = 1e-3;        // keeps damped dims full-rank
constexpr double kObjectiveTol = 0.1;    // convergence on the trace delta

// W <- (W W^T)^{-1/2} W, the symmetric orthonormalization step.
Matrix sym_orth(const Matrix& w) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(w * w.transpose());
  const Vector& lam = es.eigenvalues();
  double lmax = lam(lam.size() - 1);
  if (!(lmax > 0.0) || lam(0) <= lmax * 1e-26) {
    throw Error("decompose: unmixing update is rank-deficient");
  }
  Vector inv_sqrt = lam.cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_sqrt.asDiagonal() *
         es.eigenvectors().transpose() * w;
}

void validate_inputs(const std::vector<Matrix>& mods, int L, int max_iters,
                     const std::optional<Matrix>& init_h) {
  if (mods.empty()) throw Error("decompose: no modalities");
  if (L < 1) throw Error("decompose: n_components must be positive");
  if (max_iters < 1) throw Error("decompose: max_iters must be positive");
  const Index n = mods[0].cols();
  Index total_voxels = 0;
  for (size_t k = 0; k < mods.size(); ++k) {
    const Matrix& m = mods[k];
    if (m.cols() != n) throw Error("decompose: subject counts differ");
    if (m.rows() < 1) throw Error("decompose: empty modality");
    if (!m.allFinite()) {
      throw Error("decompose: modality " + std::to_string(k) +
                  " contains non-finite values");
    }
    if (m.isZero(0.0)) {
      throw Error("decompose: modality " + std::to_string(k) +
                  " is identically zero");
    }
    total_voxels += m.rows();
  }
  if (L > std::min<Index>(n, total_voxels)) {
    throw Error("decompose: n_components exceeds min(subjects, total voxels)");
  }
  if (init_h) {
    if (init_h->rows() != L || init_h->cols() != n) {
      throw Error("decompose: init_h has wrong shape");
    }
    if (!init_h->allFinite()) throw Error("decompose: init_h not finite");
    for (Index i = 0; i < L; ++i) {
      double mean = init_h->row(i).mean();
      double var = (init_h->row(i).array() - mean).square().mean();
      if (var <= 0.0) {
        throw Error("decompose: init_h row " + std::to_string(i) +
                    " has zero variance");
      }
    }
  }
}

}  // namespace

Decomposition decompose(const std::vector<Matrix>& modalities, int n_components,
                        int max_iters, const std::optional<Matrix>& init_h,
                        std::uint64_t seed) {
  validate_inputs(modalities, n_components, max_iters, init_h);
  const int L = n_components;
  const Index n = modalities[0].cols();

  // Row-stack the modalities, scaling each by 1/sqrt(voxels) so that every
  // modality contributes comparably regardless of its resolution.
  Index total_voxels = 0;
  for (const Matrix& m : modalities) total_voxels += m.rows();
  Matrix ys(total_voxels, n);
  {
    Index at = 0;
    for (const Matrix& m : modalities) {
      ys.middleRows(at, m.rows()) =
          m / std::sqrt(static_cast<double>(m.rows()));
      at += m.rows();
    }
  }
  const double p = static_cast<double>(total_voxels);

  // Rank-L basis from the subject-space Gram matrix.
  Matrix gram = kernels::matmul_at_b(ys, ys);
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  if (es.info() != Eigen::Success) throw Error("decompose: eigensolver failed");
  const Vector& all_lam = es.eigenvalues();  // ascending
  const double lam_max = std::max(all_lam(n - 1), 0.0);
  Vector lam(L);
  Matrix basis(n, L);  // right singular vectors, strongest first
  for (int i = 0; i < L; ++i) {
    lam(i) = std::max(all_lam(n - 1 - i), 0.0);
    basis.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  if (lam(L - 1) <= lam_max * kRankTol || lam_max == 0.0) {
    throw Error("decompose: data rank is below the requested n_components");
  }
  // Canonical sign: largest-magnitude coordinate positive.
  for (int i = 0; i < L; ++i) {
    Index arg = 0;
    basis.col(i).cwiseAbs().maxCoeff(&arg);
    if (basis(arg, i) < 0.0) basis.col(i) = -basis.col(i);
  }
  // Noise floor from the trailing eigenvalues; components at the floor are
  // damped in the rotation statistics.
  double floor = 0.0;
  if (n > L) {
    double s = 0.0;
    for (Index i = 0; i < n - L; ++i) s += std::max(all_lam(i), 0.0);
    floor = s / static_cast<double>(n - L);
  }
  Vector damp(L);
  for (int i = 0; i < L; ++i) {
    damp(i) = std::clamp((lam(i) - floor) / lam(i), kMinDamp, 1.0);
  }

  Vector sv = lam.cwiseSqrt();
  Matrix scores = sv.asDiagonal() * basis.transpose();  // L x n
  // Spatial coordinates, one column per voxel, unit second moment per row.
  Matrix spatial = kernels::matmul(ys, basis * sv.cwiseInverse().asDiagonal())
                       .transpose() *
                   std::sqrt(p);
  Matrix spatial_damped = damp.asDiagonal() * spatial;

  Matrix w(L, L);
  if (init_h) {
    w = sym_orth(*init_h * basis * sv.cwiseInverse().asDiagonal());
  } else {
    Rng rng(seed, kIcaInitStream);
    Matrix w0(L, L);
    for (Index j = 0; j < L; ++j) {
      for (Index i = 0; i < L; ++i) w0(i, j) = rng.next_normal();
    }
    w = sym_orth(w0);
  }

  const double base_sq =
      std::max(kernels::frob_sq(ys) - lam.sum(), 0.0);

  Decomposition d;
  d.n_components = L;
  // Third-moment fixed-point rotation over the voxel dimension.
  for (int iter = 0; iter < max_iters; ++iter) {
    Matrix comps = w * spatial_damped;
    Matrix sq = comps.cwiseProduct(comps);
    Matrix w_new = sym_orth(kernels::matmul_a_bt(sq, spatial_damped) / p);
    double delta = 0.0;
    for (int i = 0; i < L; ++i) {
      delta = std::max(delta, 1.0 - std::abs(w_new.row(i).dot(w.row(i))));
    }
    w = w_new;
    if (!w.allFinite()) {
      throw Error("decompose: unmixing iteration produced non-finite values");
    }
    // Stacked least-squares residual at the current rotation, evaluated in
    // the compressed coordinates.
    Matrix h_now = w * scores;
    Matrix hht = h_now * h_now.transpose();
    Matrix coef = hht.ldlt().solve(h_now * scores.transpose()).transpose();
    d.objective_trace.push_back(
        std::sqrt(base_sq + kernels::frob_sq(scores - coef * h_now)));
    if (delta < kRotationTol) break;
  }

  d.h = w * scores;

  // Per-modality spatial maps by least squares against the input data.
  Matrix hht = kernels::matmul_a_bt(d.h, d.h);
  Eigen::LDLT<Matrix> solver(hht);
  for (const Matrix& m : modalities) {
    Matrix yht = kernels::matmul_a_bt(m, d.h);  // voxels x L
    Matrix xw = solver.solve(yht.transpose()).transpose();
    if (!xw.allFinite()) {
      throw Error("decompose: spatial map solve produced non-finite values");
    }
    Vector wts(L);
    for (int l = 0; l < L; ++l) {
      wts(l) = std::sqrt(xw.col(l).squaredNorm() /
                         static_cast<double>(xw.rows()));
    }
    d.noise_var.push_back(kernels::frob_sq_diff(m, kernels::matmul(xw, d.h)) /
                          (static_cast<double>(m.rows()) *
                           static_cast<double>(n)));
    d.weights.push_back(std::move(wts));
    d.xw.push_back(std::move(xw));
  }

  const size_t t = d.objective_trace.size();
  d.converged = t >= 2 && std::abs(d.objective_trace[t - 1] -
                                   d.objective_trace[t - 2]) < kObjectiveTol;
  return d;
}

Matrix reconstruct(const Decomposition& d, int modality) {
  if (modality < 0 || modality >= static_cast<int>(d.xw.size())) {
    throw Error("reconstruct: modality index out of range");
  }
  return kernels::matmul(d.xw[static_cast<size_t>(modality)], d.h);
}

}  // namespace filica

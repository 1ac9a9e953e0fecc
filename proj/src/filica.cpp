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

#include "filica/filica.hpp"

#include <cmath>
#include <map>

#include "filica/kernels.hpp"

namespace filica {

const char* method_name(Method m) {
  switch (m) {
    case Method::filica: return "filica";
    case Method::completer: return "completer";
    case Method::replace0: return "replace0";
    case Method::oracle: return "oracle";
  }
  throw Error("unknown method");
}

Method method_from_name(const std::string& name) {
  if (name == "filica") return Method::filica;
  if (name == "completer") return Method::completer;
  if (name == "replace0") return Method::replace0;
  if (name == "oracle") return Method::oracle;
  throw Error("unknown method '" + name + "'");
}

void FiLicaConfig::validate() const {
  if (n_components < 1) throw Error("config: n_components must be positive");
  if (lica_iters < 1) throw Error("config: lica_iters must be positive");
  if (fi_updates < 1) throw Error("config: fi_updates must be positive");
  if (!(tol_rel > 0.0 && tol_rel < 1.0)) {
    throw Error("config: tol_rel must be in (0, 1)");
  }
}

namespace {

struct Standardized {
  std::vector<MaskedModality> mods;
  std::vector<Vector> means;
  std::vector<Vector> scales;
};

void check_same_subjects(const std::vector<MaskedModality>& mods) {
  if (mods.empty()) throw Error("fit: no modalities");
  const Index n = mods[0].n_subjects();
  for (const auto& m : mods) {
    if (m.n_subjects() != n) throw Error("fit: subject counts differ");
    if (static_cast<Index>(m.observed.size()) != n) {
      throw Error("fit: mask length != subject count");
    }
  }
}

Standardized standardize_all(const std::vector<MaskedModality>& mods) {
  Standardized out;
  for (const auto& m : mods) {
    MaskedModality s = m;
    Vector mean, scale;
    if (!m.values.allFinite()) {
      // NaN is the missing marker; only masked columns may contain it.
      for (Index j = 0; j < m.values.cols(); ++j) {
        if (!m.observed[static_cast<size_t>(j)]) continue;
        if (!m.values.col(j).allFinite()) {
          throw Error("standardize: non-finite value in observed column " +
                      std::to_string(j) + " of modality '" + m.name + "'");
        }
      }
    }
    kernels::standardize_rows(s.values, s.observed, mean, scale);
    out.mods.push_back(std::move(s));
    out.means.push_back(std::move(mean));
    out.scales.push_back(std::move(scale));
  }
  return out;
}

std::vector<int> completer_indices(const std::vector<MaskedModality>& mods) {
  std::vector<int> out;
  const Index n = mods[0].n_subjects();
  for (Index s = 0; s < n; ++s) {
    bool all = true;
    for (const auto& m : mods) all = all && m.observed[static_cast<size_t>(s)];
    if (all) out.push_back(static_cast<int>(s));
  }
  return out;
}

Matrix select_columns(const Matrix& m, const std::vector<int>& cols) {
  Matrix out(m.rows(), static_cast<Index>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) {
    out.col(static_cast<Index>(j)) = m.col(cols[j]);
  }
  return out;
}

Matrix stack_rows(const std::vector<Matrix>& parts) {
  Index rows = 0;
  for (const auto& p : parts) rows += p.rows();
  Matrix out(rows, parts[0].cols());
  Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p;
    at += p.rows();
  }
  return out;
}

}  // namespace

MaskedModality standardize(const MaskedModality& m) {
  if (m.n_observed() < 2) {
    throw Error("standardize: modality '" + m.name +
                "' has fewer than 2 observed subjects");
  }
  std::vector<MaskedModality> one{m};
  return standardize_all(one).mods[0];
}

Matrix crude_h(const Matrix& xw_stacked, const Matrix& y_stacked,
               const std::vector<int>& missing_subjects) {
  if (xw_stacked.rows() != y_stacked.rows()) {
    throw Error("crude_h: stacked row counts differ");
  }
  const Index L = xw_stacked.cols();
  if (xw_stacked.rows() < L) {
    throw Error("crude_h: fewer stacked rows than components");
  }
  Matrix y_sel(y_stacked.rows(), static_cast<Index>(missing_subjects.size()));
  for (size_t j = 0; j < missing_subjects.size(); ++j) {
    int s = missing_subjects[j];
    if (s < 0 || s >= y_stacked.cols()) throw Error("crude_h: bad subject index");
    if (!y_stacked.col(s).allFinite()) {
      throw Error("crude_h: subject " + std::to_string(s) +
                  " has no observed data in the stacked modalities");
    }
    y_sel.col(static_cast<Index>(j)) = y_stacked.col(s);
  }
  // Minimum-norm least squares through the pseudoinverse of the Gram matrix.
  Matrix gram = kernels::matmul_at_b(xw_stacked, xw_stacked);
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  if (es.info() != Eigen::Success) throw Error("crude_h: eigensolver failed");
  const Vector& lam = es.eigenvalues();
  const double cutoff = std::max(lam(L - 1), 0.0) * 1e-12;
  Vector inv(L);
  for (Index i = 0; i < L; ++i) {
    inv(i) = lam(i) > cutoff ? 1.0 / lam(i) : 0.0;
  }
  Matrix pinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  return pinv * kernels::matmul_at_b(xw_stacked, y_sel);
}

MaskedModality impute_missing(const MaskedModality& m, const Matrix& xw_k,
                              const Matrix& h_cols) {
  const std::vector<int> missing = m.missing_indices();
  if (h_cols.cols() != static_cast<Index>(missing.size())) {
    throw Error("impute_missing: h column count != missing subject count");
  }
  if (xw_k.rows() != m.n_voxels() || xw_k.cols() != h_cols.rows()) {
    throw Error("impute_missing: dimension mismatch");
  }
  MaskedModality out = m;
  if (!missing.empty()) {
    Matrix fill = kernels::matmul(xw_k, h_cols);
    for (size_t j = 0; j < missing.size(); ++j) {
      out.values.col(missing[j]) = fill.col(static_cast<Index>(j));
    }
  }
  return out;
}

Decomposition rescale_h(const Decomposition& d) {
  const Index L = d.h.rows();
  Vector sd(L);
  for (Index i = 0; i < L; ++i) {
    double mean = d.h.row(i).mean();
    double var = (d.h.row(i).array() - mean).square().mean();
    if (var <= 0.0) {
      throw Error("rescale_h: h row " + std::to_string(i) + " has zero variance");
    }
    sd(i) = std::sqrt(var);
  }
  Decomposition out = d;
  out.h = sd.cwiseInverse().asDiagonal() * d.h;
  for (size_t k = 0; k < d.xw.size(); ++k) {
    out.xw[k] = d.xw[k] * sd.asDiagonal();
    out.weights[k] = d.weights[k].cwiseProduct(sd);
  }
  return out;
}

namespace {

FusionResult complete_case_impl(const Standardized& std_data,
                                const FiLicaConfig& cfg) {
  const std::vector<int> completers = completer_indices(std_data.mods);
  if (static_cast<int>(completers.size()) < cfg.n_components) {
    throw Error("fit_complete_case: only " + std::to_string(completers.size()) +
                " complete cases for " + std::to_string(cfg.n_components) +
                " components");
  }
  std::vector<Matrix> sub;
  for (const auto& m : std_data.mods) sub.push_back(select_columns(m.values, completers));
  FusionResult r;
  r.decomposition = rescale_h(
      decompose(sub, cfg.n_components, cfg.lica_iters, std::nullopt, cfg.seed));
  r.method = Method::completer;
  r.subjects = completers;
  r.row_means = std_data.means;
  r.row_scales = std_data.scales;
  r.effective_iters = cfg.lica_iters;
  return r;
}

std::vector<int> identity_subjects(Index n) {
  std::vector<int> out(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) out[static_cast<size_t>(i)] = static_cast<int>(i);
  return out;
}

}  // namespace

FusionResult fit_complete_case(const std::vector<MaskedModality>& modalities,
                               const FiLicaConfig& cfg) {
  cfg.validate();
  check_same_subjects(modalities);
  return complete_case_impl(standardize_all(modalities), cfg);
}

FusionResult fit_filica(const std::vector<MaskedModality>& modalities,
                        const FiLicaConfig& cfg) {
  cfg.validate();
  check_same_subjects(modalities);
  const Index n = modalities[0].n_subjects();
  const size_t K = modalities.size();
  for (Index s = 0; s < n; ++s) {
    bool anywhere = false;
    for (const auto& m : modalities) anywhere |= bool(m.observed[static_cast<size_t>(s)]);
    if (!anywhere) {
      throw Error("fit_filica: subject " + std::to_string(s) +
                  " is missing in every modality");
    }
  }

  Standardized std_data = standardize_all(modalities);
  FusionResult init = complete_case_impl(std_data, cfg);
  const int L = cfg.n_components;

  // Crude loadings for every subject with missing data, solved from the
  // modalities where that subject is observed. Subjects sharing an observed
  // pattern are solved together. A subject missing in several modalities
  // gets one estimate (the per-modality solves would coincide anyway, since
  // they use the same observed stack).
  Matrix h_hat = Matrix::Zero(L, n);
  for (size_t j = 0; j < init.subjects.size(); ++j) {
    h_hat.col(init.subjects[j]) = init.decomposition.h.col(static_cast<Index>(j));
  }
  std::map<std::vector<bool>, std::vector<int>> groups;
  for (Index s = 0; s < n; ++s) {
    std::vector<bool> pattern(K);
    bool complete = true;
    for (size_t k = 0; k < K; ++k) {
      pattern[k] = modalities[k].observed[static_cast<size_t>(s)];
      complete = complete && pattern[k];
    }
    if (!complete) groups[pattern].push_back(static_cast<int>(s));
  }
  for (const auto& [pattern, subjects] : groups) {
    std::vector<Matrix> xw_parts, y_parts;
    for (size_t k = 0; k < K; ++k) {
      if (pattern[k]) {
        xw_parts.push_back(init.decomposition.xw[k]);
        y_parts.push_back(std_data.mods[k].values);
      }
    }
    Matrix cols = crude_h(stack_rows(xw_parts), stack_rows(y_parts), subjects);
    for (size_t j = 0; j < subjects.size(); ++j) {
      h_hat.col(subjects[j]) = cols.col(static_cast<Index>(j));
    }
  }

  // Initial imputation from the complete-case maps.
  std::vector<MaskedModality> full;
  for (size_t k = 0; k < K; ++k) {
    full.push_back(impute_missing(
        std_data.mods[k], init.decomposition.xw[k],
        select_columns(h_hat, std_data.mods[k].missing_indices())));
  }

  Matrix xw_prev = stack_rows(init.decomposition.xw);
  Matrix h_prev = h_hat;

  FusionResult r;
  r.method = Method::filica;
  r.subjects = identity_subjects(n);
  r.row_means = std_data.means;
  r.row_scales = std_data.scales;
  r.effective_iters = cfg.lica_iters;

  for (int step = 0; step < cfg.fi_updates; ++step) {
    std::vector<Matrix> values;
    for (const auto& m : full) values.push_back(m.values);
    Decomposition d = rescale_h(
        decompose(values, L, cfg.lica_iters, h_prev, cfg.seed));
    for (size_t k = 0; k < K; ++k) {
      full[k] = impute_missing(full[k], d.xw[k],
                               select_columns(d.h, full[k].missing_indices()));
    }
    Matrix xw_now = stack_rows(d.xw);
    FiDelta delta;
    delta.dxw = std::sqrt(kernels::frob_sq_diff(xw_now, xw_prev) /
                          kernels::frob_sq(xw_now));
    delta.dh = std::sqrt(kernels::frob_sq_diff(d.h, h_prev) /
                         kernels::frob_sq(d.h));
    r.fi_deltas.push_back(delta);
    xw_prev = std::move(xw_now);
    h_prev = d.h;
    r.decomposition = std::move(d);
    if (delta.dxw < cfg.tol_rel && delta.dh < cfg.tol_rel) {
      r.fi_converged = true;
      break;
    }
  }
  r.imputed = std::move(full);
  return r;
}

int reduced_budget(int iters) {
  int next = (3 * iters + 3) / 4;  // 25% off, remainder rounded up
  if (next >= iters) next = iters - 1;
  return next;
}

FusionResult fit_replace0(const std::vector<MaskedModality>& modalities,
                          const FiLicaConfig& cfg) {
  cfg.validate();
  check_same_subjects(modalities);
  Standardized std_data = standardize_all(modalities);
  std::vector<Matrix> filled;
  for (auto& m : std_data.mods) {
    Matrix v = m.values;
    for (int s : m.missing_indices()) v.col(s).setZero();
    filled.push_back(std::move(v));
  }
  int budget = cfg.lica_iters;
  std::string last_error;
  while (budget >= 1) {
    try {
      FusionResult r;
      r.decomposition = rescale_h(
          decompose(filled, cfg.n_components, budget, std::nullopt, cfg.seed));
      r.method = Method::replace0;
      r.subjects = identity_subjects(modalities[0].n_subjects());
      r.row_means = std_data.means;
      r.row_scales = std_data.scales;
      r.effective_iters = budget;
      return r;
    } catch (const Error& e) {
      last_error = e.what();
      budget = reduced_budget(budget);
    }
  }
  throw Error("fit_replace0: iteration budget exhausted; last failure: " +
              last_error);
}

FusionResult fit_oracle(const std::vector<MaskedModality>& modalities,
                        const FiLicaConfig& cfg) {
  cfg.validate();
  check_same_subjects(modalities);
  for (const auto& m : modalities) {
    for (bool o : m.observed) {
      if (!o) {
        throw Error("fit_oracle: modality '" + m.name + "' has missing subjects");
      }
    }
    if (!m.values.allFinite()) {
      throw Error("fit_oracle: modality '" + m.name + "' has non-finite cells");
    }
  }
  Standardized std_data = standardize_all(modalities);
  std::vector<Matrix> values;
  for (const auto& m : std_data.mods) values.push_back(m.values);
  FusionResult r;
  r.decomposition = rescale_h(
      decompose(values, cfg.n_components, cfg.lica_iters, std::nullopt, cfg.seed));
  r.method = Method::oracle;
  r.subjects = identity_subjects(modalities[0].n_subjects());
  r.row_means = std_data.means;
  r.row_scales = std_data.scales;
  r.effective_iters = cfg.lica_iters;
  return r;
}

FusionResult fit_method(Method method,
                        const std::vector<MaskedModality>& modalities,
                        const FiLicaConfig& cfg) {
  switch (method) {
    case Method::filica: return fit_filica(modalities, cfg);
    case Method::completer: return fit_complete_case(modalities, cfg);
    case Method::replace0: return fit_replace0(modalities, cfg);
    case Method::oracle: return fit_oracle(modalities, cfg);
  }
  throw Error("unknown method");
}

}  // namespace filica

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

#include "filica/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace filica::eval {

namespace {

struct Cent {
  Vector v;
  double norm;  // l2 norm of the centered vector
};

Cent center(const Vector& a) {
  Cent c;
  c.v = a.array() - a.mean();
  c.norm = c.v.norm();
  return c;
}

double quantile_type7(const std::vector<double>& sorted, double p) {
  const size_t n = sorted.size();
  if (n == 1) return sorted[0];
  double h = static_cast<double>(n - 1) * p;
  size_t lo = static_cast<size_t>(h);
  if (lo >= n - 1) return sorted[n - 1];
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

double pearson(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw Error("pearson: need two vectors of equal length >= 2");
  }
  Cent ca = center(a);
  Cent cb = center(b);
  if (ca.norm == 0.0 || cb.norm == 0.0) {
    throw Error("pearson: zero-variance input");
  }
  return ca.v.dot(cb.v) / (ca.norm * cb.norm);
}

MatchResult best_match(const Matrix& xw_est_stacked,
                       const Matrix& xw_true_stacked) {
  if (xw_true_stacked.cols() != 2) {
    throw Error("best_match: expected two true components");
  }
  if (xw_est_stacked.rows() != xw_true_stacked.rows()) {
    throw Error("best_match: stacked voxel counts differ");
  }
  if (xw_est_stacked.cols() < 2) {
    throw Error("best_match: need at least two estimated components");
  }
  MatchResult match;
  for (int j = 0; j < 2; ++j) {
    Cent truth = center(xw_true_stacked.col(j));
    if (truth.norm == 0.0) throw Error("best_match: zero-variance true map");
    double best = -1.0;
    int arg = -1;
    for (Index l = 0; l < xw_est_stacked.cols(); ++l) {
      Cent est = center(xw_est_stacked.col(l));
      if (est.norm == 0.0) continue;  // correlation undefined; excluded
      double c = std::abs(truth.v.dot(est.v) / (truth.norm * est.norm));
      if (c > best) {
        best = c;
        arg = static_cast<int>(l);
      }
    }
    if (arg < 0) {
      throw Error("best_match: every estimated column has zero variance");
    }
    match.mapping[static_cast<size_t>(j)] = arg;
    match.xw_abs_corr[static_cast<size_t>(j)] = best;
  }
  if (match.mapping[0] == match.mapping[1]) {
    match.duplicate = true;
    std::fprintf(stderr,
                 "best_match: both true components matched estimated column "
                 "%d\n",
                 match.mapping[0]);
  }
  return match;
}

MatchResult h_metrics(const Matrix& h_est, const Matrix& h_true,
                      const MatchResult& match,
                      const std::vector<int>& subject_subset) {
  if (h_true.rows() != 2) throw Error("h_metrics: expected two true rows");
  const Index n = h_true.cols();
  MatchResult out = match;

  std::vector<int> subset = subject_subset;
  if (subset.empty()) {
    if (h_est.cols() != n) {
      throw Error("h_metrics: estimated columns != subjects and no subset given");
    }
    subset.resize(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) subset[static_cast<size_t>(i)] = static_cast<int>(i);
  }
  if (subset.size() < 3) throw Error("h_metrics: subset has fewer than 3 subjects");
  const bool est_is_subset = h_est.cols() == static_cast<Index>(subset.size());
  if (!est_is_subset && h_est.cols() != n) {
    throw Error("h_metrics: estimated columns cover neither all subjects nor the subset");
  }

  for (int j = 0; j < 2; ++j) {
    const int l = match.mapping[static_cast<size_t>(j)];
    if (l < 0 || l >= h_est.rows()) throw Error("h_metrics: bad mapping");
    Vector est(static_cast<Index>(subset.size()));
    Vector truth(static_cast<Index>(subset.size()));
    for (size_t i = 0; i < subset.size(); ++i) {
      int s = subset[i];
      if (s < 0 || s >= n) throw Error("h_metrics: subject index out of range");
      est(static_cast<Index>(i)) =
          est_is_subset ? h_est(l, static_cast<Index>(i)) : h_est(l, s);
      truth(static_cast<Index>(i)) = h_true(j, s);
    }
    double r = pearson(est, truth);
    out.h_abs_corr[static_cast<size_t>(j)] = std::abs(r);
    out.sign[static_cast<size_t>(j)] = r < 0.0 ? -1.0 : 1.0;
  }
  return out;
}

double covariate_bias(const Vector& h_row_matched, double sign,
                      const Vector& covariate, double truth, BiasKind kind) {
  if (covariate.size() != h_row_matched.size()) {
    throw Error("covariate_bias: length mismatch");
  }
  Vector h = sign * h_row_matched;
  if (kind == BiasKind::correlation) {
    return pearson(h, covariate) - truth;
  }
  // Cohen's d over the binary covariate groups.
  std::vector<double> g0, g1;
  for (Index i = 0; i < covariate.size(); ++i) {
    double c = covariate(i);
    if (c == 0.0) {
      g0.push_back(h(i));
    } else if (c == 1.0) {
      g1.push_back(h(i));
    } else {
      throw Error("covariate_bias: covariate is not binary");
    }
  }
  if (g0.size() < 2 || g1.size() < 2) {
    throw Error("covariate_bias: a covariate group has fewer than 2 subjects");
  }
  auto mean_var = [](const std::vector<double>& g) {
    double mean = 0.0;
    for (double v : g) mean += v;
    mean /= static_cast<double>(g.size());
    double ss = 0.0;
    for (double v : g) ss += (v - mean) * (v - mean);
    return std::pair<double, double>(mean, ss / static_cast<double>(g.size() - 1));
  };
  auto [m0, v0] = mean_var(g0);
  auto [m1, v1] = mean_var(g1);
  const double n0 = static_cast<double>(g0.size());
  const double n1 = static_cast<double>(g1.size());
  double pooled =
      std::sqrt(((n1 - 1.0) * v1 + (n0 - 1.0) * v0) / (n1 + n0 - 2.0));
  if (pooled == 0.0) throw Error("covariate_bias: zero pooled standard deviation");
  return (m1 - m0) / pooled - truth;
}

EvalReport aggregate(const std::vector<EvalRow>& rows) {
  EvalReport report;
  report.rows = rows;
  std::sort(report.rows.begin(), report.rows.end(), row_less);
  std::map<GroupKey, std::vector<double>> groups;
  for (const auto& r : report.rows) {
    groups[{r.setting, r.missing_pct, r.method, r.metric, r.component}]
        .push_back(r.value);
  }
  for (auto& [key, values] : groups) {
    if (values.empty()) throw Error("aggregate: empty group");
    GroupStats st;
    st.n = static_cast<int>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(st.n);
    st.mean = mean;
    if (st.n > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      st.sd = std::sqrt(ss / static_cast<double>(st.n - 1));
    }
    std::sort(values.begin(), values.end());
    st.median = quantile_type7(values, 0.5);
    st.q1 = quantile_type7(values, 0.25);
    st.q3 = quantile_type7(values, 0.75);
    report.aggregates.emplace(key, st);
  }
  return report;
}

}  // namespace filica::eval

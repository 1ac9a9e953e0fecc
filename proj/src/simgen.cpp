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

#include "filica/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "filica/kernels.hpp"
#include "filica/rng.hpp"

namespace filica::sim {

namespace {

// Stream ids for the per-replicate substreams. The data streams are shared
// by every missing percentage; only the mask stream folds the percentage in.
constexpr std::uint64_t kMapsStream = 0x11;
constexpr std::uint64_t kLoadingsStream = 0x20;
constexpr std::uint64_t kCovariateStream = 0x21;
constexpr std::uint64_t kNoiseStreamBase = 0x30;
constexpr std::uint64_t kMaskStreamBase = 0x40;

int missing_count(double missing_pct) {
  const double scaled = missing_pct * 100.0;
  const int pct = static_cast<int>(std::lround(scaled));
  if (std::abs(scaled - pct) > 1e-9 ||
      (pct != 0 && pct != 5 && pct != 10 && pct != 20)) {
    throw Error("gen_replicate: missing_pct must be one of 0, 0.05, 0.10, 0.20");
  }
  return pct;  // counts == percent because there are 100 subjects
}

void standardize_rows_all(Matrix& m) {
  std::vector<bool> all(static_cast<size_t>(m.cols()), true);
  Vector mean, scale;
  kernels::standardize_rows(m, all, mean, scale);
}

// Rank subjects by missing probability (descending, index ascending on
// ties) and hand the top 2*m out alternately to the two modalities.
std::vector<std::vector<int>> mar_assign(const Vector& p, int m) {
  std::vector<int> order(static_cast<size_t>(p.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return p(a) > p(b); });
  std::vector<std::vector<int>> assign(2);
  for (int r = 0; r < 2 * m; ++r) {
    assign[static_cast<size_t>(r % 2)].push_back(order[static_cast<size_t>(r)]);
  }
  for (auto& a : assign) std::sort(a.begin(), a.end());
  return assign;
}

std::vector<std::vector<int>> mcar_assign(int m, std::uint64_t seed, int pct) {
  Rng rng(seed, kMaskStreamBase + static_cast<std::uint64_t>(pct));
  std::vector<int> perm = rng.permutation(kSubjects);
  std::vector<std::vector<int>> assign(2);
  assign[0].assign(perm.begin(), perm.begin() + m);
  assign[1].assign(perm.begin() + m, perm.begin() + 2 * m);
  for (auto& a : assign) std::sort(a.begin(), a.end());
  return assign;
}

}  // namespace

const char* setting_name(Setting s) {
  switch (s) {
    case Setting::mcar: return "mcar";
    case Setting::mar_continuous: return "mar_continuous";
    case Setting::mar_mixed: return "mar_mixed";
  }
  throw Error("unknown setting");
}

Setting setting_from_name(const std::string& name) {
  if (name == "mcar") return Setting::mcar;
  if (name == "mar_continuous") return Setting::mar_continuous;
  if (name == "mar_mixed") return Setting::mar_mixed;
  throw Error("unknown setting '" + name + "'");
}

Matrix gen_spatial_maps(int n_voxels, std::uint64_t seed, double noise_scale) {
  if (n_voxels < 200) {
    throw Error("gen_spatial_maps: need at least 200 voxels");
  }
  Rng rng(seed, kMapsStream);
  Matrix x = Matrix::Zero(n_voxels, 2);
  x.block(0, 0, 100, 1).setOnes();
  x.block(100, 1, 100, 1).setOnes();
  for (Index j = 0; j < 2; ++j) {
    for (Index v = 0; v < n_voxels; ++v) {
      x(v, j) += noise_scale * rng.next_normal();
    }
  }
  return x;
}

double logistic_missing_prob(double c1, double c2) {
  return 1.0 / (1.0 + std::exp(0.6 - 0.5 * c1 - 1.2 * c2));
}

Replicate gen_replicate(Setting setting, double missing_pct, std::uint64_t seed) {
  const int m = missing_count(missing_pct);
  const int n = kSubjects;

  SimTruth truth;
  truth.setting = setting;
  truth.missing_pct = missing_pct;
  truth.seed = seed;

  for (int k = 0; k < 2; ++k) {
    truth.xw_true.push_back(
        gen_spatial_maps(kVoxels[k], seed_combine(seed, static_cast<std::uint64_t>(k))));
  }

  Matrix h(2, n);
  if (setting == Setting::mcar) {
    Rng rng(seed, kLoadingsStream);
    for (Index i = 0; i < 2; ++i) {
      for (Index s = 0; s < n; ++s) h(i, s) = rng.next_normal();
    }
  } else if (setting == Setting::mar_continuous) {
    // (C1, C2, H1, H2) jointly normal with unit variances and
    // corr(C1,H1)=0.5, corr(C2,H2)=0.3.
    Matrix cov(4, 4);
    cov << 1.0, 0.0, 0.5, 0.0,
           0.0, 1.0, 0.0, 0.3,
           0.5, 0.0, 1.0, 0.0,
           0.0, 0.3, 0.0, 1.0;
    Matrix chol = Eigen::LLT<Matrix>(cov).matrixL();
    Rng rng(seed, kCovariateStream);
    truth.c1.resize(n);
    truth.c2.resize(n);
    for (Index s = 0; s < n; ++s) {
      Vector z(4);
      for (int i = 0; i < 4; ++i) z(i) = rng.next_normal();
      Vector v = chol * z;
      truth.c1(s) = v(0);
      truth.c2(s) = v(1);
      h(0, s) = v(2);
      h(1, s) = v(3);
    }
    standardize_rows_all(h);
  } else {
    Rng rng(seed, kCovariateStream);
    truth.c1.resize(n);
    truth.c2.resize(n);
    const double rho = 0.5;
    for (Index s = 0; s < n; ++s) {
      double z1 = rng.next_normal();
      double z2 = rng.next_normal();
      truth.c1(s) = z1;
      h(0, s) = rho * z1 + std::sqrt(1.0 - rho * rho) * z2;
    }
    for (Index s = 0; s < n; ++s) {
      truth.c2(s) = rng.next_double() < 0.5 ? 1.0 : 0.0;
    }
    for (Index s = 0; s < n; ++s) {
      h(1, s) = 0.5 * truth.c2(s) + rng.next_normal();
    }
    standardize_rows_all(h);
  }
  truth.h_true = h;

  if (setting == Setting::mcar) {
    truth.missing_assign =
        m > 0 ? mcar_assign(m, seed, missing_count(missing_pct))
              : std::vector<std::vector<int>>(2);
  } else if (m > 0) {
    Vector p(n);
    for (Index s = 0; s < n; ++s) {
      p(s) = logistic_missing_prob(truth.c1(s), truth.c2(s));
    }
    truth.missing_assign = mar_assign(p, m);
  } else {
    truth.missing_assign.assign(2, {});
  }

  Replicate rep;
  for (int k = 0; k < 2; ++k) {
    MaskedModality mod;
    mod.name = "mod" + std::to_string(k + 1);
    Rng rng(seed, kNoiseStreamBase + static_cast<std::uint64_t>(k));
    Matrix noise(kVoxels[k], n);
    for (Index s = 0; s < n; ++s) {
      for (Index v = 0; v < kVoxels[k]; ++v) noise(v, s) = rng.next_normal();
    }
    mod.values = kernels::matmul(truth.xw_true[static_cast<size_t>(k)], h) + noise;
    mod.observed.assign(static_cast<size_t>(n), true);
    for (int s : truth.missing_assign[static_cast<size_t>(k)]) {
      mod.observed[static_cast<size_t>(s)] = false;
      mod.values.col(s).setConstant(std::numeric_limits<double>::quiet_NaN());
    }
    rep.modalities.push_back(std::move(mod));
  }
  rep.truth = std::move(truth);
  return rep;
}

Dataset to_dataset(const Replicate& rep) {
  Dataset d;
  d.manifest.n_subjects = kSubjects;
  for (const auto& m : rep.modalities) {
    d.manifest.modalities.push_back(
        {m.name, static_cast<int>(m.n_voxels()), m.name + ".csv"});
  }
  for (int s = 0; s < kSubjects; ++s) {
    d.manifest.subject_ids.push_back("s" + std::to_string(s));
  }
  d.modalities = rep.modalities;
  return d;
}

}  // namespace filica::sim

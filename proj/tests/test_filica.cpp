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

#include <doctest.h>

#include <cmath>

#include "filica/filica.hpp"
#include "filica/rng.hpp"
#include "filica/simgen.hpp"

using namespace filica;

namespace {

double abs_corr(const Vector& a, const Vector& b) {
  Vector ca = a.array() - a.mean();
  Vector cb = b.array() - b.mean();
  return std::abs(ca.dot(cb) / (ca.norm() * cb.norm()));
}

MaskedModality make_modality(const Matrix& values, std::vector<bool> observed,
                             const std::string& name = "m") {
  MaskedModality m;
  m.name = name;
  m.values = values;
  m.observed = std::move(observed);
  for (Index s = 0; s < m.values.cols(); ++s) {
    if (!m.observed[static_cast<size_t>(s)]) {
      m.values.col(s).setConstant(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return m;
}

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed, 42);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.next_normal();
  }
  return m;
}

// Minimum-norm least squares through the full SVD, kept independent of the
// production path (which goes through the Gram pseudoinverse).
Matrix svd_min_norm_solve(const Matrix& a, const Matrix& b) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  return svd.solve(b);
}

std::vector<MaskedModality> sim_masked(sim::Setting s, double pct,
                                       std::uint64_t seed) {
  return sim::gen_replicate(s, pct, seed).modalities;
}

}  // namespace

TEST_CASE("standardize: fully observed row matches the direct formula") {
  Matrix v(1, 3);
  v << 1, 2, 3;
  MaskedModality m = make_modality(v, {true, true, true});
  MaskedModality s = standardize(m);
  const double rms = std::sqrt(2.0 / 3.0);  // rms of demeaned {-1,0,1}
  CHECK(s.values(0, 0) == doctest::Approx(-1.0 / rms).epsilon(1e-12));
  CHECK(s.values(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.values(0, 2) == doctest::Approx(1.0 / rms).epsilon(1e-12));
}

TEST_CASE("standardize: constant row becomes zero") {
  Matrix v(1, 3);
  v << 5, 5, 5;
  MaskedModality s = standardize(make_modality(v, {true, true, true}));
  CHECK(s.values.row(0).isZero(0.0));
}

TEST_CASE("standardize: statistics use observed cells only") {
  Matrix v(1, 3);
  v << 1, 99, 3;
  MaskedModality s = standardize(make_modality(v, {true, false, true}));
  // mean 2, demeaned {-1, 1}, rms 1
  CHECK(s.values(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::isnan(s.values(0, 1)));
  CHECK(s.values(0, 2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("standardize contract violations") {
  Matrix v(2, 3);
  v << 1, 2, 3, 4, 5, 6;
  CHECK_THROWS_WITH_AS((void)standardize(make_modality(v, {true, false, false})),
                       doctest::Contains("fewer than 2"), Error);
  Matrix bad = v;
  bad(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH_AS((void)standardize(make_modality(bad, {true, true, true})),
                       doctest::Contains("non-finite"), Error);
}

TEST_CASE("crude_h: orthonormal maps reduce to a plain projection") {
  Matrix xw = Matrix::Zero(4, 2);
  xw(0, 0) = 1.0;
  xw(2, 1) = 1.0;
  Matrix y = random_matrix(4, 5, 1);
  std::vector<int> subjects{1, 3};
  Matrix got = crude_h(xw, y, subjects);
  Matrix expect(2, 2);
  expect << y(0, 1), y(0, 3), y(2, 1), y(2, 3);
  CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("crude_h matches an independent least-squares oracle") {
  Matrix xw = random_matrix(50, 2, 2);
  Matrix y = random_matrix(50, 4, 3);
  std::vector<int> subjects{0, 1, 2, 3};
  Matrix got = crude_h(xw, y, subjects);
  Matrix expect = svd_min_norm_solve(xw, y);
  CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("crude_h: rank-deficient maps give the minimum-norm solution") {
  Matrix xw(6, 2);
  xw.col(0) = random_matrix(6, 1, 4);
  xw.col(1) = xw.col(0);  // duplicate column, rank 1
  Matrix y = random_matrix(6, 3, 5);
  Matrix got = crude_h(xw, y, {0, 1, 2});
  CHECK(got.allFinite());
  Matrix expect = svd_min_norm_solve(xw, y);
  CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("crude_h equals the oracle on many random instances") {
  for (int t = 0; t < 50; ++t) {
    const Index rows = 10 + (t % 5) * 7;
    const Index L = 2 + t % 3;
    Matrix xw = random_matrix(rows, L, 100 + static_cast<std::uint64_t>(t));
    if (t % 7 == 0 && L >= 2) xw.col(1) = 2.0 * xw.col(0);  // rank deficiency
    Matrix y = random_matrix(rows, 6, 200 + static_cast<std::uint64_t>(t));
    std::vector<int> subjects{0, 2, 4};
    Matrix got = crude_h(xw, y, subjects);
    Matrix full = svd_min_norm_solve(xw, y);
    Matrix expect(L, 3);
    expect << full.col(0), full.col(2), full.col(4);
    CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("crude_h rejects subjects with no stacked data") {
  Matrix xw = random_matrix(5, 2, 6);
  Matrix y = random_matrix(5, 3, 7);
  y.col(1).setConstant(std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_WITH_AS((void)crude_h(xw, y, {1}),
                       doctest::Contains("no observed data"), Error);
  CHECK_THROWS_AS((void)crude_h(random_matrix(1, 2, 8), random_matrix(1, 3, 9), {0}),
                  Error);  // fewer rows than components
}

TEST_CASE("impute_missing fills missing columns only") {
  Matrix v = random_matrix(3, 4, 10);
  MaskedModality m = make_modality(v, {true, false, true, false});
  Matrix xw = Matrix::Ones(3, 1);

  SUBCASE("zero loadings give zero columns") {
    MaskedModality out = impute_missing(m, xw, Matrix::Zero(1, 2));
    CHECK(out.values.col(1).isZero(0.0));
    CHECK(out.values.col(3).isZero(0.0));
  }
  SUBCASE("rank-1 fill") {
    Matrix h(1, 2);
    h << 3.0, -2.0;
    MaskedModality out = impute_missing(m, xw, h);
    CHECK(out.values.col(1) == Vector::Constant(3, 3.0));
    CHECK(out.values.col(3) == Vector::Constant(3, -2.0));
    // observed columns byte-identical, mask preserved
    CHECK(out.values.col(0) == m.values.col(0));
    CHECK(out.values.col(2) == m.values.col(2));
    CHECK(out.observed == m.observed);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS((void)impute_missing(m, xw, Matrix::Zero(1, 3)), Error);
    CHECK_THROWS_AS((void)impute_missing(m, Matrix::Ones(2, 1), Matrix::Zero(1, 2)),
                    Error);
  }
}

TEST_CASE("rescale_h: scaling identity and idempotence") {
  Decomposition d;
  d.n_components = 2;
  d.h = random_matrix(2, 30, 11);
  d.h.row(0) *= 2.0;  // sd 2-ish
  d.xw.push_back(random_matrix(8, 2, 12));
  d.weights.push_back(Vector::Ones(2));
  d.noise_var.push_back(0.1);

  Decomposition r = rescale_h(d);
  for (Index i = 0; i < 2; ++i) {
    double mean = r.h.row(i).mean();
    double sd = std::sqrt((r.h.row(i).array() - mean).square().mean());
    CHECK(std::abs(sd - 1.0) < 1e-8);
  }
  CHECK(std::sqrt((reconstruct(r, 0) - reconstruct(d, 0)).squaredNorm()) < 1e-10);

  Decomposition r2 = rescale_h(r);
  CHECK((r2.h - r.h).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((r2.xw[0] - r.xw[0]).cwiseAbs().maxCoeff() < 1e-12);

  d.h.row(1).setConstant(4.0);
  CHECK_THROWS_WITH_AS((void)rescale_h(d), doctest::Contains("zero variance"),
                       Error);
}

TEST_CASE("fit_complete_case: no missing degenerates to the full fit") {
  auto mods = sim_masked(sim::Setting::mcar, 0.0, 314);
  FiLicaConfig cfg;
  cfg.n_components = 4;
  cfg.lica_iters = 400;
  cfg.seed = 9;
  FusionResult full = fit_complete_case(mods, cfg);
  CHECK(full.subjects.size() == 100);

  std::vector<Matrix> values;
  for (const auto& m : mods) values.push_back(standardize(m).values);
  Decomposition direct = rescale_h(decompose(values, 4, 400, std::nullopt, 9));
  CHECK(full.decomposition.h == direct.h);
}

TEST_CASE("fit_complete_case: disjoint 20% missing keeps 60 completers") {
  auto mods = sim_masked(sim::Setting::mcar, 0.2, 1001);
  FiLicaConfig cfg;
  cfg.n_components = 5;
  cfg.lica_iters = 400;
  cfg.seed = 1;
  FusionResult r = fit_complete_case(mods, cfg);
  CHECK(r.decomposition.h.cols() == 60);
  CHECK(r.subjects.size() == 60);
  // subject order preserved
  for (size_t i = 1; i < r.subjects.size(); ++i) {
    CHECK(r.subjects[i - 1] < r.subjects[i]);
  }
}

TEST_CASE("fit_complete_case: fewer completers than components throws") {
  Matrix v1 = random_matrix(30, 8, 13);
  Matrix v2 = random_matrix(40, 8, 14);
  auto m1 = make_modality(v1, {true, true, true, false, false, true, true, true});
  auto m2 = make_modality(v2, {false, true, true, true, true, true, false, false});
  FiLicaConfig cfg;
  cfg.n_components = 5;  // only 3 completers
  CHECK_THROWS_WITH_AS((void)fit_complete_case({m1, m2}, cfg),
                       doctest::Contains("complete cases"), Error);
}

TEST_CASE("fit_filica: no missing equals the complete-case fit") {
  auto mods = sim_masked(sim::Setting::mcar, 0.0, 2718);
  FiLicaConfig cfg;
  cfg.n_components = 5;
  cfg.lica_iters = 600;
  cfg.seed = 3;
  FusionResult cc = fit_complete_case(mods, cfg);
  FusionResult fi = fit_filica(mods, cfg);
  REQUIRE(fi.decomposition.h.cols() == cc.decomposition.h.cols());
  // per matched row: |corr| >= 0.999
  for (Index i = 0; i < cc.decomposition.h.rows(); ++i) {
    double best = 0.0;
    for (Index l = 0; l < fi.decomposition.h.rows(); ++l) {
      best = std::max(best, abs_corr(fi.decomposition.h.row(l).transpose(),
                                     cc.decomposition.h.row(i).transpose()));
    }
    CHECK(best >= 0.999);
  }
  CHECK(fi.fi_converged);
  CHECK(fi.fi_deltas.back().dh < cfg.tol_rel);
}

TEST_CASE("fit_filica: imputation never touches observed columns") {
  auto mods = sim_masked(sim::Setting::mcar, 0.2, 555);
  FiLicaConfig cfg;
  cfg.n_components = 5;
  cfg.lica_iters = 400;
  cfg.fi_updates = 5;
  cfg.seed = 4;
  FusionResult r = fit_filica(mods, cfg);
  REQUIRE(r.imputed.size() == mods.size());
  for (size_t k = 0; k < mods.size(); ++k) {
    MaskedModality st = standardize(mods[k]);
    for (Index s = 0; s < st.values.cols(); ++s) {
      if (st.observed[static_cast<size_t>(s)]) {
        CHECK(r.imputed[k].values.col(s) == st.values.col(s));
      } else {
        CHECK(r.imputed[k].values.col(s).allFinite());
      }
    }
    CHECK(r.imputed[k].observed == mods[k].observed);
  }
  CHECK(!r.fi_deltas.empty());
  CHECK(r.decomposition.h.cols() == 100);
}

TEST_CASE("fit_filica is deterministic") {
  auto mods = sim_masked(sim::Setting::mcar, 0.1, 808);
  FiLicaConfig cfg;
  cfg.n_components = 4;
  cfg.lica_iters = 300;
  cfg.fi_updates = 4;
  cfg.seed = 12;
  FusionResult a = fit_filica(mods, cfg);
  FusionResult b = fit_filica(mods, cfg);
  CHECK(a.decomposition.h == b.decomposition.h);
  REQUIRE(a.fi_deltas.size() == b.fi_deltas.size());
  for (size_t i = 0; i < a.fi_deltas.size(); ++i) {
    CHECK(a.fi_deltas[i].dxw == b.fi_deltas[i].dxw);
    CHECK(a.fi_deltas[i].dh == b.fi_deltas[i].dh);
  }
}

TEST_CASE("fit_filica handles three modalities with overlapped missingness") {
  // K=3: one subject missing in two modalities at once.
  const Index n = 40;
  Matrix h_true = random_matrix(3, n, 21);
  std::vector<MaskedModality> mods;
  for (int k = 0; k < 3; ++k) {
    Matrix maps = Matrix::Zero(120, 3);
    for (int l = 0; l < 3; ++l) {
      maps.block(40 * l, l, 40, 1).setConstant(1.0);
    }
    maps += 0.2 * random_matrix(120, 3, 22 + static_cast<std::uint64_t>(k));
    Matrix y = maps * h_true + 0.3 * random_matrix(120, n, 25 + static_cast<std::uint64_t>(k));
    std::vector<bool> obs(static_cast<size_t>(n), true);
    if (k == 0) obs[0] = obs[1] = false;
    if (k == 1) obs[0] = false;  // subject 0 observed only in modality 2
    if (k == 2) obs[3] = false;
    mods.push_back(make_modality(y, obs, "m" + std::to_string(k)));
  }
  FiLicaConfig cfg;
  cfg.n_components = 3;
  cfg.lica_iters = 300;
  cfg.fi_updates = 8;
  cfg.seed = 5;
  FusionResult r = fit_filica(mods, cfg);
  CHECK(r.decomposition.h.cols() == n);
  CHECK(r.decomposition.h.allFinite());
}

TEST_CASE("fit_filica rejects a subject that is missing everywhere") {
  auto mods = sim_masked(sim::Setting::mcar, 0.1, 33);
  for (auto& m : mods) {
    m.observed[7] = false;
    m.values.col(7).setConstant(std::numeric_limits<double>::quiet_NaN());
  }
  FiLicaConfig cfg;
  CHECK_THROWS_WITH_AS((void)fit_filica(mods, cfg),
                       doctest::Contains("missing in every modality"), Error);
}

TEST_CASE("reduced_budget: 25% off, rounded up, always decreasing") {
  CHECK(reduced_budget(1500) == 1125);
  CHECK(reduced_budget(1125) == 844);   // 843.75 rounds up
  CHECK(reduced_budget(10) == 8);       // 7.5 rounds up
  CHECK(reduced_budget(4) == 3);
  CHECK(reduced_budget(3) == 2);
  CHECK(reduced_budget(2) == 1);
  CHECK(reduced_budget(1) == 0);
}

TEST_CASE("fit_replace0: no missing equals the oracle fit") {
  auto mods = sim_masked(sim::Setting::mcar, 0.0, 616);
  FiLicaConfig cfg;
  cfg.n_components = 4;
  cfg.lica_iters = 400;
  cfg.seed = 8;
  FusionResult z = fit_replace0(mods, cfg);
  FusionResult o = fit_oracle(mods, cfg);
  CHECK(z.decomposition.h == o.decomposition.h);
  CHECK(z.effective_iters == cfg.lica_iters);
}

TEST_CASE("fit_replace0 exhausts its budget on unfittable data") {
  // Rank 2 data but 5 requested components: every retry fails, the budget
  // schedule runs to zero, and the failure is reported.
  const Index n = 30;
  Matrix h = random_matrix(2, n, 61);
  Matrix maps1 = random_matrix(50, 2, 62);
  Matrix maps2 = random_matrix(80, 2, 63);
  auto m1 = make_modality(maps1 * h, std::vector<bool>(n, true));
  auto m2 = make_modality(maps2 * h, std::vector<bool>(n, true));
  FiLicaConfig cfg;
  cfg.n_components = 5;
  cfg.lica_iters = 100;
  CHECK_THROWS_WITH_AS((void)fit_replace0({m1, m2}, cfg),
                       doctest::Contains("budget exhausted"), Error);
}

TEST_CASE("fit_oracle recovers the noiseless fixture up to sign") {
  const Index n = 80;
  Rng rng(99, 7);
  Matrix h(2, n);
  for (Index i = 0; i < 2; ++i) {
    for (Index s = 0; s < n; ++s) {
      h(i, s) = std::sqrt(12.0) * (rng.next_double() - 0.5);
    }
  }
  Matrix maps = Matrix::Zero(300, 2);
  maps.block(0, 0, 30, 1).setOnes();
  maps.block(30, 1, 30, 1).setOnes();
  // mild in-block variation plus a second modality
  Matrix maps2 = Matrix::Zero(500, 2);
  maps2.block(0, 0, 50, 1).setConstant(0.9);
  maps2.block(50, 1, 50, 1).setConstant(1.2);
  auto m1 = make_modality(maps * h, std::vector<bool>(n, true));
  auto m2 = make_modality(maps2 * h, std::vector<bool>(n, true));
  FiLicaConfig cfg;
  cfg.n_components = 2;
  cfg.lica_iters = 500;
  cfg.seed = 2;
  FusionResult r = fit_oracle({m1, m2}, cfg);
  for (int j = 0; j < 2; ++j) {
    double best = 0.0;
    for (int l = 0; l < 2; ++l) {
      best = std::max(best, abs_corr(r.decomposition.h.row(l).transpose(),
                                     h.row(j).transpose()));
    }
    CHECK(best > 0.999);
  }
}

TEST_CASE("fit_oracle rejects missing data") {
  auto mods = sim_masked(sim::Setting::mcar, 0.05, 404);
  FiLicaConfig cfg;
  CHECK_THROWS_WITH_AS((void)fit_oracle(mods, cfg),
                       doctest::Contains("missing"), Error);
}

TEST_CASE("config validation") {
  FiLicaConfig cfg;
  cfg.tol_rel = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.tol_rel = 1e-3;
  cfg.fi_updates = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

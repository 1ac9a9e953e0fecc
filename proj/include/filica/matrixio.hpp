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

#ifndef FILICA_MATRIXIO_HPP
#define FILICA_MATRIXIO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "filica/dataset.hpp"
#include "filica/report.hpp"

namespace filica::io {

// Shortest decimal string that parses back to the same double. Used for all
// result files so that reruns are byte-identical and reloads are exact.
std::string format_double(double v);

// Fixed 17-significant-digit encoding used for dataset matrices.
std::string format_double_17(double v);

// Dataset files: a JSON manifest plus one CSV per modality (rows = voxels,
// columns = subjects, no header, the literal token NA for missing cells).
// Loading derives the per-subject masks from the NA pattern and enforces
// that every column is fully observed or fully missing and that every
// subject is observed somewhere.
Dataset load_dataset(const std::filesystem::path& manifest_path);

// Writes manifest.json plus the modality CSVs under dir. Subject ids default
// to s0..s{n-1} when empty.
void save_dataset(const std::filesystem::path& dir, const Dataset& dataset);

// Matrix CSV primitives shared by datasets and the fuse outputs.
Matrix load_matrix_csv(const std::filesystem::path& path);
void save_matrix_csv(const std::filesystem::path& path, const Matrix& m);

// Result records: one JSON file per (setting, pct, method, replicate) cell
// under out_dir/<setting>/pct_<int>/<method>/replicate_<i>.json, plus a
// summary.csv over all rows in canonical order.
std::filesystem::path record_path(const std::filesystem::path& out_dir,
                                  const std::string& setting, double missing_pct,
                                  const std::string& method, int replicate);
void write_record(const std::filesystem::path& out_dir,
                  const std::vector<EvalRow>& cell_rows);
void save_results(const std::filesystem::path& out_dir, const EvalReport& report);
EvalReport load_results(const std::filesystem::path& out_dir);
void write_summary_csv(const std::filesystem::path& path,
                       std::vector<EvalRow> rows);

}  // namespace filica::io

#endif  // FILICA_MATRIXIO_HPP

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

#include "filica/matrixio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include <json.hpp>

namespace filica::io {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_double_17(double v) {
  char buf[40];
  int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf, static_cast<size_t>(n));
}

bool row_less_impl(const EvalRow& a, const EvalRow& b) {
  return std::tie(a.setting, a.missing_pct, a.method, a.replicate, a.metric,
                  a.component) < std::tie(b.setting, b.missing_pct, b.method,
                                          b.replicate, b.metric, b.component);
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

double parse_cell(std::string_view tok, Index row, Index col,
                  const fs::path& path) {
  if (tok == "NA") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() ||
      !std::isfinite(v)) {
    throw Error("unparseable cell '" + std::string(tok) + "' at row " +
                std::to_string(row) + ", column " + std::to_string(col) +
                " in " + path.string());
  }
  return v;
}

}  // namespace

Matrix load_matrix_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  Index ncols = -1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == EOF) break;
    std::vector<double> row;
    size_t start = 0;
    Index col = 0;
    while (true) {
      size_t comma = line.find(',', start);
      std::string_view tok(line.data() + start,
                           (comma == std::string::npos ? line.size() : comma) - start);
      row.push_back(parse_cell(tok, static_cast<Index>(rows.size()), col, path));
      ++col;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (ncols < 0) {
      ncols = static_cast<Index>(row.size());
    } else if (static_cast<Index>(row.size()) != ncols) {
      throw Error("ragged row " + std::to_string(rows.size()) + " in " +
                  path.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error("empty matrix file " + path.string());
  Matrix m(static_cast<Index>(rows.size()), ncols);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
  }
  return m;
}

void save_matrix_csv(const fs::path& path, const Matrix& m) {
  std::string out;
  out.reserve(static_cast<size_t>(m.size()) * 20);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      double v = m(i, j);
      out += std::isnan(v) ? "NA" : format_double_17(v);
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

namespace {

DatasetManifest parse_manifest(const ordered_json& j, const fs::path& path) {
  DatasetManifest man;
  try {
    man.n_subjects = j.at("n_subjects").get<int>();
    for (const auto& jm : j.at("modalities")) {
      ModalityInfo info;
      info.name = jm.at("name").get<std::string>();
      info.n_voxels = jm.at("n_voxels").get<int>();
      info.data_path = jm.at("data_path").get<std::string>();
      man.modalities.push_back(std::move(info));
    }
    man.subject_ids = j.at("subject_ids").get<std::vector<std::string>>();
  } catch (const ordered_json::exception& e) {
    throw Error("bad manifest " + path.string() + ": " + e.what());
  }
  if (man.n_subjects <= 0) throw Error("manifest: n_subjects must be positive");
  if (man.modalities.empty()) throw Error("manifest: no modalities");
  std::set<std::string> names;
  for (const auto& m : man.modalities) {
    if (m.n_voxels < 1) throw Error("manifest: n_voxels must be >= 1");
    if (!names.insert(m.name).second) {
      throw Error("manifest: duplicate modality name '" + m.name + "'");
    }
  }
  if (static_cast<int>(man.subject_ids.size()) != man.n_subjects) {
    throw Error("manifest: subject_ids length != n_subjects");
  }
  return man;
}

}  // namespace

Dataset load_dataset(const fs::path& manifest_path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(manifest_path));
  } catch (const ordered_json::exception& e) {
    throw Error("cannot parse manifest " + manifest_path.string() + ": " +
                e.what());
  }
  Dataset d;
  d.manifest = parse_manifest(j, manifest_path);
  const fs::path base = manifest_path.parent_path();

  std::vector<bool> seen(static_cast<size_t>(d.manifest.n_subjects), false);
  for (const auto& info : d.manifest.modalities) {
    MaskedModality mm;
    mm.name = info.name;
    mm.values = load_matrix_csv(base / info.data_path);
    if (mm.values.rows() != info.n_voxels) {
      throw Error("modality '" + info.name + "': expected " +
                  std::to_string(info.n_voxels) + " voxel rows, file has " +
                  std::to_string(mm.values.rows()));
    }
    if (mm.values.cols() != d.manifest.n_subjects) {
      throw Error("modality '" + info.name + "': expected " +
                  std::to_string(d.manifest.n_subjects) +
                  " subject columns, file has " + std::to_string(mm.values.cols()));
    }
    mm.observed.resize(static_cast<size_t>(mm.values.cols()));
    for (Index s = 0; s < mm.values.cols(); ++s) {
      Index nan_count = 0;
      for (Index v = 0; v < mm.values.rows(); ++v) {
        if (std::isnan(mm.values(v, s))) ++nan_count;
      }
      if (nan_count != 0 && nan_count != mm.values.rows()) {
        throw Error("modality '" + info.name + "': subject column " +
                    std::to_string(s) + " is partially missing");
      }
      mm.observed[static_cast<size_t>(s)] = nan_count == 0;
      if (nan_count == 0) seen[static_cast<size_t>(s)] = true;
    }
    d.modalities.push_back(std::move(mm));
  }
  for (size_t s = 0; s < seen.size(); ++s) {
    if (!seen[s]) {
      throw Error("subject " + std::to_string(s) + " ('" +
                  d.manifest.subject_ids[s] + "') is missing in every modality");
    }
  }
  return d;
}

void save_dataset(const fs::path& dir, const Dataset& dataset) {
  DatasetManifest man = dataset.manifest;
  if (man.subject_ids.empty()) {
    for (int s = 0; s < man.n_subjects; ++s) {
      man.subject_ids.push_back("s" + std::to_string(s));
    }
  }
  ordered_json j;
  j["n_subjects"] = man.n_subjects;
  j["subject_ids"] = man.subject_ids;
  j["modalities"] = ordered_json::array();
  for (size_t k = 0; k < dataset.modalities.size(); ++k) {
    const auto& mm = dataset.modalities[k];
    std::string file = mm.name + ".csv";
    j["modalities"].push_back(
        {{"name", mm.name}, {"n_voxels", mm.values.rows()}, {"data_path", file}});
    save_matrix_csv(dir / file, mm.values);
  }
  write_file_atomic(dir / "manifest.json", j.dump(2) + "\n");
}

fs::path record_path(const fs::path& out_dir, const std::string& setting,
                     double missing_pct, const std::string& method,
                     int replicate) {
  int pct = static_cast<int>(std::lround(missing_pct * 100.0));
  return out_dir / setting / ("pct_" + std::to_string(pct)) / method /
         ("replicate_" + std::to_string(replicate) + ".json");
}

void write_record(const fs::path& out_dir, const std::vector<EvalRow>& cell_rows) {
  if (cell_rows.empty()) throw Error("write_record: no rows");
  const EvalRow& head = cell_rows.front();
  ordered_json j;
  j["setting"] = head.setting;
  j["missing_pct"] = head.missing_pct;
  j["method"] = head.method;
  j["replicate"] = head.replicate;
  j["status"] = "ok";
  j["rows"] = ordered_json::array();
  for (const auto& r : cell_rows) {
    if (r.setting != head.setting || r.missing_pct != head.missing_pct ||
        r.method != head.method || r.replicate != head.replicate) {
      throw Error("write_record: rows span multiple cells");
    }
    j["rows"].push_back(
        {{"metric", r.metric}, {"component", r.component}, {"value", r.value}});
  }
  write_file_atomic(
      record_path(out_dir, head.setting, head.missing_pct, head.method,
                  head.replicate),
      j.dump(2) + "\n");
}

void write_summary_csv(const fs::path& path, std::vector<EvalRow> rows) {
  std::sort(rows.begin(), rows.end(), row_less_impl);
  std::string out = "setting,missing_pct,method,replicate,metric,component,value\n";
  for (const auto& r : rows) {
    out += r.setting;
    out += ',';
    out += format_double(r.missing_pct);
    out += ',';
    out += r.method;
    out += ',';
    out += std::to_string(r.replicate);
    out += ',';
    out += r.metric;
    out += ',';
    out += std::to_string(r.component);
    out += ',';
    out += format_double(r.value);
    out += '\n';
  }
  write_file_atomic(path, out);
}

void save_results(const fs::path& out_dir, const EvalReport& report) {
  std::vector<EvalRow> rows = report.rows;
  std::sort(rows.begin(), rows.end(), row_less_impl);
  // Group consecutive rows per cell.
  size_t i = 0;
  while (i < rows.size()) {
    size_t jx = i;
    std::vector<EvalRow> cell;
    while (jx < rows.size() && rows[jx].setting == rows[i].setting &&
           rows[jx].missing_pct == rows[i].missing_pct &&
           rows[jx].method == rows[i].method &&
           rows[jx].replicate == rows[i].replicate) {
      cell.push_back(rows[jx]);
      ++jx;
    }
    write_record(out_dir, cell);
    i = jx;
  }
  write_summary_csv(out_dir / "summary.csv", rows);
}

EvalReport load_results(const fs::path& out_dir) {
  EvalReport report;
  if (!fs::exists(out_dir)) throw Error("no such directory: " + out_dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(out_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.rfind("replicate_", 0) == 0 && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    ordered_json j;
    try {
      j = ordered_json::parse(read_file(f));
    } catch (const ordered_json::exception& e) {
      throw Error("cannot parse record " + f.string() + ": " + e.what());
    }
    if (j.value("status", "ok") != "ok") continue;
    for (const auto& jr : j.at("rows")) {
      EvalRow r;
      r.setting = j.at("setting").get<std::string>();
      r.missing_pct = j.at("missing_pct").get<double>();
      r.method = j.at("method").get<std::string>();
      r.replicate = j.at("replicate").get<int>();
      r.metric = jr.at("metric").get<std::string>();
      r.component = jr.at("component").get<int>();
      r.value = jr.at("value").get<double>();
      report.rows.push_back(std::move(r));
    }
  }
  std::sort(report.rows.begin(), report.rows.end(), row_less_impl);
  return report;
}

}  // namespace filica::io

namespace filica {
bool row_less(const EvalRow& a, const EvalRow& b) {
  return io::row_less_impl(a, b);
}
}  // namespace filica

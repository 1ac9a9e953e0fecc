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

#ifndef FILICA_REPORT_HPP
#define FILICA_REPORT_HPP

#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace filica {

// One metric value for one (setting, pct, method, replicate) cell.
struct EvalRow {
  std::string setting;
  double missing_pct = 0.0;
  std::string method;
  int replicate = 0;
  std::string metric;
  int component = 0;
  double value = 0.0;

  friend bool operator==(const EvalRow&, const EvalRow&) = default;
};

// Canonical row order used everywhere results are serialized.
bool row_less(const EvalRow& a, const EvalRow& b);

struct GroupStats {
  int n = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample sd; 0 for singletons
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

// Group key: (setting, missing_pct, method, metric, component).
using GroupKey = std::tuple<std::string, double, std::string, std::string, int>;

struct EvalReport {
  std::vector<EvalRow> rows;
  std::map<GroupKey, GroupStats> aggregates;
};

}  // namespace filica

#endif  // FILICA_REPORT_HPP

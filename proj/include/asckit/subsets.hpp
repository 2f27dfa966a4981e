// Copyright 2026 the asckit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "asckit/manifest.hpp"

namespace asckit {

// Nested, stratified training subsets. Within each scene x device x city
// stratum every clip gets a seeded random priority; the f-subset takes the
// round(f x stratum size) best priorities, so smaller subsets are contained
// in larger ones by construction.
struct SubsetFamily {
  std::vector<double> fractions;  // ascending
  std::map<double, std::vector<std::string>> members;  // fraction -> filenames, manifest order
  uint64_t seed = 0;
};

inline const std::vector<double>& default_fractions() {
  static const std::vector<double> f = {0.05, 0.10, 0.25, 0.50, 1.00};
  return f;
}

SubsetFamily make_nested_subsets(const Manifest& m, std::vector<double> fractions, uint64_t seed);

struct StratRow {
  double fraction = 0.0;
  std::string field;  // scene | device | city
  std::string value;
  double share_subset = 0.0;
  double share_full = 0.0;
  double deviation_pp = 0.0;  // |share_subset - share_full| in percentage points
};

std::vector<StratRow> stratification_report(const SubsetFamily& family, const Manifest& m);

// One CSV per fraction, header "filename", named split5.csv ... split100.csv.
std::vector<std::string> write_subset_files(const SubsetFamily& family, const std::string& dir);

// Reads one subset file and validates every filename against m.
std::vector<std::string> read_subset_file(const std::string& path, const Manifest& m);

}  // namespace asckit

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "asckit/subsets.hpp"
#include "asckit/synth.hpp"

namespace fs = std::filesystem;
using namespace asckit;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("asckit-subsets-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Manifest single_stratum(int n) {
  Manifest m;
  for (int i = 0; i < n; ++i) {
    ClipRecord r;
    r.filename = "clip" + std::to_string(i) + ".wav";
    r.scene = "park";
    r.city = "city1";
    r.device = "a";
    m.records.push_back(r);
  }
  return m;
}

// A multi-stratum manifest via the synthetic corpus grid (no audio written).
Manifest grid_manifest(int clips, int cities) {
  SyntheticCorpusSpec spec;
  spec.clips_per_scene_device = clips;
  spec.cities = cities;
  return synth_manifest(spec);
}

std::set<std::string> as_set(const std::vector<std::string>& v) {
  return std::set<std::string>(v.begin(), v.end());
}

std::string stratum_of(const ClipRecord& r) {
  return r.scene + "|" + r.device + "|" + r.city;
}

}  // namespace

TEST_CASE("a 100-clip stratum at five percent keeps exactly five clips") {
  const Manifest m = single_stratum(100);
  const SubsetFamily family = make_nested_subsets(m, {0.05}, 3);
  REQUIRE(family.members.count(0.05) == 1);
  CHECK(family.members.at(0.05).size() == 5);
}

TEST_CASE("per-stratum counts are round(f x stratum size), half away from zero") {
  // round(0.05 * 10) = round(0.5) = 1, not 0.
  CHECK(make_nested_subsets(single_stratum(10), {0.05}, 1).members.at(0.05).size() == 1);
  // round(0.25 * 2) = round(0.5) = 1.
  CHECK(make_nested_subsets(single_stratum(2), {0.25}, 1).members.at(0.25).size() == 1);
  // round(0.05 * 1) = 0: tiny strata may vanish from small subsets.
  CHECK(make_nested_subsets(single_stratum(1), {0.05}, 1).members.at(0.05).size() == 0);
  // f = 1 always keeps everything.
  CHECK(make_nested_subsets(single_stratum(7), {1.0}, 1).members.at(1.0).size() == 7);
}

TEST_CASE("subsets nest and respect per-stratum quotas on a mixed grid") {
  const Manifest m = grid_manifest(12, 3);  // 10 scenes x 9 devices x 12 clips
  REQUIRE(m.size() == 10 * 9 * 12);
  const auto fractions = default_fractions();
  const SubsetFamily family = make_nested_subsets(m, fractions, 17);

  // Nesting: every smaller subset is contained in every larger one.
  for (size_t i = 0; i + 1 < fractions.size(); ++i) {
    const auto small = as_set(family.members.at(fractions[i]));
    const auto large = as_set(family.members.at(fractions[i + 1]));
    CHECK(small.size() <= large.size());
    for (const auto& f : small) CHECK(large.count(f) == 1);
  }

  // Quotas: strata are scene x device x city, all of size 4 here.
  std::map<std::string, const ClipRecord*> by_file;
  std::map<std::string, int> stratum_size;
  for (const auto& r : m.records) {
    by_file[r.filename] = &r;
    stratum_size[stratum_of(r)] += 1;
  }
  for (const auto& [key, size] : stratum_size) CHECK(size == 4);
  for (double f : fractions) {
    std::map<std::string, int> got;
    for (const auto& file : family.members.at(f)) got[stratum_of(*by_file.at(file))] += 1;
    for (const auto& [key, size] : stratum_size) {
      const long want = std::lround(f * double(size));
      CHECK(long(got[key]) == want);
    }
  }

  // Full fraction is the whole manifest, in manifest order.
  const auto& full = family.members.at(1.0);
  REQUIRE(full.size() == m.size());
  for (size_t i = 0; i < full.size(); ++i) CHECK(full[i] == m.records[i].filename);
}

TEST_CASE("members keep manifest order and the sampling is seeded") {
  const Manifest m = grid_manifest(8, 2);
  const SubsetFamily a = make_nested_subsets(m, {0.5}, 4);
  const SubsetFamily b = make_nested_subsets(m, {0.5}, 4);
  CHECK(a.members.at(0.5) == b.members.at(0.5));

  const SubsetFamily c = make_nested_subsets(m, {0.5}, 5);
  CHECK(c.members.at(0.5) != a.members.at(0.5));

  std::map<std::string, size_t> pos;
  for (size_t i = 0; i < m.records.size(); ++i) pos[m.records[i].filename] = i;
  const auto& half = a.members.at(0.5);
  for (size_t i = 0; i + 1 < half.size(); ++i) CHECK(pos.at(half[i]) < pos.at(half[i + 1]));
}

TEST_CASE("stratification report deviations vanish at full fraction") {
  const Manifest m = grid_manifest(6, 3);
  const SubsetFamily family = make_nested_subsets(m, {0.25, 1.0}, 2);
  int full_rows = 0;
  for (const auto& row : stratification_report(family, m)) {
    CHECK(row.deviation_pp >= 0.0);
    if (row.fraction == 1.0) {
      CHECK(row.deviation_pp == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(row.share_subset == doctest::Approx(row.share_full).epsilon(1e-12));
      ++full_rows;
    }
  }
  CHECK(full_rows > 0);
}

TEST_CASE("subset files round trip and validate against the manifest") {
  const auto dir = fresh_dir("roundtrip");
  const Manifest m = grid_manifest(8, 2);
  const SubsetFamily family = make_nested_subsets(m, default_fractions(), 11);
  const auto files = write_subset_files(family, dir.string());
  REQUIRE(files.size() == 5);
  CHECK(fs::path(files[0]).filename() == "split5.csv");
  CHECK(fs::path(files[4]).filename() == "split100.csv");
  for (const auto& f : files) CHECK(fs::exists(f));

  const auto back = read_subset_file(files[1], m);
  CHECK(back == family.members.at(0.10));

  // A file naming a clip outside the manifest is rejected.
  const fs::path bad = dir / "bad.csv";
  std::ofstream(bad) << "filename\nnot-in-manifest.wav\n";
  CHECK_THROWS_AS(read_subset_file(bad.string(), m), std::exception);
}

TEST_CASE("empty fraction list writes no files") {
  const auto dir = fresh_dir("none");
  const Manifest m = single_stratum(10);
  const SubsetFamily family = make_nested_subsets(m, {}, 1);
  CHECK(family.members.empty());
  CHECK(write_subset_files(family, dir.string()).empty());
  CHECK(fs::is_empty(dir));
}

TEST_CASE("bad fractions are rejected, duplicates collapse") {
  const Manifest m = single_stratum(10);
  CHECK_THROWS_AS(make_nested_subsets(m, {0.0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_nested_subsets(m, {1.5}, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_nested_subsets(Manifest{}, {0.5}, 1), std::invalid_argument);
  const SubsetFamily family = make_nested_subsets(m, {0.5, 0.5}, 1);
  CHECK(family.fractions == std::vector<double>{0.5});
}

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

#include "asckit/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "asckit/rng.hpp"

namespace asckit {
namespace {

const char* kHeader = "filename\tscene_label\tcity\tdevice";

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

const std::array<std::string, kNumScenes>& scene_labels() {
  static const std::array<std::string, kNumScenes> labels = {
      "airport",       "bus",           "metro",          "metro_station",
      "park",          "public_square", "shopping_mall",  "street_pedestrian",
      "street_traffic", "tram"};
  return labels;
}

int scene_index(const std::string& name) {
  const auto& labels = scene_labels();
  for (int i = 0; i < kNumScenes; ++i)
    if (labels[size_t(i)] == name) return i;
  return -1;
}

std::string normalize_device(const std::string& id) {
  std::string out = id;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return out;
}

bool is_valid_device(const std::string& id) {
  if (id == "a" || id == "b" || id == "c" || id == "d") return true;
  if (id.size() >= 2 && id[0] == 's') {
    int n = 0;
    for (size_t i = 1; i < id.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(id[i]))) return false;
      n = n * 10 + (id[i] - '0');
    }
    return n >= 1 && n <= 10 && !(id.size() > 2 && id[1] == '0');
  }
  return false;
}

DeviceKind device_kind(const std::string& id) {
  if (!is_valid_device(id)) throw std::invalid_argument("unknown device id: " + id);
  return id[0] == 's' ? DeviceKind::simulated : DeviceKind::real;
}

const std::set<std::string>& dev_train_devices() {
  static const std::set<std::string> s = {"a", "b", "c", "s1", "s2", "s3"};
  return s;
}

const std::set<std::string>& dev_test_devices() {
  static const std::set<std::string> s = {"a", "b", "c", "s1", "s2", "s3", "s4", "s5", "s6"};
  return s;
}

std::string split_tag_name(SplitTag tag) {
  switch (tag) {
    case SplitTag::dev_train: return "development-train";
    case SplitTag::dev_test: return "development-test";
    case SplitTag::evaluation: return "evaluation";
  }
  throw std::logic_error("bad split tag");
}

SplitTag parse_split_tag(const std::string& name) {
  if (name == "development-train") return SplitTag::dev_train;
  if (name == "development-test") return SplitTag::dev_test;
  if (name == "evaluation") return SplitTag::evaluation;
  throw std::invalid_argument("unknown split tag: " + name);
}

Manifest parse_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open manifest: " + path);

  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty manifest file: " + path);
  if (strip_cr(line) != kHeader)
    throw std::runtime_error("bad manifest header in " + path + " (line 1)");

  Manifest m;
  std::unordered_set<std::string> seen;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto where = path + " (line " + std::to_string(lineno) + ")";
    auto fields = split_tabs(line);
    if (fields.size() != 4) throw std::runtime_error("malformed row in " + where);
    ClipRecord rec;
    rec.filename = fields[0];
    rec.scene = fields[1];
    rec.city = fields[2];
    rec.device = normalize_device(fields[3]);
    if (rec.filename.empty()) throw std::runtime_error("empty filename in " + where);
    if (scene_index(rec.scene) < 0)
      throw std::runtime_error("unknown scene label '" + rec.scene + "' in " + where);
    if (rec.city.empty()) throw std::runtime_error("empty city in " + where);
    if (!is_valid_device(rec.device))
      throw std::runtime_error("unknown device id '" + fields[3] + "' in " + where);
    if (!seen.insert(rec.filename).second)
      throw std::runtime_error("duplicate filename '" + rec.filename + "' in " + where);
    m.records.push_back(std::move(rec));
  }
  return m;
}

void write_manifest(const std::string& path, const Manifest& m) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write manifest: " + path);
  f << kHeader << "\n";
  for (const auto& r : m.records)
    f << r.filename << '\t' << r.scene << '\t' << r.city << '\t' << r.device << "\n";
  if (!f) throw std::runtime_error("short write: " + path);
}

std::vector<Violation> validate_manifest(const Manifest& m, SplitTag expected_split) {
  std::vector<Violation> out;
  std::unordered_set<std::string> seen;
  for (size_t i = 0; i < m.records.size(); ++i) {
    const auto& r = m.records[i];
    const int row = int(i) + 1;
    if (r.filename.empty()) out.push_back({row, "missing filename"});
    if (scene_index(r.scene) < 0) out.push_back({row, "unknown scene label '" + r.scene + "'"});
    if (r.city.empty()) out.push_back({row, "missing city"});
    if (!is_valid_device(r.device)) {
      out.push_back({row, "unknown device id '" + r.device + "'"});
      continue;
    }
    if (!r.filename.empty() && !seen.insert(r.filename).second)
      out.push_back({row, "duplicate filename '" + r.filename + "'"});
    if (expected_split == SplitTag::dev_train && !dev_train_devices().count(r.device))
      out.push_back({row, "device '" + r.device + "' not allowed in development-train"});
    if (expected_split == SplitTag::dev_test && !dev_test_devices().count(r.device))
      out.push_back({row, "device '" + r.device + "' not allowed in development-test"});
  }
  return out;
}

std::pair<Manifest, Manifest> make_device_split(const Manifest& m,
                                                const std::set<std::string>& holdout_devices,
                                                double test_fraction, uint64_t seed) {
  if (test_fraction < 0.0 || test_fraction > 1.0)
    throw std::invalid_argument("test_fraction must be in [0,1]");
  std::unordered_set<std::string> present;
  for (const auto& r : m.records) present.insert(r.device);
  for (const auto& d : holdout_devices)
    if (!present.count(d))
      throw std::invalid_argument("holdout device not present in manifest: " + d);

  // Per scene x device stratum, assign each non-holdout clip a seeded
  // priority keyed on its filename; the lowest-priority clips go to test.
  // Keying on filenames makes the split independent of record order.
  std::map<std::pair<std::string, std::string>, std::vector<size_t>> strata;
  std::vector<bool> to_test(m.records.size(), false);
  for (size_t i = 0; i < m.records.size(); ++i) {
    const auto& r = m.records[i];
    if (holdout_devices.count(r.device)) {
      to_test[i] = true;
    } else {
      strata[{r.scene, r.device}].push_back(i);
    }
  }
  for (auto& [key, idxs] : strata) {
    std::vector<std::pair<uint64_t, size_t>> prio;
    prio.reserve(idxs.size());
    for (size_t i : idxs)
      prio.emplace_back(splitmix64(mix_seed(seed, hash_str(m.records[i].filename))), i);
    std::sort(prio.begin(), prio.end(),
              [&](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first < b.first;
                return m.records[a.second].filename < m.records[b.second].filename;
              });
    const auto k = size_t(std::lround(test_fraction * double(idxs.size())));
    for (size_t j = 0; j < k && j < prio.size(); ++j) to_test[prio[j].second] = true;
  }

  Manifest train, test;
  train.split_tag = SplitTag::dev_train;
  test.split_tag = SplitTag::dev_test;
  for (size_t i = 0; i < m.records.size(); ++i)
    (to_test[i] ? test : train).records.push_back(m.records[i]);
  return {std::move(train), std::move(test)};
}

}  // namespace asckit

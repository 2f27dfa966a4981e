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

#include "asckit/subsets.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "asckit/rng.hpp"

namespace asckit {
namespace {

std::string subset_file_name(double fraction) {
  return "split" + std::to_string(int(std::lround(fraction * 100.0))) + ".csv";
}

}  // namespace

SubsetFamily make_nested_subsets(const Manifest& m, std::vector<double> fractions, uint64_t seed) {
  if (m.records.empty()) throw std::invalid_argument("make_nested_subsets: empty manifest");
  for (double f : fractions)
    if (!(f > 0.0) || f > 1.0)
      throw std::invalid_argument("make_nested_subsets: fraction outside (0,1]");
  std::sort(fractions.begin(), fractions.end());
  fractions.erase(std::unique(fractions.begin(), fractions.end()), fractions.end());

  // Rank clips inside each stratum by a priority keyed on (seed, filename),
  // so the family is independent of manifest record order.
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, std::vector<size_t>> strata;
  for (size_t i = 0; i < m.records.size(); ++i) {
    const auto& r = m.records[i];
    strata[{r.scene, r.device, r.city}].push_back(i);
  }

  std::vector<int> rank(m.records.size(), 0);  // position within own stratum
  std::vector<int> stratum_size(m.records.size(), 0);
  for (auto& [key, idxs] : strata) {
    std::vector<std::pair<uint64_t, size_t>> prio;
    prio.reserve(idxs.size());
    for (size_t i : idxs)
      prio.emplace_back(splitmix64(mix_seed(seed, hash_str(m.records[i].filename))), i);
    std::sort(prio.begin(), prio.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return m.records[a.second].filename < m.records[b.second].filename;
    });
    for (size_t pos = 0; pos < prio.size(); ++pos) {
      rank[prio[pos].second] = int(pos);
      stratum_size[prio[pos].second] = int(idxs.size());
    }
  }

  SubsetFamily family;
  family.fractions = fractions;
  family.seed = seed;
  for (double f : fractions) {
    std::vector<std::string> names;
    for (size_t i = 0; i < m.records.size(); ++i) {
      const long take = std::lround(f * double(stratum_size[i]));
      if (rank[i] < take) names.push_back(m.records[i].filename);
    }
    family.members[f] = std::move(names);
  }
  return family;
}

std::vector<StratRow> stratification_report(const SubsetFamily& family, const Manifest& m) {
  if (m.records.empty()) return {};
  std::unordered_map<std::string, const ClipRecord*> by_name;
  for (const auto& r : m.records) by_name[r.filename] = &r;

  struct Marginal {
    const char* field;
    std::string ClipRecord::*member;
  };
  const Marginal marginals[] = {{"scene", &ClipRecord::scene},
                                {"device", &ClipRecord::device},
                                {"city", &ClipRecord::city}};

  std::vector<StratRow> out;
  for (const auto& mg : marginals) {
    std::map<std::string, size_t> full_counts;
    for (const auto& r : m.records) ++full_counts[r.*(mg.member)];
    for (double f : family.fractions) {
      const auto& names = family.members.at(f);
      std::map<std::string, size_t> sub_counts;
      for (const auto& n : names) {
        auto it = by_name.find(n);
        if (it == by_name.end())
          throw std::invalid_argument("stratification_report: subset clip not in manifest: " + n);
        ++sub_counts[it->second->*(mg.member)];
      }
      for (const auto& [value, full_n] : full_counts) {
        StratRow row;
        row.fraction = f;
        row.field = mg.field;
        row.value = value;
        row.share_full = double(full_n) / double(m.records.size());
        row.share_subset =
            names.empty() ? 0.0 : double(sub_counts[value]) / double(names.size());
        row.deviation_pp = std::abs(row.share_subset - row.share_full) * 100.0;
        out.push_back(std::move(row));
      }
    }
  }
  return out;
}

std::vector<std::string> write_subset_files(const SubsetFamily& family, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> paths;
  for (double f : family.fractions) {
    const auto path = (fs::path(dir) / subset_file_name(f)).string();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write subset file: " + path);
    out << "filename\n";
    for (const auto& n : family.members.at(f)) out << n << "\n";
    if (!out) throw std::runtime_error("short write: " + path);
    paths.push_back(path);
  }
  return paths;
}

std::vector<std::string> read_subset_file(const std::string& path, const Manifest& m) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open subset file: " + path);
  std::unordered_set<std::string> known;
  for (const auto& r : m.records) known.insert(r.filename);

  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty subset file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "filename") throw std::runtime_error("bad subset header in " + path);

  std::vector<std::string> out;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!known.count(line))
      throw std::runtime_error("subset clip not in manifest: " + line + " (" + path + " line " +
                               std::to_string(lineno) + ")");
    out.push_back(line);
  }
  return out;
}

}  // namespace asckit

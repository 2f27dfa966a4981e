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
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace asckit {

// Flat key=value configuration. Lines are "key = value"; '#' starts a
// comment; blank lines are ignored. Keys are unique.
struct KvConfig {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values[key] = value; }

  std::string get(const std::string& key, const std::string& fallback) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  uint64_t get_u64(const std::string& key, uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
};

KvConfig parse_kv_text(const std::string& text);
KvConfig parse_kv_file(const std::string& path);
void write_kv_file(const KvConfig& cfg, const std::string& path);

// Applies --key value style overrides on top of file values.
void apply_overrides(KvConfig& cfg, const std::vector<std::pair<std::string, std::string>>& kv);

// Throws when cfg contains a key outside the allowed set.
void require_known(const KvConfig& cfg, const std::set<std::string>& allowed);

}  // namespace asckit

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

#include "asckit/kvconfig.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace asckit {
namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
  throw std::invalid_argument("config: key '" + key + "' has value '" + value +
                              "', expected " + expected);
}

}  // namespace

std::string KvConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

int64_t KvConfig::get_int(const std::string& key, int64_t fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  size_t pos = 0;
  int64_t v = 0;
  try {
    v = std::stoll(it->second, &pos);
  } catch (const std::exception&) {
    bad_value(key, it->second, "an integer");
  }
  if (pos != it->second.size()) bad_value(key, it->second, "an integer");
  return v;
}

uint64_t KvConfig::get_u64(const std::string& key, uint64_t fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  size_t pos = 0;
  uint64_t v = 0;
  try {
    v = std::stoull(it->second, &pos);
  } catch (const std::exception&) {
    bad_value(key, it->second, "an unsigned integer");
  }
  if (pos != it->second.size()) bad_value(key, it->second, "an unsigned integer");
  return v;
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(it->second, &pos);
  } catch (const std::exception&) {
    bad_value(key, it->second, "a number");
  }
  if (pos != it->second.size()) bad_value(key, it->second, "a number");
  return v;
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

KvConfig parse_kv_text(const std::string& text) {
  KvConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config: line " + std::to_string(lineno) + ": empty key");
    if (!cfg.values.emplace(key, value).second)
      throw std::invalid_argument("config: line " + std::to_string(lineno) + ": duplicate key '" +
                                  key + "'");
  }
  return cfg;
}

KvConfig parse_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_kv_text(buf.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(e.what()) + " in '" + path + "'");
  }
}

void write_kv_file(const KvConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("config: cannot write '" + path + "'");
  for (const auto& [k, v] : cfg.values) out << k << " = " << v << "\n";
  if (!out) throw std::runtime_error("config: write failed for '" + path + "'");
}

void apply_overrides(KvConfig& cfg, const std::vector<std::pair<std::string, std::string>>& kv) {
  for (const auto& [k, v] : kv) cfg.set(k, v);
}

void require_known(const KvConfig& cfg, const std::set<std::string>& allowed) {
  for (const auto& [k, v] : cfg.values) {
    (void)v;
    if (!allowed.count(k)) throw std::invalid_argument("config: unknown key '" + k + "'");
  }
}

}  // namespace asckit

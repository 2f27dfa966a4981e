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

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace asckit {

// The TAU Urban Acoustic Scenes label set, in canonical order.
inline constexpr int kNumScenes = 10;
const std::array<std::string, kNumScenes>& scene_labels();
int scene_index(const std::string& name);  // -1 when unknown

enum class DeviceKind { real, simulated };

bool is_valid_device(const std::string& id);  // a..d, s1..s10 (lowercase)
DeviceKind device_kind(const std::string& id);
std::string normalize_device(const std::string& id);  // "S1" -> "s1"

// Device membership per split: A/B/C/S1-S3 are the development-train
// devices, S4-S6 appear only in development-test, D and S7-S10 only in
// evaluation data.
const std::set<std::string>& dev_train_devices();
const std::set<std::string>& dev_test_devices();

enum class SplitTag { dev_train, dev_test, evaluation };
std::string split_tag_name(SplitTag tag);
SplitTag parse_split_tag(const std::string& name);

struct ClipRecord {
  std::string filename;  // relative to the audio root
  std::string scene;
  std::string city;
  std::string device;  // canonical lowercase id
  double duration = 1.0;
  int sample_rate = 44100;
};

struct Manifest {
  std::vector<ClipRecord> records;
  SplitTag split_tag = SplitTag::dev_train;

  size_t size() const { return records.size(); }
};

// Tab-separated, header "filename\tscene_label\tcity\tdevice". parse throws
// on structural problems (missing file, bad header, unknown scene or device,
// duplicate filename, malformed row) with the offending line number.
Manifest parse_manifest(const std::string& path);
void write_manifest(const std::string& path, const Manifest& m);

struct Violation {
  int row = 0;  // 1-based record index, 0 for manifest-level issues
  std::string message;
};

// Split-invariant and field checks as data, not exceptions.
std::vector<Violation> validate_manifest(const Manifest& m, SplitTag expected_split);

// All clips of holdout devices go to test; of the rest, test_fraction per
// scene x device stratum goes to test (seeded, order-independent). The two
// outputs partition the input exactly.
std::pair<Manifest, Manifest> make_device_split(const Manifest& m,
                                                const std::set<std::string>& holdout_devices,
                                                double test_fraction, uint64_t seed);

}  // namespace asckit

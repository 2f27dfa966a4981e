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

#include <string>
#include <vector>

namespace asckit {

struct Waveform {
  std::vector<float> samples;  // mono, [-1, 1)
  int sample_rate = 0;

  double duration_sec() const {
    return sample_rate > 0 ? double(samples.size()) / sample_rate : 0.0;
  }
};

// Reads a mono PCM WAV file (16 or 24 bit). Multi-channel input is averaged
// down to mono. Throws std::runtime_error on malformed files.
Waveform read_wav(const std::string& path);

// Writes mono 16-bit PCM. Samples are clamped to [-1, 1] before quantization.
void write_wav(const std::string& path, const Waveform& w);

}  // namespace asckit

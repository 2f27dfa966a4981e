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
#include <map>
#include <string>
#include <vector>

#include "asckit/manifest.hpp"
#include "asckit/wav.hpp"

namespace asckit {

// Per-scene spectral recipe: three stable tones plus one band of noise.
// Distinct recipes make the classes learnable by a small CNN in minutes.
struct SceneSignature {
  std::array<double, 3> tone_hz = {440.0, 880.0, 1760.0};
  double band_lo_hz = 1000.0;
  double band_hi_hz = 2000.0;
  double tone_gain = 0.12;
  double band_gain = 0.08;
  double noise_gain = 0.015;
};

// First-order high-shelf plus broadband gain. shelf_gain = 1 leaves the
// spectrum untouched exactly, so identity filters differ only by gain.
struct DeviceFilter {
  double shelf_gain = 1.0;
  double shelf_hz = 3000.0;
  double gain = 1.0;
};

struct SyntheticCorpusSpec {
  std::vector<std::string> scenes;   // defaults to the full 10-label set
  std::vector<std::string> devices;  // defaults to a,b,c,s1..s6
  int clips_per_scene_device = 2;
  int cities = 3;
  int sample_rate = 44100;
  double duration_sec = 1.0;
  uint64_t seed = 0;
  std::map<std::string, SceneSignature> scene_signatures;  // keyed by scene
  std::map<std::string, DeviceFilter> device_filters;      // keyed by device

  SyntheticCorpusSpec();  // fills the default taxonomy, recipes and filters
  void validate() const;  // throws std::invalid_argument
};

SyntheticCorpusSpec load_corpus_spec(const std::string& json_path);
std::string corpus_spec_to_json(const SyntheticCorpusSpec& spec);

// Manifest for the scene x device x city grid, without synthesizing audio.
Manifest synth_manifest(const SyntheticCorpusSpec& spec);

// One clip. Source content depends on (seed, scene, clip index) only; the
// device filter is applied on top, so devices share identical source audio.
Waveform synth_clip(const SyntheticCorpusSpec& spec, const std::string& scene,
                    const std::string& device, int clip_index);

// Writes out_dir/audio/*.wav and out_dir/manifest.tsv; returns the manifest.
Manifest generate_synthetic_corpus(const SyntheticCorpusSpec& spec, const std::string& out_dir);

}  // namespace asckit

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
#include <string>
#include <vector>

#include "asckit/frontend.hpp"
#include "asckit/rng.hpp"
#include "asckit/wav.hpp"

namespace asckit {

struct FreqMixStyleConfig {
  double alpha = 0.3;  // Beta shape
  double p = 0.4;      // per-batch application probability
  double eps = 1e-5;   // variance floor
};

// Deterministic core: mixes per-frequency mean/std of each sample with its
// permuted partner. lambda in [0,1]; perm must be a permutation of the batch.
void apply_freq_mixstyle(std::vector<MelSpectrogram>& batch, double lambda,
                         const std::vector<int>& perm, double eps);

// Random wrapper per the config: one keep/skip draw, one lambda ~ Beta(a,a),
// one permutation per batch.
void freq_mixstyle(std::vector<MelSpectrogram>& batch, const FreqMixStyleConfig& cfg, Rng& rng);

// Deterministic core: sets mel rows [start, start+width) to the spectrogram
// mean. Random wrapper draws width ~ U{0..max_width} and a uniform offset.
void apply_freq_mask(MelSpectrogram& spec, int width, int start);
void freq_mask(MelSpectrogram& spec, int max_width, Rng& rng);

// Circular waveform shift: out[i] = in[(i - k) mod n].
Waveform time_roll_by(const Waveform& w, int64_t k);
Waveform time_roll(const Waveform& w, int max_shift, Rng& rng);

struct ImpulseResponseBank {
  std::vector<Waveform> irs;  // resampled to the working rate on load

  size_t size() const { return irs.size(); }
};

// Loads every .wav in a directory (sorted by filename) and resamples to rate.
ImpulseResponseBank load_ir_bank(const std::string& dir, int rate);

// Deterministic core: full convolution truncated to the input length, then
// peak-normalized to the input's peak. Random wrapper picks an IR uniformly
// and applies with probability p.
Waveform dir_convolve_with(const Waveform& w, const Waveform& ir);
Waveform dir_convolve(const Waveform& w, const ImpulseResponseBank& bank, double p, Rng& rng);

// Synthetic stand-in IRs (exponentially decaying filtered noise) so tests
// and demos need no third-party downloads.
ImpulseResponseBank make_synthetic_ir_bank(int count, int rate, uint64_t seed);

}  // namespace asckit

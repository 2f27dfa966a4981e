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

#include <cmath>
#include <vector>

#include "asckit/wav.hpp"

namespace asckit {

struct FrontendConfig {
  int target_rate = 32000;
  int fft_size = 4096;
  double window_ms = 96.0;  // 3072 samples at 32 kHz
  int hop_samples = 512;    // ~16 ms at 32 kHz
  int n_mels = 256;
  double log_floor = 1e-5;

  int window_samples() const { return int(std::lround(window_ms / 1000.0 * target_rate)); }
  int n_bins() const { return fft_size / 2 + 1; }
};

// Log-mel spectrogram, mel-major storage: values[m * n_frames + t].
struct MelSpectrogram {
  int n_mels = 0;
  int n_frames = 0;
  double frame_rate = 0.0;  // frames per second
  std::vector<float> values;

  float& at(int m, int t) { return values[size_t(m) * n_frames + t]; }
  float at(int m, int t) const { return values[size_t(m) * n_frames + t]; }
};

// Triangular mel filters on the Slaney scale, stored sparse: filter m covers
// bins [start[m], start[m] + weights[m].size()).
struct MelFilterbank {
  int n_mels = 0;
  int n_bins = 0;
  std::vector<int> start;
  std::vector<std::vector<double>> weights;
  std::vector<double> center_hz;  // triangle peak per filter

  std::vector<double> dense() const;  // row-major (n_mels, n_bins)
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

MelFilterbank mel_filterbank(const FrontendConfig& cfg);

// Band-limited resample to target_rate; identity when rates match.
Waveform resample_wave(const Waveform& w, int target_rate);

// Hann-windowed centered STFT (reflect padding), magnitude, mel projection,
// natural log with floor. Requires w.sample_rate == cfg.target_rate.
MelSpectrogram stft_logmel(const Waveform& w, const FrontendConfig& cfg);
MelSpectrogram stft_logmel(const Waveform& w, const FrontendConfig& cfg,
                           const MelFilterbank& fb);

}  // namespace asckit

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
#include <vector>

#include "asckit/frontend.hpp"
#include "asckit/rng.hpp"

using namespace asckit;

namespace {

constexpr double kPi = 3.14159265358979323846;

Waveform tone(double hz, double seconds, int rate, double amp = 0.5) {
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(size_t(std::lround(seconds * rate)));
  for (size_t i = 0; i < w.samples.size(); ++i)
    w.samples[i] = float(amp * std::sin(2.0 * kPi * hz * double(i) / rate));
  return w;
}

}  // namespace

TEST_CASE("default frontend geometry") {
  FrontendConfig cfg;
  CHECK(cfg.target_rate == 32000);
  CHECK(cfg.fft_size == 4096);
  CHECK(cfg.window_samples() == 3072);
  CHECK(cfg.n_bins() == 2049);
  CHECK(cfg.n_mels == 256);
}

TEST_CASE("mel scale round trips") {
  for (double hz : {0.0, 50.0, 440.0, 1000.0, 8000.0, 15999.0}) {
    CHECK(mel_to_hz(hz_to_mel(hz)) == doctest::Approx(hz).epsilon(1e-9));
  }
  CHECK(hz_to_mel(0.0) == doctest::Approx(0.0));
  // Below the 1 kHz corner the scale is linear in frequency.
  CHECK(hz_to_mel(500.0) == doctest::Approx(hz_to_mel(250.0) * 2.0).epsilon(1e-9));
}

TEST_CASE("mel filterbank covers the spectrum with nonnegative weights") {
  FrontendConfig cfg;
  const MelFilterbank fb = mel_filterbank(cfg);
  CHECK(fb.n_mels == 256);
  CHECK(fb.n_bins == 2049);
  REQUIRE(fb.center_hz.size() == 256);

  const auto d = fb.dense();
  REQUIRE(d.size() == size_t(256) * 2049);
  for (double v : d) CHECK(v >= 0.0);

  // Every bin between the outermost filter peaks gets positive total weight.
  const double hz_per_bin = double(cfg.target_rate) / cfg.fft_size;
  const int lo = int(std::ceil(fb.center_hz.front() / hz_per_bin));
  const int hi = int(std::floor(fb.center_hz.back() / hz_per_bin));
  REQUIRE(lo < hi);
  for (int b = lo; b <= hi; ++b) {
    double sum = 0.0;
    for (int m = 0; m < fb.n_mels; ++m) sum += d[size_t(m) * 2049 + size_t(b)];
    CHECK(sum > 0.0);
  }

  // Sparse storage and the dense view describe the same matrix.
  for (int m = 0; m < fb.n_mels; ++m) {
    for (size_t k = 0; k < fb.weights[size_t(m)].size(); ++k) {
      CHECK(d[size_t(m) * 2049 + size_t(fb.start[size_t(m)]) + k] ==
            doctest::Approx(fb.weights[size_t(m)][k]));
    }
  }
}

TEST_CASE("resample_wave meets the rate contract") {
  const Waveform w = tone(440.0, 1.0, 44100);
  const Waveform r = resample_wave(w, 32000);
  CHECK(r.sample_rate == 32000);
  CHECK(r.samples.size() == 32000);

  // Same-rate input passes through untouched.
  const Waveform same = resample_wave(w, 44100);
  CHECK(same.samples == w.samples);

  // DC stays put.
  Waveform dc;
  dc.sample_rate = 44100;
  dc.samples.assign(44100, 0.5f);
  const Waveform rdc = resample_wave(dc, 32000);
  for (float v : rdc.samples) CHECK(v == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("one second of audio maps to a 256 x 63 log-mel") {
  FrontendConfig cfg;
  const Waveform w = tone(1000.0, 1.0, 32000);
  const MelSpectrogram spec = stft_logmel(w, cfg);
  CHECK(spec.n_mels == 256);
  CHECK(spec.n_frames == 63);
  CHECK(spec.values.size() == size_t(256) * 63);
  CHECK(spec.frame_rate == doctest::Approx(32000.0 / 512.0));
}

TEST_CASE("stft_logmel rejects rate mismatches") {
  FrontendConfig cfg;
  const Waveform w = tone(1000.0, 0.5, 44100);
  CHECK_THROWS_AS(stft_logmel(w, cfg), std::invalid_argument);
}

TEST_CASE("an all-zero waveform hits the log floor everywhere") {
  FrontendConfig cfg;
  Waveform w;
  w.sample_rate = 32000;
  w.samples.assign(32000, 0.0f);
  const MelSpectrogram spec = stft_logmel(w, cfg);
  const float floor = float(std::log(cfg.log_floor));
  for (float v : spec.values) CHECK(v == doctest::Approx(floor).epsilon(1e-9));
}

TEST_CASE("a tone at a mel band center dominates that band in every frame") {
  FrontendConfig cfg;
  const MelFilterbank fb = mel_filterbank(cfg);
  // Frames whose analysis window overlaps the clip boundary see a truncated
  // tone; allow them one band of slack and hold the interior to an exact hit.
  const int margin = (cfg.window_samples() / cfg.hop_samples + 1) / 2;
  for (int k : {60, 120, 200}) {
    const Waveform w = tone(fb.center_hz[size_t(k)], 1.0, 32000);
    const MelSpectrogram spec = stft_logmel(w, cfg, fb);
    for (int t = 0; t < spec.n_frames; ++t) {
      int argmax = 0;
      for (int m = 1; m < spec.n_mels; ++m)
        if (spec.at(m, t) > spec.at(argmax, t)) argmax = m;
      if (t >= margin && t < spec.n_frames - margin)
        CHECK(argmax == k);
      else
        CHECK(std::abs(argmax - k) <= 1);
    }
  }
}

TEST_CASE("stft_logmel is deterministic") {
  FrontendConfig cfg;
  cfg.n_mels = 64;
  Rng rng(23);
  Waveform w;
  w.sample_rate = 32000;
  w.samples.resize(16000);
  for (auto& v : w.samples) v = float(rng.uniform(-0.8, 0.8));
  const MelSpectrogram a = stft_logmel(w, cfg);
  const MelSpectrogram b = stft_logmel(w, cfg);
  CHECK(a.values == b.values);
}

TEST_CASE("louder input never lowers a log-mel cell") {
  FrontendConfig cfg;
  cfg.n_mels = 48;
  const Waveform soft = tone(700.0, 0.25, 32000, 0.1);
  Waveform loud = soft;
  for (auto& v : loud.samples) v *= 4.0f;
  const MelSpectrogram a = stft_logmel(soft, cfg);
  const MelSpectrogram b = stft_logmel(loud, cfg);
  for (size_t i = 0; i < a.values.size(); ++i) CHECK(b.values[i] >= a.values[i] - 1e-6f);
}

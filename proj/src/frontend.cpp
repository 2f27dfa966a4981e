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

#include "asckit/frontend.hpp"

#include <complex>
#include <memory>
#include <stdexcept>

#include "asckit/kernels/fft.hpp"
#include "asckit/kernels/resample.hpp"

namespace asckit {
namespace {

// Reflect padding without repeating the edge sample; the loop handles
// windows wider than the signal.
int64_t reflect_index(int64_t i, int64_t n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

}  // namespace

double hz_to_mel(double hz) {
  constexpr double kBreak = 1000.0;
  constexpr double kLinStep = 200.0 / 3.0;
  if (hz < kBreak) return hz / kLinStep;
  const double log_step = std::log(6.4) / 27.0;
  return kBreak / kLinStep + std::log(hz / kBreak) / log_step;
}

double mel_to_hz(double mel) {
  constexpr double kBreak = 1000.0;
  constexpr double kLinStep = 200.0 / 3.0;
  const double break_mel = kBreak / kLinStep;
  if (mel < break_mel) return mel * kLinStep;
  const double log_step = std::log(6.4) / 27.0;
  return kBreak * std::exp(log_step * (mel - break_mel));
}

std::vector<double> MelFilterbank::dense() const {
  std::vector<double> out(size_t(n_mels) * n_bins, 0.0);
  for (int m = 0; m < n_mels; ++m)
    for (size_t k = 0; k < weights[size_t(m)].size(); ++k)
      out[size_t(m) * n_bins + start[size_t(m)] + int(k)] = weights[size_t(m)][k];
  return out;
}

MelFilterbank mel_filterbank(const FrontendConfig& cfg) {
  if (cfg.n_mels < 1) throw std::invalid_argument("mel_filterbank: n_mels must be >= 1");
  if (cfg.n_mels > cfg.n_bins())
    throw std::invalid_argument("mel_filterbank: n_mels larger than FFT bins");

  const int n_bins = cfg.n_bins();
  const double nyquist = cfg.target_rate / 2.0;
  const double bin_hz = double(cfg.target_rate) / cfg.fft_size;

  // n_mels + 2 equally spaced points on the mel scale; triangle m peaks at
  // point m+1 with feet at points m and m+2.
  std::vector<double> f(size_t(cfg.n_mels) + 2);
  const double mel_max = hz_to_mel(nyquist);
  for (size_t i = 0; i < f.size(); ++i)
    f[i] = mel_to_hz(mel_max * double(i) / double(cfg.n_mels + 1));

  MelFilterbank fb;
  fb.n_mels = cfg.n_mels;
  fb.n_bins = n_bins;
  fb.start.resize(size_t(cfg.n_mels));
  fb.weights.resize(size_t(cfg.n_mels));
  fb.center_hz.resize(size_t(cfg.n_mels));
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double lo = f[size_t(m)], center = f[size_t(m) + 1], hi = f[size_t(m) + 2];
    fb.center_hz[size_t(m)] = center;
    int k0 = int(std::ceil(lo / bin_hz));
    int k1 = int(std::floor(hi / bin_hz));
    if (k0 < 0) k0 = 0;
    if (k1 > n_bins - 1) k1 = n_bins - 1;
    std::vector<double> w;
    int first = -1;
    for (int k = k0; k <= k1; ++k) {
      const double hz = k * bin_hz;
      const double rise = (hz - lo) / (center - lo);
      const double fall = (hi - hz) / (hi - center);
      const double v = std::max(0.0, std::min(rise, fall));
      if (v > 0.0 && first < 0) first = k;
      if (first >= 0) w.push_back(v);
    }
    while (!w.empty() && w.back() == 0.0) w.pop_back();
    if (w.empty()) {
      // Degenerate triangle narrower than one bin: pin it to the nearest bin
      // so every filter stays non-empty.
      first = std::min(n_bins - 1, int(std::lround(center / bin_hz)));
      w.push_back(1.0);
    }
    fb.start[size_t(m)] = first;
    fb.weights[size_t(m)] = std::move(w);
  }
  return fb;
}

Waveform resample_wave(const Waveform& w, int target_rate) {
  if (w.sample_rate <= 0 || target_rate <= 0)
    throw std::invalid_argument("resample: non-positive rate");
  if (w.sample_rate == target_rate) return w;
  Waveform out;
  out.sample_rate = target_rate;
  out.samples = kernels::resample(w.samples, w.sample_rate, target_rate);
  return out;
}

MelSpectrogram stft_logmel(const Waveform& w, const FrontendConfig& cfg) {
  return stft_logmel(w, cfg, mel_filterbank(cfg));
}

MelSpectrogram stft_logmel(const Waveform& w, const FrontendConfig& cfg,
                           const MelFilterbank& fb) {
  if (w.sample_rate != cfg.target_rate)
    throw std::invalid_argument("stft_logmel: waveform rate does not match config");
  const int64_t n = int64_t(w.samples.size());
  if (n < cfg.hop_samples) throw std::invalid_argument("stft_logmel: clip shorter than one hop");
  const int win = cfg.window_samples();
  if (win > cfg.fft_size) throw std::invalid_argument("stft_logmel: window exceeds fft_size");

  const int n_frames = 1 + int(n / cfg.hop_samples);
  const int n_bins = cfg.n_bins();
  const int pad = (cfg.fft_size - win) / 2;

  static thread_local struct {
    int size = 0;
    int win = 0;
    std::unique_ptr<kernels::FftPlan> plan;
    std::vector<double> window;
  } cache;
  if (cache.size != cfg.fft_size) {
    cache.plan = std::make_unique<kernels::FftPlan>(cfg.fft_size);
    cache.size = cfg.fft_size;
    cache.win = 0;
  }
  if (cache.win != win) {
    cache.window.resize(static_cast<size_t>(win));
    for (int i = 0; i < win; ++i)
      cache.window[size_t(i)] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / win);
    cache.win = win;
  }
  const kernels::FftPlan& plan = *cache.plan;
  const double* window = cache.window.data();

  std::vector<double> mags(size_t(n_frames) * n_bins);
#pragma omp parallel
  {
    std::vector<std::complex<double>> buf(size_t(cfg.fft_size));
#pragma omp for schedule(static)
    for (int t = 0; t < n_frames; ++t) {
      for (int i = 0; i < pad; ++i) buf[size_t(i)] = 0.0;
      for (int i = pad + win; i < cfg.fft_size; ++i) buf[size_t(i)] = 0.0;
      const int64_t centre = int64_t(t) * cfg.hop_samples;
      for (int i = 0; i < win; ++i) {
        const int64_t src = reflect_index(centre - win / 2 + i, n);
        buf[size_t(pad + i)] = double(w.samples[size_t(src)]) * window[i];
      }
      plan.forward(buf.data());
      double* row = mags.data() + size_t(t) * n_bins;
      for (int k = 0; k < n_bins; ++k) {
        const double re = buf[size_t(k)].real(), im = buf[size_t(k)].imag();
        row[k] = std::sqrt(re * re + im * im);
      }
    }
  }

  MelSpectrogram spec;
  spec.n_mels = cfg.n_mels;
  spec.n_frames = n_frames;
  spec.frame_rate = double(cfg.target_rate) / cfg.hop_samples;
  spec.values.resize(size_t(cfg.n_mels) * n_frames);
#pragma omp parallel for schedule(static)
  for (int m = 0; m < cfg.n_mels; ++m) {
    const auto& wts = fb.weights[size_t(m)];
    const int k0 = fb.start[size_t(m)];
    for (int t = 0; t < n_frames; ++t) {
      const double* row = mags.data() + size_t(t) * n_bins;
      double acc = 0.0;
      for (size_t k = 0; k < wts.size(); ++k) acc += wts[k] * row[size_t(k0) + k];
      spec.at(m, t) = float(std::log(cfg.log_floor + acc));
    }
  }
  return spec;
}

}  // namespace asckit

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

#include "asckit/augment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "asckit/kernels/fft.hpp"
#include "asckit/kernels/resample.hpp"

namespace asckit {

void apply_freq_mixstyle(std::vector<MelSpectrogram>& batch, double lambda,
                         const std::vector<int>& perm, double eps) {
  if (batch.empty()) throw std::invalid_argument("freq_mixstyle: empty batch");
  if (perm.size() != batch.size())
    throw std::invalid_argument("freq_mixstyle: permutation size mismatch");
  const int n_mels = batch[0].n_mels;
  const int n_frames = batch[0].n_frames;
  for (const auto& s : batch)
    if (s.n_mels != n_mels || s.n_frames != n_frames)
      throw std::invalid_argument("freq_mixstyle: inconsistent batch shapes");

  // Per-frequency stats across time, with the eps floor folded into sigma so
  // lambda = 1 restores the input exactly.
  const size_t bsz = batch.size();
  std::vector<double> mu(bsz * size_t(n_mels)), sigma(bsz * size_t(n_mels));
  for (size_t b = 0; b < bsz; ++b) {
    for (int m = 0; m < n_mels; ++m) {
      double sum = 0.0, sumsq = 0.0;
      for (int t = 0; t < n_frames; ++t) {
        const double v = batch[b].at(m, t);
        sum += v;
        sumsq += v * v;
      }
      const double mean = sum / n_frames;
      const double var = std::max(0.0, sumsq / n_frames - mean * mean);
      mu[b * size_t(n_mels) + size_t(m)] = mean;
      sigma[b * size_t(n_mels) + size_t(m)] = std::sqrt(var) + eps;
    }
  }

  for (size_t b = 0; b < bsz; ++b) {
    const size_t pb = size_t(perm[b]);
    if (pb >= bsz) throw std::invalid_argument("freq_mixstyle: bad permutation entry");
    for (int m = 0; m < n_mels; ++m) {
      const double mu_own = mu[b * size_t(n_mels) + size_t(m)];
      const double sg_own = sigma[b * size_t(n_mels) + size_t(m)];
      const double mu_mix = lambda * mu_own + (1.0 - lambda) * mu[pb * size_t(n_mels) + size_t(m)];
      const double sg_mix =
          lambda * sg_own + (1.0 - lambda) * sigma[pb * size_t(n_mels) + size_t(m)];
      for (int t = 0; t < n_frames; ++t) {
        const double xhat = (batch[b].at(m, t) - mu_own) / sg_own;
        batch[b].at(m, t) = float(xhat * sg_mix + mu_mix);
      }
    }
  }
}

void freq_mixstyle(std::vector<MelSpectrogram>& batch, const FreqMixStyleConfig& cfg, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("freq_mixstyle: empty batch");
  if (cfg.alpha <= 0.0) throw std::invalid_argument("freq_mixstyle: alpha must be > 0");
  if (cfg.p < 0.0 || cfg.p > 1.0) throw std::invalid_argument("freq_mixstyle: p outside [0,1]");
  if (rng.uniform() >= cfg.p) return;
  const double lambda = rng.beta(cfg.alpha, cfg.alpha);
  const auto perm = rng.permutation(int(batch.size()));
  apply_freq_mixstyle(batch, lambda, perm, cfg.eps);
}

void apply_freq_mask(MelSpectrogram& spec, int width, int start) {
  if (width == 0) return;
  if (width < 0 || start < 0 || start + width > spec.n_mels)
    throw std::invalid_argument("freq_mask: band outside spectrogram");
  double sum = 0.0;
  for (float v : spec.values) sum += v;
  const float fill = float(sum / double(spec.values.size()));
  for (int m = start; m < start + width; ++m)
    for (int t = 0; t < spec.n_frames; ++t) spec.at(m, t) = fill;
}

void freq_mask(MelSpectrogram& spec, int max_width, Rng& rng) {
  if (max_width < 0 || max_width > spec.n_mels)
    throw std::invalid_argument("freq_mask: max_width outside [0, n_mels]");
  const int width = int(rng.uniform_int(0, max_width));
  if (width == 0) return;
  const int start = int(rng.uniform_int(0, int64_t(spec.n_mels - width)));
  apply_freq_mask(spec, width, start);
}

Waveform time_roll_by(const Waveform& w, int64_t k) {
  const int64_t n = int64_t(w.samples.size());
  if (n == 0) return w;
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.resize(w.samples.size());
  const int64_t shift = ((k % n) + n) % n;
  for (int64_t i = 0; i < n; ++i)
    out.samples[size_t(i)] = w.samples[size_t((i - shift + n) % n)];
  return out;
}

Waveform time_roll(const Waveform& w, int max_shift, Rng& rng) {
  if (max_shift < 0) throw std::invalid_argument("time_roll: negative max_shift");
  if (int64_t(max_shift) >= int64_t(w.samples.size()))
    throw std::invalid_argument("time_roll: max_shift must be smaller than the clip");
  const int64_t k = rng.uniform_int(-int64_t(max_shift), int64_t(max_shift));
  return time_roll_by(w, k);
}

ImpulseResponseBank load_ir_bank(const std::string& dir, int rate) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw std::runtime_error("IR bank directory not found: " + dir);
  std::vector<std::string> paths;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    if (ext == ".wav") paths.push_back(e.path().string());
  }
  std::sort(paths.begin(), paths.end());

  ImpulseResponseBank bank;
  for (const auto& p : paths) {
    Waveform ir = read_wav(p);
    if (ir.samples.empty()) throw std::runtime_error("empty impulse response: " + p);
    if (ir.sample_rate != rate) {
      ir.samples = kernels::resample(ir.samples, ir.sample_rate, rate);
      ir.sample_rate = rate;
    }
    bank.irs.push_back(std::move(ir));
  }
  return bank;
}

Waveform dir_convolve_with(const Waveform& w, const Waveform& ir) {
  if (ir.samples.empty()) throw std::invalid_argument("dir_convolve: empty impulse response");
  Waveform ir_use = ir;
  if (ir.sample_rate != w.sample_rate) {
    ir_use.samples = kernels::resample(ir.samples, ir.sample_rate, w.sample_rate);
    ir_use.sample_rate = w.sample_rate;
  }

  std::vector<double> a(w.samples.begin(), w.samples.end());
  std::vector<double> b(ir_use.samples.begin(), ir_use.samples.end());
  std::vector<double> conv = kernels::fft_convolve(a, b);

  double peak_in = 0.0, peak_out = 0.0;
  for (float v : w.samples) peak_in = std::max(peak_in, double(std::abs(v)));
  for (size_t i = 0; i < w.samples.size(); ++i)
    peak_out = std::max(peak_out, std::abs(conv[i]));
  const double scale = peak_out > 0.0 ? peak_in / peak_out : 1.0;

  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.resize(w.samples.size());
  for (size_t i = 0; i < w.samples.size(); ++i) out.samples[i] = float(conv[i] * scale);
  return out;
}

Waveform dir_convolve(const Waveform& w, const ImpulseResponseBank& bank, double p, Rng& rng) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("dir_convolve: p outside [0,1]");
  if (p > 0.0 && bank.irs.empty())
    throw std::invalid_argument("dir_convolve: empty bank with p > 0");
  if (p <= 0.0 || rng.uniform() >= p) return w;
  const auto idx = size_t(rng.uniform_int(0, int64_t(bank.irs.size()) - 1));
  return dir_convolve_with(w, bank.irs[idx]);
}

ImpulseResponseBank make_synthetic_ir_bank(int count, int rate, uint64_t seed) {
  if (count < 0) throw std::invalid_argument("make_synthetic_ir_bank: negative count");
  ImpulseResponseBank bank;
  for (int i = 0; i < count; ++i) {
    Rng rng(mix_seed(seed, uint64_t(i) + 1));
    const int len = int(rng.uniform_int(rate / 100, rate / 20));  // 10..50 ms
    const double tau = rng.uniform(0.002, 0.015) * rate;
    const double alpha = rng.uniform(0.05, 0.9);  // one-pole color

    Waveform ir;
    ir.sample_rate = rate;
    ir.samples.resize(size_t(len));
    double lp = 0.0, peak = 0.0;
    for (int j = 0; j < len; ++j) {
      lp += alpha * (rng.normal() - lp);
      const double v = lp * std::exp(-double(j) / tau);
      ir.samples[size_t(j)] = float(v);
      peak = std::max(peak, std::abs(v));
    }
    if (peak > 0.0)
      for (auto& v : ir.samples) v = float(v / peak);
    bank.irs.push_back(std::move(ir));
  }
  return bank;
}

}  // namespace asckit

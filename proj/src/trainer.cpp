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

#include "asckit/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "asckit/rng.hpp"

namespace asckit {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Runs f(i) for i in [0, n) in parallel, rethrowing the first failure.
template <typename F>
void parallel_for_checked(int64_t n, F&& f) {
  std::atomic<bool> failed{false};
  std::string err;
#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < n; ++i) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      f(i);
    } catch (const std::exception& e) {
#pragma omp critical(asckit_parallel_err)
      {
        if (!failed.exchange(true)) err = e.what();
      }
    }
  }
  if (failed.load()) throw std::runtime_error(err);
}

void log_softmax_row(const float* z, int n, double inv_t, double* out) {
  double mx = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < n; ++c) mx = std::max(mx, double(z[c]) * inv_t);
  double sum = 0.0;
  for (int c = 0; c < n; ++c) sum += std::exp(double(z[c]) * inv_t - mx);
  const double lse = mx + std::log(sum);
  for (int c = 0; c < n; ++c) out[c] = double(z[c]) * inv_t - lse;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("train config: epochs must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
  if (peak_lr <= 0.0) throw std::invalid_argument("train config: peak_lr must be positive");
  if (weight_decay < 0.0) throw std::invalid_argument("train config: weight_decay must be >= 0");
  if (warmup_fraction < 0.0 || warmup_fraction > 1.0)
    throw std::invalid_argument("train config: warmup_fraction must be in [0, 1]");
  if (lr_floor < 0.0 || lr_floor > peak_lr)
    throw std::invalid_argument("train config: lr_floor must be in [0, peak_lr]");
  if (beta1 <= 0.0 || beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0)
    throw std::invalid_argument("train config: betas must be in (0, 1)");
  if (adam_eps <= 0.0) throw std::invalid_argument("train config: adam_eps must be positive");
  if (augment.time_roll_max < 0)
    throw std::invalid_argument("train config: time_roll_max must be >= 0");
  if (augment.freq_mask_max_width < 0)
    throw std::invalid_argument("train config: freq_mask_max_width must be >= 0");
  if (augment.dir_p < 0.0 || augment.dir_p > 1.0)
    throw std::invalid_argument("train config: dir_p must be in [0, 1]");
  if (augment.mixstyle.alpha <= 0.0)
    throw std::invalid_argument("train config: mixstyle alpha must be positive");
  if (augment.mixstyle.p < 0.0 || augment.mixstyle.p > 1.0)
    throw std::invalid_argument("train config: mixstyle p must be in [0, 1]");
}

ClipStore load_clips(const Manifest& m, const std::string& audio_root, const FrontendConfig& fe) {
  ClipStore store;
  store.sample_rate = fe.target_rate;
  store.split_tag = m.split_tag;
  store.clips.resize(m.records.size());
  const std::filesystem::path root(audio_root);
  parallel_for_checked(int64_t(m.records.size()), [&](int64_t i) {
    const auto& r = m.records[size_t(i)];
    LoadedClip& c = store.clips[size_t(i)];
    c.record = r;
    c.label = scene_index(r.scene);
    if (c.label < 0)
      throw std::invalid_argument("load_clips: unknown scene '" + r.scene + "' for '" +
                                  r.filename + "'");
    const Waveform w = read_wav((root / r.filename).string());
    const Waveform rs = resample_wave(w, fe.target_rate);
    c.wave = rs.samples;
  });
  return store;
}

ClipStore filter_clips(const ClipStore& store, const std::vector<std::string>& filenames) {
  std::unordered_map<std::string, int> index;
  index.reserve(store.clips.size());
  for (size_t i = 0; i < store.clips.size(); ++i)
    index.emplace(store.clips[i].record.filename, int(i));
  ClipStore out;
  out.sample_rate = store.sample_rate;
  out.split_tag = store.split_tag;
  out.clips.reserve(filenames.size());
  for (const auto& f : filenames) {
    auto it = index.find(f);
    if (it == index.end())
      throw std::invalid_argument("filter_clips: '" + f + "' not in the loaded set");
    out.clips.push_back(store.clips[size_t(it->second)]);
  }
  return out;
}

Manifest manifest_of(const ClipStore& clips) {
  Manifest m;
  m.split_tag = clips.split_tag;
  m.records.reserve(clips.clips.size());
  for (const auto& c : clips.clips) m.records.push_back(c.record);
  return m;
}

int64_t warmup_steps(int64_t total_steps, double warmup_fraction) {
  if (total_steps <= 0 || warmup_fraction <= 0.0) return 0;
  int64_t w = std::llround(warmup_fraction * double(total_steps));
  if (w < 1) w = 1;
  if (w > total_steps - 1) w = total_steps - 1;
  return std::max<int64_t>(w, 0);
}

double lr_at(int64_t step, int64_t total_steps, const TrainConfig& cfg) {
  if (step < 0) throw std::invalid_argument("lr_at: negative step");
  if (total_steps <= 0) return 0.0;
  const int64_t warm = warmup_steps(total_steps, cfg.warmup_fraction);
  if (step < warm) return cfg.peak_lr * double(step) / double(warm);
  const int64_t span = total_steps - 1 - warm;
  if (span <= 0) return cfg.peak_lr;
  const double x = double(step - warm) / double(span);
  return cfg.lr_floor + (cfg.peak_lr - cfg.lr_floor) * 0.5 * (1.0 + std::cos(kPi * x));
}

double kd_loss_grad(const TensorF& student, const TensorF* teacher,
                    const std::vector<int>& labels, double temperature, double weight,
                    TensorF& dlogits) {
  if (student.ndim() != 2) throw std::invalid_argument("kd_loss: student logits must be 2-d");
  const int n = student.dim(0), C = student.dim(1);
  if (int(labels.size()) != n) throw std::invalid_argument("kd_loss: labels size mismatch");
  if (teacher) {
    if (!teacher->same_shape(student))
      throw std::invalid_argument("kd_loss: teacher/student shape mismatch");
    if (temperature <= 0.0) throw std::invalid_argument("kd_loss: temperature must be positive");
    if (weight < 0.0 || weight > 1.0)
      throw std::invalid_argument("kd_loss: weight must be in [0, 1]");
  }
  const double w = teacher ? weight : 0.0;
  const double T = teacher ? temperature : 1.0;

  dlogits = TensorF({n, C});
  std::vector<double> logp(static_cast<size_t>(C)), logp_t(static_cast<size_t>(C)),
      logq(static_cast<size_t>(C));
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const int label = labels[size_t(i)];
    if (label < 0 || label >= C) throw std::invalid_argument("kd_loss: label out of range");
    const float* z = student.ptr() + int64_t(i) * C;
    float* d = dlogits.ptr() + int64_t(i) * C;

    log_softmax_row(z, C, 1.0, logp.data());
    const double ce = -logp[size_t(label)];
    double loss_i = (1.0 - w) * ce;
    for (int c = 0; c < C; ++c) {
      const double dce = std::exp(logp[size_t(c)]) - (c == label ? 1.0 : 0.0);
      d[c] = float((1.0 - w) * dce / double(n));
    }

    if (teacher && w > 0.0) {
      const float* tz = teacher->ptr() + int64_t(i) * C;
      log_softmax_row(z, C, 1.0 / T, logp_t.data());
      log_softmax_row(tz, C, 1.0 / T, logq.data());
      double kl = 0.0;
      for (int c = 0; c < C; ++c) {
        const double q = std::exp(logq[size_t(c)]);
        kl += q * (logq[size_t(c)] - logp_t[size_t(c)]);
        const double dkl = std::exp(logp_t[size_t(c)]) - q;  // d(KL)/dz * T
        d[c] += float(w * T * dkl / double(n));
      }
      loss_i += w * T * T * kl;
    }
    total += loss_i;
  }
  return total / double(n);
}

double kd_loss(const TensorF& student, const TensorF& teacher, const std::vector<int>& labels,
               double temperature, double weight) {
  TensorF scratch;
  return kd_loss_grad(student, &teacher, labels, temperature, weight, scratch);
}

std::map<std::string, std::vector<float>> read_teacher_logits(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("teacher logits: cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("teacher logits: empty file '" + path + "'");
  const auto header = split_csv(line);
  const auto& scenes = scene_labels();
  if (header.size() != scenes.size() + 1 || header[0] != "filename")
    throw std::invalid_argument("teacher logits: bad header in '" + path + "'");
  for (size_t c = 0; c < scenes.size(); ++c) {
    if (header[c + 1] != scenes[c])
      throw std::invalid_argument("teacher logits: column " + std::to_string(c + 1) +
                                  " is '" + header[c + 1] + "', expected '" + scenes[c] + "'");
  }
  std::map<std::string, std::vector<float>> table;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != scenes.size() + 1)
      throw std::invalid_argument("teacher logits: line " + std::to_string(lineno) +
                                  ": expected " + std::to_string(scenes.size() + 1) + " fields");
    std::vector<float> logits;
    logits.reserve(scenes.size());
    for (size_t c = 1; c < fields.size(); ++c) logits.push_back(std::stof(fields[c]));
    if (!table.emplace(fields[0], std::move(logits)).second)
      throw std::invalid_argument("teacher logits: duplicate filename at line " +
                                  std::to_string(lineno));
  }
  return table;
}

void write_teacher_logits(const std::map<std::string, std::vector<float>>& table,
                          const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("teacher logits: cannot write '" + path + "'");
  out << "filename";
  for (const auto& s : scene_labels()) out << "," << s;
  out << "\n";
  for (const auto& [file, logits] : table) {
    if (logits.size() != scene_labels().size())
      throw std::invalid_argument("teacher logits: '" + file + "' has " +
                                  std::to_string(logits.size()) + " logits");
    out << file;
    for (float v : logits) {
      std::ostringstream num;
      num << std::setprecision(9) << v;
      out << "," << num.str();
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("teacher logits: write failed for '" + path + "'");
}

namespace {

// Builds the augmented log-mel batch for the given clip indices. Random draws
// happen serially, in a fixed order, before any parallel work.
std::vector<MelSpectrogram> build_batch_features(const ClipStore& clips,
                                                 const std::vector<int>& idx,
                                                 const FrontendConfig& fe, const MelFilterbank& fb,
                                                 const AugmentationConfig& aug,
                                                 const ImpulseResponseBank* bank, Rng& rng) {
  const int bs = int(idx.size());
  std::vector<int64_t> rolls(size_t(bs), 0);
  std::vector<int> dir_idx(size_t(bs), -1);
  for (int i = 0; i < bs; ++i) {
    if (aug.time_roll_enabled && aug.time_roll_max > 0)
      rolls[size_t(i)] = rng.uniform_int(-aug.time_roll_max, aug.time_roll_max);
    if (aug.dir_enabled && bank && bank->size() > 0) {
      const bool use = rng.uniform() < aug.dir_p;
      const int pick = rng.uniform_int(0, int(bank->size()) - 1);
      if (use) dir_idx[size_t(i)] = pick;
    }
  }

  std::vector<MelSpectrogram> specs(static_cast<size_t>(bs));
  parallel_for_checked(bs, [&](int64_t i) {
    const auto& clip = clips.clips[size_t(idx[size_t(i)])];
    Waveform w{clip.wave, clips.sample_rate};
    if (rolls[size_t(i)] != 0) w = time_roll_by(w, rolls[size_t(i)]);
    if (dir_idx[size_t(i)] >= 0) w = dir_convolve_with(w, bank->irs[size_t(dir_idx[size_t(i)])]);
    specs[size_t(i)] = stft_logmel(w, fe, fb);
  });

  if (aug.mixstyle_enabled) freq_mixstyle(specs, aug.mixstyle, rng);
  if (aug.freq_mask_enabled && aug.freq_mask_max_width > 0) {
    for (auto& s : specs) freq_mask(s, aug.freq_mask_max_width, rng);
  }
  return specs;
}

std::vector<MelSpectrogram> plain_features(const ClipStore& clips, const FrontendConfig& fe,
                                           const MelFilterbank& fb) {
  std::vector<MelSpectrogram> specs(clips.clips.size());
  parallel_for_checked(int64_t(clips.clips.size()), [&](int64_t i) {
    const Waveform w{clips.clips[size_t(i)].wave, clips.sample_rate};
    specs[size_t(i)] = stft_logmel(w, fe, fb);
  });
  return specs;
}

TensorF batch_of(const ModelGraph& g, const std::vector<MelSpectrogram>& specs, size_t begin,
                 size_t end) {
  std::vector<const MelSpectrogram*> ptrs;
  ptrs.reserve(end - begin);
  for (size_t i = begin; i < end; ++i) ptrs.push_back(&specs[i]);
  return make_input_batch(g, ptrs);
}

}  // namespace

TrainResult train(const ModelGraph& model, const ClipStore& train_clips,
                  const ClipStore& val_clips, const FrontendConfig& fe, const TrainConfig& cfg,
                  const KDConfig* kd) {
  cfg.validate();
  const int n = int(train_clips.clips.size());
  if (n == 0) throw std::invalid_argument("train: empty training set");
  if (kd) {
    if (kd->temperature <= 0.0) throw std::invalid_argument("train: KD temperature must be > 0");
    if (kd->weight < 0.0 || kd->weight > 1.0)
      throw std::invalid_argument("train: KD weight must be in [0, 1]");
    for (const auto& c : train_clips.clips) {
      auto it = kd->teacher_logits.find(c.record.filename);
      if (it == kd->teacher_logits.end())
        throw std::invalid_argument("train: teacher logits missing clip '" + c.record.filename +
                                    "'");
      if (int(it->second.size()) != model.n_classes)
        throw std::invalid_argument("train: teacher logits for '" + c.record.filename +
                                    "' have wrong width");
    }
  }

  TrainResult result;
  result.model = model;
  ModelGraph& g = result.model;
  const MelFilterbank fb = mel_filterbank(fe);

  // Global input normalization from un-augmented training features.
  g.normalize_input = cfg.normalize_input;
  if (cfg.normalize_input) {
    const auto specs = plain_features(train_clips, fe, fb);
    double sum = 0.0, sumsq = 0.0;
    int64_t count = 0;
    for (const auto& s : specs) {
      for (float v : s.values) {
        sum += double(v);
        sumsq += double(v) * double(v);
      }
      count += int64_t(s.values.size());
    }
    const double mean = sum / double(count);
    const double var = std::max(0.0, sumsq / double(count) - mean * mean);
    g.input_mean = float(mean);
    g.input_std = float(std::max(std::sqrt(var), 1e-6));
  }

  Executor<float> exec(g);
  struct AdamState {
    std::vector<double> m, v;
  };
  std::vector<AdamState> adam(exec.params().size());
  for (size_t p = 0; p < adam.size(); ++p) {
    adam[p].m.assign(exec.params()[p].value.size(), 0.0);
    adam[p].v.assign(exec.params()[p].value.size(), 0.0);
  }

  ImpulseResponseBank bank;
  if (cfg.augment.dir_enabled) {
    bank = cfg.augment.dir_bank_path.empty()
               ? make_synthetic_ir_bank(cfg.augment.dir_synthetic_count, fe.target_rate,
                                        mix_seed(cfg.seed, hash_str("dir-bank")))
               : load_ir_bank(cfg.augment.dir_bank_path, fe.target_rate);
  }

  // Validation features are augmentation-free and reusable across epochs.
  std::vector<MelSpectrogram> val_specs;
  if (!val_clips.clips.empty()) val_specs = plain_features(val_clips, fe, fb);
  const int eval_batch = 64;
  auto validate_now = [&]() {
    if (val_specs.empty()) return 0.0;
    PredictionSet preds;
    for (size_t b = 0; b < val_specs.size(); b += size_t(eval_batch)) {
      const size_t e = std::min(val_specs.size(), b + size_t(eval_batch));
      const TensorF input = batch_of(g, val_specs, b, e);
      const TensorF logits = exec.forward(input, false);
      for (size_t i = b; i < e; ++i) {
        const float* z = logits.ptr() + int64_t(i - b) * g.n_classes;
        const int best = int(std::max_element(z, z + g.n_classes) - z);
        preds.items.push_back({val_clips.clips[i].record.filename, scene_labels()[size_t(best)],
                               {}});
      }
    }
    return macro_accuracy(preds, manifest_of(val_clips));
  };

  const int steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const int64_t total_steps = int64_t(cfg.epochs) * steps_per_epoch;
  Rng order_rng(mix_seed(cfg.seed, hash_str("train-order")));
  Rng aug_rng(mix_seed(cfg.seed, hash_str("train-augment")));

  int64_t step = 0, adam_t = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<int> perm = order_rng.permutation(n);
    double loss_sum = 0.0;
    double last_lr = 0.0;

    for (int b0 = 0; b0 < n; b0 += cfg.batch_size) {
      const int bs = std::min(cfg.batch_size, n - b0);
      std::vector<int> idx(perm.begin() + b0, perm.begin() + b0 + bs);
      auto specs =
          build_batch_features(train_clips, idx, fe, fb, cfg.augment,
                               cfg.augment.dir_enabled ? &bank : nullptr, aug_rng);

      const TensorF input = batch_of(g, specs, 0, specs.size());
      const TensorF logits = exec.forward(input, true);

      std::vector<int> labels(static_cast<size_t>(bs));
      for (int i = 0; i < bs; ++i) labels[size_t(i)] = train_clips.clips[size_t(idx[size_t(i)])].label;

      TensorF teacher;
      if (kd) {
        teacher = TensorF({bs, g.n_classes});
        for (int i = 0; i < bs; ++i) {
          const auto& row =
              kd->teacher_logits.at(train_clips.clips[size_t(idx[size_t(i)])].record.filename);
          std::copy(row.begin(), row.end(), teacher.ptr() + int64_t(i) * g.n_classes);
        }
      }

      TensorF dlogits;
      const double loss = kd_loss_grad(logits, kd ? &teacher : nullptr, labels,
                                       kd ? kd->temperature : 1.0, kd ? kd->weight : 0.0, dlogits);
      loss_sum += loss * bs;
      exec.backward(dlogits);

      const double lr = lr_at(step, total_steps, cfg);
      last_lr = lr;
      ++adam_t;
      const double bc1 = 1.0 - std::pow(cfg.beta1, double(adam_t));
      const double bc2 = 1.0 - std::pow(cfg.beta2, double(adam_t));
      for (size_t p = 0; p < exec.params().size(); ++p) {
        auto& pt = exec.params()[p];
        auto& st = adam[p];
        const double wd = pt.is_bn ? 0.0 : cfg.weight_decay;
        for (size_t k = 0; k < pt.value.size(); ++k) {
          const double gk = double(pt.grad[k]);
          st.m[k] = cfg.beta1 * st.m[k] + (1.0 - cfg.beta1) * gk;
          st.v[k] = cfg.beta2 * st.v[k] + (1.0 - cfg.beta2) * gk * gk;
          const double upd = (st.m[k] / bc1) / (std::sqrt(st.v[k] / bc2) + cfg.adam_eps);
          const double value = double(pt.value[k]);
          pt.value[k] = float(value - lr * (upd + wd * value));
        }
      }
      ++step;
    }

    result.history.train_loss.push_back(loss_sum / double(n));
    result.history.learning_rate.push_back(last_lr);
    result.history.val_accuracy.push_back(validate_now());
  }

  exec.store(g);
  return result;
}

PredictionSet predict(const ModelGraph& model, const ClipStore& clips, const FrontendConfig& fe,
                      int batch_size, bool with_probs) {
  if (batch_size < 1) throw std::invalid_argument("predict: batch_size must be >= 1");
  const MelFilterbank fb = mel_filterbank(fe);
  const auto specs = plain_features(clips, fe, fb);
  Executor<float> exec(model);
  PredictionSet preds;
  preds.items.reserve(clips.clips.size());
  for (size_t b = 0; b < specs.size(); b += size_t(batch_size)) {
    const size_t e = std::min(specs.size(), b + size_t(batch_size));
    const TensorF input = batch_of(model, specs, b, e);
    const TensorF logits = exec.forward(input, false);
    for (size_t i = b; i < e; ++i) {
      const float* z = logits.ptr() + int64_t(i - b) * model.n_classes;
      const int best = int(std::max_element(z, z + model.n_classes) - z);
      Prediction p;
      p.filename = clips.clips[i].record.filename;
      p.scene = scene_labels()[size_t(best)];
      if (with_probs) {
        std::vector<double> logp(static_cast<size_t>(model.n_classes));
        log_softmax_row(z, model.n_classes, 1.0, logp.data());
        p.probs.resize(size_t(model.n_classes));
        float sum = 0.0f;
        for (int c = 0; c < model.n_classes; ++c) {
          p.probs[size_t(c)] = float(std::exp(logp[size_t(c)]));
          sum += p.probs[size_t(c)];
        }
        // renormalize in float so serialized rows satisfy the 1e-5 contract
        for (auto& v : p.probs) v /= sum;
      }
      preds.items.push_back(std::move(p));
    }
  }
  return preds;
}

TrainConfig train_config_from_kv(const KvConfig& kv) {
  TrainConfig cfg;
  cfg.epochs = int(kv.get_int("epochs", cfg.epochs));
  cfg.batch_size = int(kv.get_int("batch_size", cfg.batch_size));
  cfg.peak_lr = kv.get_double("peak_lr", cfg.peak_lr);
  cfg.weight_decay = kv.get_double("weight_decay", cfg.weight_decay);
  cfg.warmup_fraction = kv.get_double("warmup_fraction", cfg.warmup_fraction);
  cfg.lr_floor = kv.get_double("lr_floor", cfg.lr_floor);
  cfg.beta1 = kv.get_double("beta1", cfg.beta1);
  cfg.beta2 = kv.get_double("beta2", cfg.beta2);
  cfg.adam_eps = kv.get_double("adam_eps", cfg.adam_eps);
  cfg.seed = kv.get_u64("seed", cfg.seed);
  cfg.normalize_input = kv.get_bool("normalize_input", cfg.normalize_input);
  cfg.augment.time_roll_enabled = kv.get_bool("augment.time_roll", cfg.augment.time_roll_enabled);
  cfg.augment.time_roll_max = int(kv.get_int("augment.time_roll_max", cfg.augment.time_roll_max));
  cfg.augment.mixstyle_enabled = kv.get_bool("augment.mixstyle", cfg.augment.mixstyle_enabled);
  cfg.augment.mixstyle.alpha = kv.get_double("augment.mixstyle_alpha", cfg.augment.mixstyle.alpha);
  cfg.augment.mixstyle.p = kv.get_double("augment.mixstyle_p", cfg.augment.mixstyle.p);
  cfg.augment.freq_mask_enabled = kv.get_bool("augment.freq_mask", cfg.augment.freq_mask_enabled);
  cfg.augment.freq_mask_max_width =
      int(kv.get_int("augment.freq_mask_max_width", cfg.augment.freq_mask_max_width));
  cfg.augment.dir_enabled = kv.get_bool("augment.dir", cfg.augment.dir_enabled);
  cfg.augment.dir_p = kv.get_double("augment.dir_p", cfg.augment.dir_p);
  cfg.augment.dir_bank_path = kv.get("augment.dir_bank", cfg.augment.dir_bank_path);
  cfg.augment.dir_synthetic_count =
      int(kv.get_int("augment.dir_synthetic_count", cfg.augment.dir_synthetic_count));
  cfg.validate();
  return cfg;
}

KvConfig train_config_to_kv(const TrainConfig& cfg) {
  KvConfig kv;
  auto num = [](double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
  };
  kv.set("epochs", std::to_string(cfg.epochs));
  kv.set("batch_size", std::to_string(cfg.batch_size));
  kv.set("peak_lr", num(cfg.peak_lr));
  kv.set("weight_decay", num(cfg.weight_decay));
  kv.set("warmup_fraction", num(cfg.warmup_fraction));
  kv.set("lr_floor", num(cfg.lr_floor));
  kv.set("beta1", num(cfg.beta1));
  kv.set("beta2", num(cfg.beta2));
  kv.set("adam_eps", num(cfg.adam_eps));
  kv.set("seed", std::to_string(cfg.seed));
  kv.set("normalize_input", cfg.normalize_input ? "true" : "false");
  kv.set("augment.time_roll", cfg.augment.time_roll_enabled ? "true" : "false");
  kv.set("augment.time_roll_max", std::to_string(cfg.augment.time_roll_max));
  kv.set("augment.mixstyle", cfg.augment.mixstyle_enabled ? "true" : "false");
  kv.set("augment.mixstyle_alpha", num(cfg.augment.mixstyle.alpha));
  kv.set("augment.mixstyle_p", num(cfg.augment.mixstyle.p));
  kv.set("augment.freq_mask", cfg.augment.freq_mask_enabled ? "true" : "false");
  kv.set("augment.freq_mask_max_width", std::to_string(cfg.augment.freq_mask_max_width));
  kv.set("augment.dir", cfg.augment.dir_enabled ? "true" : "false");
  kv.set("augment.dir_p", num(cfg.augment.dir_p));
  if (!cfg.augment.dir_bank_path.empty()) kv.set("augment.dir_bank", cfg.augment.dir_bank_path);
  kv.set("augment.dir_synthetic_count", std::to_string(cfg.augment.dir_synthetic_count));
  return kv;
}

}  // namespace asckit

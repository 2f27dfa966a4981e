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
#include <map>
#include <string>
#include <vector>

#include "asckit/augment.hpp"
#include "asckit/frontend.hpp"
#include "asckit/kvconfig.hpp"
#include "asckit/manifest.hpp"
#include "asckit/model.hpp"
#include "asckit/network.hpp"
#include "asckit/scorer.hpp"

namespace asckit {

struct AugmentationConfig {
  bool time_roll_enabled = true;
  int time_roll_max = 3200;  // samples at the frontend target rate
  bool mixstyle_enabled = true;
  FreqMixStyleConfig mixstyle;
  bool freq_mask_enabled = true;
  int freq_mask_max_width = 48;  // mel bins
  bool dir_enabled = false;
  double dir_p = 0.6;
  std::string dir_bank_path;  // empty selects a built-in synthetic bank
  int dir_synthetic_count = 8;
};

struct TrainConfig {
  int epochs = 150;
  int batch_size = 256;
  double peak_lr = 0.005;
  double weight_decay = 1e-4;
  double warmup_fraction = 0.1;  // share of total steps
  double lr_floor = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  uint64_t seed = 0;
  bool normalize_input = true;
  AugmentationConfig augment;

  void validate() const;  // epochs >= 0, batch_size >= 1, rates positive
};

struct KDConfig {
  std::map<std::string, std::vector<float>> teacher_logits;  // filename -> logits
  double temperature = 2.0;
  double weight = 0.5;  // in [0, 1]
};

struct TrainHistory {
  std::vector<double> train_loss;    // per epoch
  std::vector<double> val_accuracy;  // per epoch; 0 when no validation set
  std::vector<double> learning_rate; // lr at the last step of each epoch
};

struct TrainResult {
  ModelGraph model;  // fp32 master weights
  TrainHistory history;
};

// A clip with its waveform resampled to the frontend target rate.
struct LoadedClip {
  ClipRecord record;
  int label = -1;
  std::vector<float> wave;  // at FrontendConfig::target_rate
};

struct ClipStore {
  std::vector<LoadedClip> clips;
  int sample_rate = 0;
  SplitTag split_tag = SplitTag::dev_train;
};

// Reads and resamples every manifest clip under audio_root. Throws on
// missing files or unknown scene labels.
ClipStore load_clips(const Manifest& m, const std::string& audio_root, const FrontendConfig& fe);

// Keeps only the named files, in manifest order. Unknown names throw.
ClipStore filter_clips(const ClipStore& store, const std::vector<std::string>& filenames);

// Warmup steps for a run: round(warmup_fraction * total), at least 1 when the
// fraction is positive and the run is long enough to decay afterwards.
int64_t warmup_steps(int64_t total_steps, double warmup_fraction);

// Linear warmup from 0 to peak, then cosine decay to the floor at the final
// step. step counts from 0.
double lr_at(int64_t step, int64_t total_steps, const TrainConfig& cfg);

// (1-w) * CrossEntropy(student, labels) +
// w * T^2 * KL(softmax(teacher/T) || softmax(student/T)), batch-averaged.
// logits are [n, n_classes]; labels.size() == n. Throws on shape mismatch,
// T <= 0 or w outside [0, 1].
double kd_loss(const TensorF& student, const TensorF& teacher, const std::vector<int>& labels,
               double temperature, double weight);

// Same loss, also writing d(loss)/d(student logits). teacher may be null,
// which selects plain cross-entropy regardless of weight.
double kd_loss_grad(const TensorF& student, const TensorF* teacher,
                    const std::vector<int>& labels, double temperature, double weight,
                    TensorF& dlogits);

// Teacher logit table: CSV "filename" plus one column per scene label.
std::map<std::string, std::vector<float>> read_teacher_logits(const std::string& path);
void write_teacher_logits(const std::map<std::string, std::vector<float>>& table,
                          const std::string& path);

// Trains with the standard recipe: seeded shuffling, per-batch augmentation
// (time roll on the waveform, then the frontend, then Freq-MixStyle and
// frequency masking on log-mels), AdamW with decoupled weight decay
// (batchnorm parameters excluded), warmup+cosine schedule. Returns the
// final-epoch model. Deterministic given (seed, config, data).
TrainResult train(const ModelGraph& model, const ClipStore& train_clips,
                  const ClipStore& val_clips, const FrontendConfig& fe, const TrainConfig& cfg,
                  const KDConfig* kd = nullptr);

// Augmentation-free inference over a clip store.
PredictionSet predict(const ModelGraph& model, const ClipStore& clips, const FrontendConfig& fe,
                      int batch_size = 64, bool with_probs = true);

Manifest manifest_of(const ClipStore& clips);

// Flat key=value bindings (lists the known keys; unknown keys throw).
TrainConfig train_config_from_kv(const KvConfig& kv);
KvConfig train_config_to_kv(const TrainConfig& cfg);

}  // namespace asckit

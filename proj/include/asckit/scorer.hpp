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

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "asckit/manifest.hpp"

namespace asckit {

// One prediction per clip. Probabilities are optional; when present they must
// cover all classes and sum to 1 within 1e-5.
struct Prediction {
  std::string filename;
  std::string scene;
  std::vector<float> probs;
};

struct PredictionSet {
  std::vector<Prediction> items;
};

// Throws on duplicate filenames, unknown labels or malformed probabilities.
void validate_predictions(const PredictionSet& preds);

// Mean over classes with at least one ground-truth clip of per-class recall.
// Predictions must cover exactly the clips of the manifest.
double macro_accuracy(const PredictionSet& preds, const Manifest& truth);

struct BreakdownReport {
  std::string field;
  std::map<std::string, double> groups;  // group value -> macro accuracy
  // Populated for device breakdowns when both seen and unseen devices occur.
  bool has_device_gap = false;
  double seen_accuracy = 0.0;
  double unseen_accuracy = 0.0;
  double device_gap = 0.0;  // seen minus unseen
};

// field is one of "device", "scene", "city". Empty groups never appear.
BreakdownReport breakdown(const PredictionSet& preds, const Manifest& truth,
                          const std::string& field);

// Accuracy matrix over N systems x P training subsets.
struct ScoreMatrix {
  std::vector<double> fractions;          // column labels, ascending
  std::vector<std::vector<double>> acc;   // acc[n][p]
};

// Best system per subset, then mean over subsets. Requires a complete matrix
// with entries in [0, 1].
double challenge_score(const ScoreMatrix& m);

struct ScoreReport {
  double score = 0.0;
  std::vector<double> best;   // per-subset winning accuracy
  std::vector<int> winner;    // per-subset winning system index (ties: lowest)
};

ScoreReport score_report(const ScoreMatrix& m);
nlohmann::json score_report_json(const ScoreMatrix& m);

// CSV "fraction,accuracy" sorted ascending by fraction. Duplicate fractions
// are an error.
void write_subset_curve(const std::vector<std::pair<double, double>>& results,
                        const std::string& path);
std::vector<std::pair<double, double>> read_subset_curve(const std::string& path);

// CSV "filename,scene_label" with optional per-class probability columns.
void write_submission(const PredictionSet& preds, const std::string& path);
PredictionSet read_submission(const std::string& path);

}  // namespace asckit

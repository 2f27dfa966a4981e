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

#include "asckit/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace asckit {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::unordered_map<std::string, const Prediction*> index_predictions(const PredictionSet& preds) {
  std::unordered_map<std::string, const Prediction*> by_file;
  by_file.reserve(preds.items.size());
  for (const auto& p : preds.items) {
    if (!by_file.emplace(p.filename, &p).second)
      throw std::invalid_argument("predictions: duplicate filename '" + p.filename + "'");
  }
  return by_file;
}

// Macro accuracy over an arbitrary clip subset, given prediction lookup.
double macro_over(const std::vector<const ClipRecord*>& clips,
                  const std::unordered_map<std::string, const Prediction*>& by_file) {
  const int n_classes = int(scene_labels().size());
  std::vector<int64_t> total(size_t(n_classes), 0), correct(size_t(n_classes), 0);
  for (const auto* r : clips) {
    const int cls = scene_index(r->scene);
    if (cls < 0) throw std::invalid_argument("truth: unknown scene label '" + r->scene + "'");
    auto it = by_file.find(r->filename);
    if (it == by_file.end())
      throw std::invalid_argument("predictions missing clip '" + r->filename + "'");
    ++total[size_t(cls)];
    if (it->second->scene == r->scene) ++correct[size_t(cls)];
  }
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < n_classes; ++c) {
    if (total[size_t(c)] == 0) continue;
    sum += double(correct[size_t(c)]) / double(total[size_t(c)]);
    ++present;
  }
  if (present == 0) throw std::invalid_argument("macro_accuracy: no class has ground truth");
  return sum / double(present);
}

}  // namespace

void validate_predictions(const PredictionSet& preds) {
  std::unordered_set<std::string> seen;
  for (const auto& p : preds.items) {
    if (!seen.insert(p.filename).second)
      throw std::invalid_argument("predictions: duplicate filename '" + p.filename + "'");
    if (scene_index(p.scene) < 0)
      throw std::invalid_argument("predictions: unknown scene label '" + p.scene + "' for '" +
                                  p.filename + "'");
    if (p.probs.empty()) continue;
    if (p.probs.size() != scene_labels().size())
      throw std::invalid_argument("predictions: expected " +
                                  std::to_string(scene_labels().size()) +
                                  " probabilities for '" + p.filename + "', got " +
                                  std::to_string(p.probs.size()));
    double sum = 0.0;
    for (float v : p.probs) sum += double(v);
    if (std::fabs(sum - 1.0) > 1e-5)
      throw std::invalid_argument("predictions: probabilities for '" + p.filename +
                                  "' sum to " + std::to_string(sum));
  }
}

double macro_accuracy(const PredictionSet& preds, const Manifest& truth) {
  const auto by_file = index_predictions(preds);
  std::unordered_set<std::string> truth_files;
  truth_files.reserve(truth.records.size());
  std::vector<const ClipRecord*> clips;
  clips.reserve(truth.records.size());
  for (const auto& r : truth.records) {
    truth_files.insert(r.filename);
    clips.push_back(&r);
  }
  for (const auto& p : preds.items) {
    if (!truth_files.count(p.filename))
      throw std::invalid_argument("predictions contain clip '" + p.filename +
                                  "' absent from truth");
  }
  return macro_over(clips, by_file);
}

BreakdownReport breakdown(const PredictionSet& preds, const Manifest& truth,
                          const std::string& field) {
  if (field != "device" && field != "scene" && field != "city")
    throw std::invalid_argument("breakdown: unknown grouping field '" + field + "'");
  const auto by_file = index_predictions(preds);

  std::map<std::string, std::vector<const ClipRecord*>> groups;
  for (const auto& r : truth.records) {
    const std::string& key = field == "device" ? r.device : field == "scene" ? r.scene : r.city;
    groups[key].push_back(&r);
  }

  BreakdownReport rep;
  rep.field = field;
  for (const auto& [key, clips] : groups) rep.groups[key] = macro_over(clips, by_file);

  if (field == "device") {
    std::vector<const ClipRecord*> seen, unseen;
    for (const auto& r : truth.records) {
      if (dev_train_devices().count(r.device)) seen.push_back(&r);
      else unseen.push_back(&r);
    }
    if (!seen.empty() && !unseen.empty()) {
      rep.has_device_gap = true;
      rep.seen_accuracy = macro_over(seen, by_file);
      rep.unseen_accuracy = macro_over(unseen, by_file);
      rep.device_gap = rep.seen_accuracy - rep.unseen_accuracy;
    }
  }
  return rep;
}

double challenge_score(const ScoreMatrix& m) { return score_report(m).score; }

ScoreReport score_report(const ScoreMatrix& m) {
  const size_t P = m.fractions.size();
  if (P == 0) throw std::invalid_argument("challenge_score: no subsets");
  if (m.acc.empty()) throw std::invalid_argument("challenge_score: no systems");
  for (size_t n = 0; n < m.acc.size(); ++n) {
    if (m.acc[n].size() != P)
      throw std::invalid_argument("challenge_score: system " + std::to_string(n + 1) + " has " +
                                  std::to_string(m.acc[n].size()) + " entries, expected " +
                                  std::to_string(P));
    for (double v : m.acc[n]) {
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("challenge_score: accuracy " + std::to_string(v) +
                                    " outside [0, 1]");
    }
  }
  ScoreReport rep;
  rep.best.resize(P);
  rep.winner.resize(P);
  double sum = 0.0;
  for (size_t p = 0; p < P; ++p) {
    int win = 0;
    double best = m.acc[0][p];
    for (size_t n = 1; n < m.acc.size(); ++n) {
      if (m.acc[n][p] > best) {
        best = m.acc[n][p];
        win = int(n);
      }
    }
    rep.best[p] = best;
    rep.winner[p] = win;
    sum += best;
  }
  rep.score = sum / double(P);
  return rep;
}

nlohmann::json score_report_json(const ScoreMatrix& m) {
  const auto rep = score_report(m);
  nlohmann::json subsets = nlohmann::json::array();
  for (size_t p = 0; p < m.fractions.size(); ++p) {
    nlohmann::json col{{"fraction", m.fractions[p]},
                       {"best_accuracy", rep.best[p]},
                       {"winning_system", rep.winner[p] + 1}};
    nlohmann::json accs = nlohmann::json::array();
    for (const auto& row : m.acc) accs.push_back(row[p]);
    col["accuracies"] = accs;
    subsets.push_back(col);
  }
  return nlohmann::json{{"n_systems", m.acc.size()}, {"subsets", subsets}, {"score", rep.score}};
}

void write_subset_curve(const std::vector<std::pair<double, double>>& results,
                        const std::string& path) {
  if (results.empty()) throw std::invalid_argument("subset_curve: no results");
  auto rows = results;
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first == rows[i - 1].first)
      throw std::invalid_argument("subset_curve: duplicate fraction " +
                                  std::to_string(rows[i].first));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("subset_curve: cannot write '" + path + "'");
  out << "fraction,accuracy\n";
  for (const auto& [f, a] : rows) {
    std::ostringstream line;
    line << std::setprecision(6) << f << "," << std::fixed << std::setprecision(6) << a;
    out << line.str() << "\n";
  }
  if (!out) throw std::runtime_error("subset_curve: write failed for '" + path + "'");
}

std::vector<std::pair<double, double>> read_subset_curve(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("subset_curve: cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || split_csv(line) != std::vector<std::string>{"fraction", "accuracy"})
    throw std::invalid_argument("subset_curve: bad header in '" + path + "'");
  std::vector<std::pair<double, double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 2)
      throw std::invalid_argument("subset_curve: line " + std::to_string(lineno) +
                                  ": expected 2 fields");
    rows.emplace_back(std::stod(fields[0]), std::stod(fields[1]));
  }
  return rows;
}

void write_submission(const PredictionSet& preds, const std::string& path) {
  validate_predictions(preds);
  const bool with_probs = !preds.items.empty() && !preds.items.front().probs.empty();
  for (const auto& p : preds.items) {
    if (p.probs.empty() == with_probs)
      throw std::invalid_argument("submission: mixed rows with and without probabilities");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("submission: cannot write '" + path + "'");
  out << "filename,scene_label";
  if (with_probs)
    for (const auto& s : scene_labels()) out << ",prob_" << s;
  out << "\n";
  for (const auto& p : preds.items) {
    out << p.filename << "," << p.scene;
    for (float v : p.probs) {
      std::ostringstream num;
      num << std::setprecision(9) << v;
      out << "," << num.str();
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("submission: write failed for '" + path + "'");
}

PredictionSet read_submission(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("submission: cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("submission: empty file '" + path + "'");
  const auto header = split_csv(line);
  const size_t n_classes = scene_labels().size();
  bool with_probs = false;
  if (header.size() == 2 + n_classes) with_probs = true;
  else if (header.size() != 2)
    throw std::invalid_argument("submission: header has " + std::to_string(header.size()) +
                                " columns, expected 2 or " + std::to_string(2 + n_classes));
  if (header[0] != "filename" || header[1] != "scene_label")
    throw std::invalid_argument("submission: bad header in '" + path + "'");

  PredictionSet preds;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size())
      throw std::invalid_argument("submission: line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(header.size()) + " fields, got " +
                                  std::to_string(fields.size()));
    Prediction p;
    p.filename = fields[0];
    p.scene = fields[1];
    if (with_probs) {
      p.probs.reserve(n_classes);
      for (size_t k = 2; k < fields.size(); ++k) p.probs.push_back(std::stof(fields[k]));
    }
    preds.items.push_back(std::move(p));
  }
  validate_predictions(preds);
  return preds;
}

}  // namespace asckit

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

#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "asckit/rng.hpp"
#include "asckit/scorer.hpp"

namespace fs = std::filesystem;
using namespace asckit;

namespace {

void add_clip(Manifest& m, PredictionSet& preds, const std::string& file,
              const std::string& truth_scene, const std::string& pred_scene,
              const std::string& device = "a", const std::string& city = "city1") {
  m.records.push_back({file, truth_scene, city, device});
  preds.items.push_back({file, pred_scene, {}});
}

ScoreMatrix random_matrix(Rng& rng) {
  ScoreMatrix m;
  const int P = int(rng.uniform_int(1, 8));
  const int N = int(rng.uniform_int(1, 5));
  for (int p = 0; p < P; ++p) m.fractions.push_back(0.05 + 0.1 * p);
  for (int n = 0; n < N; ++n) {
    std::vector<double> row;
    for (int p = 0; p < P; ++p) row.push_back(rng.uniform(0.0, 1.0));
    m.acc.push_back(std::move(row));
  }
  return m;
}

double brute_force_score(const ScoreMatrix& m) {
  double sum = 0.0;
  for (size_t p = 0; p < m.fractions.size(); ++p) {
    double best = m.acc[0][p];
    for (size_t n = 1; n < m.acc.size(); ++n) best = std::max(best, m.acc[n][p]);
    sum += best;
  }
  return sum / double(m.fractions.size());
}

}  // namespace

TEST_CASE("macro accuracy fixtures") {
  Manifest m;
  PredictionSet preds;
  // airport: 3 of 4 correct; bus: 1 of 2 correct -> (0.75 + 0.5) / 2.
  add_clip(m, preds, "a1.wav", "airport", "airport");
  add_clip(m, preds, "a2.wav", "airport", "airport");
  add_clip(m, preds, "a3.wav", "airport", "airport");
  add_clip(m, preds, "a4.wav", "airport", "park");
  add_clip(m, preds, "b1.wav", "bus", "bus");
  add_clip(m, preds, "b2.wav", "bus", "tram");
  CHECK(macro_accuracy(preds, m) == doctest::Approx(0.625).epsilon(1e-12));

  // All correct is exactly 1.
  Manifest all;
  PredictionSet right;
  for (const auto& s : scene_labels()) add_clip(all, right, s + ".wav", s, s);
  CHECK(macro_accuracy(right, all) == 1.0);

  // A constant predictor on a balanced 10-class set scores 1/10.
  Manifest bal;
  PredictionSet constant;
  for (const auto& s : scene_labels())
    for (int i = 0; i < 3; ++i)
      add_clip(bal, constant, s + std::to_string(i) + ".wav", s, "park");
  CHECK(macro_accuracy(constant, bal) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("macro accuracy averages only classes with ground truth") {
  Manifest m;
  PredictionSet preds;
  add_clip(m, preds, "p1.wav", "park", "park");
  add_clip(m, preds, "p2.wav", "park", "park");
  add_clip(m, preds, "t1.wav", "tram", "bus");
  CHECK(macro_accuracy(preds, m) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("macro accuracy demands an exact clip cover") {
  Manifest m;
  PredictionSet preds;
  add_clip(m, preds, "p1.wav", "park", "park");
  PredictionSet extra = preds;
  extra.items.push_back({"ghost.wav", "park", {}});
  CHECK_THROWS_WITH_AS(macro_accuracy(extra, m), doctest::Contains("absent from truth"),
                       std::invalid_argument);

  m.records.push_back({"p2.wav", "park", "city1", "a"});
  CHECK_THROWS_WITH_AS(macro_accuracy(preds, m), doctest::Contains("missing clip"),
                       std::invalid_argument);
}

TEST_CASE("validate_predictions rejects malformed sets") {
  PredictionSet dup;
  dup.items.push_back({"x.wav", "park", {}});
  dup.items.push_back({"x.wav", "bus", {}});
  CHECK_THROWS_WITH_AS(validate_predictions(dup), doctest::Contains("duplicate"),
                       std::invalid_argument);

  PredictionSet unknown;
  unknown.items.push_back({"x.wav", "beach", {}});
  CHECK_THROWS_WITH_AS(validate_predictions(unknown), doctest::Contains("unknown scene"),
                       std::invalid_argument);

  PredictionSet badsum;
  badsum.items.push_back({"x.wav", "park", std::vector<float>(10, 0.11f)});
  CHECK_THROWS_AS(validate_predictions(badsum), std::invalid_argument);

  PredictionSet shortrow;
  shortrow.items.push_back({"x.wav", "park", {0.5f, 0.5f}});
  CHECK_THROWS_AS(validate_predictions(shortrow), std::invalid_argument);

  PredictionSet ok;
  ok.items.push_back({"x.wav", "park", std::vector<float>(10, 0.1f)});
  ok.items.push_back({"y.wav", "bus", std::vector<float>(10, 0.1f)});
  CHECK_NOTHROW(validate_predictions(ok));
}

TEST_CASE("device breakdown reports the seen/unseen gap") {
  Manifest m;
  PredictionSet preds;
  // Seen device a: all correct. Unseen device s4: all wrong.
  add_clip(m, preds, "a1.wav", "park", "park", "a");
  add_clip(m, preds, "a2.wav", "bus", "bus", "a");
  add_clip(m, preds, "u1.wav", "park", "bus", "s4");
  add_clip(m, preds, "u2.wav", "bus", "park", "s4");

  const BreakdownReport rep = breakdown(preds, m, "device");
  REQUIRE(rep.groups.size() == 2);
  CHECK(rep.groups.at("a") == doctest::Approx(1.0));
  CHECK(rep.groups.at("s4") == doctest::Approx(0.0));
  REQUIRE(rep.has_device_gap);
  CHECK(rep.seen_accuracy == doctest::Approx(1.0));
  CHECK(rep.unseen_accuracy == doctest::Approx(0.0));
  CHECK(rep.device_gap == doctest::Approx(1.0));
  CHECK(rep.unseen_accuracy < rep.seen_accuracy);

  // A single-device manifest reduces to plain macro accuracy, no gap.
  Manifest single;
  PredictionSet sp;
  add_clip(single, sp, "s1.wav", "park", "park", "b");
  add_clip(single, sp, "s2.wav", "bus", "park", "b");
  const BreakdownReport one = breakdown(sp, single, "device");
  REQUIRE(one.groups.size() == 1);
  CHECK(one.groups.at("b") == doctest::Approx(macro_accuracy(sp, single)));
  CHECK_FALSE(one.has_device_gap);

  const BreakdownReport cities = breakdown(preds, m, "city");
  CHECK(cities.groups.count("city1") == 1);
  CHECK_FALSE(cities.has_device_gap);

  const BreakdownReport scenes = breakdown(preds, m, "scene");
  CHECK(scenes.groups.size() == 2);

  CHECK_THROWS_WITH_AS(breakdown(preds, m, "country"), doctest::Contains("unknown grouping"),
                       std::invalid_argument);
}

TEST_CASE("challenge score fixtures") {
  ScoreMatrix constant;
  constant.fractions = {0.05, 0.10, 0.25, 0.50, 1.00};
  constant.acc = {{0.507, 0.507, 0.507, 0.507, 0.507}};
  CHECK(challenge_score(constant) == doctest::Approx(0.507).epsilon(1e-12));

  ScoreMatrix two;
  two.fractions = {0.05, 0.10, 0.25, 0.50, 1.00};
  two.acc = {{0.40, 0.45, 0.50, 0.55, 0.60}, {0.45, 0.44, 0.52, 0.50, 0.58}};
  CHECK(challenge_score(two) == doctest::Approx(0.514).epsilon(1e-12));

  const ScoreReport rep = score_report(two);
  CHECK(rep.best == std::vector<double>{0.45, 0.45, 0.52, 0.55, 0.60});
  CHECK(rep.winner == std::vector<int>{1, 0, 1, 0, 0});
}

TEST_CASE("ties go to the lowest system index") {
  ScoreMatrix m;
  m.fractions = {0.5, 1.0};
  m.acc = {{0.5, 0.5}, {0.5, 0.6}};
  const ScoreReport rep = score_report(m);
  CHECK(rep.winner == std::vector<int>{0, 1});

  const nlohmann::json j = score_report_json(m);
  CHECK(j.at("n_systems") == 2);
  CHECK(j.at("score") == doctest::Approx(0.55));
  CHECK(j.at("subsets")[0].at("winning_system") == 1);  // 1-based in reports
  CHECK(j.at("subsets")[1].at("winning_system") == 2);
}

TEST_CASE("challenge score matches a brute-force oracle") {
  Rng rng(4242);
  for (int trial = 0; trial < 500; ++trial) {
    const ScoreMatrix m = random_matrix(rng);
    const double got = challenge_score(m);
    CHECK(got == brute_force_score(m));

    // Appending one more system can only help.
    ScoreMatrix more = m;
    std::vector<double> row;
    for (size_t p = 0; p < m.fractions.size(); ++p) row.push_back(rng.uniform(0.0, 1.0));
    more.acc.push_back(std::move(row));
    CHECK(challenge_score(more) >= got);
  }
}

TEST_CASE("challenge score validates its matrix") {
  ScoreMatrix empty;
  CHECK_THROWS_AS(challenge_score(empty), std::invalid_argument);

  ScoreMatrix nosys;
  nosys.fractions = {0.5};
  CHECK_THROWS_AS(challenge_score(nosys), std::invalid_argument);

  ScoreMatrix ragged;
  ragged.fractions = {0.5, 1.0};
  ragged.acc = {{0.4, 0.5}, {0.6}};
  CHECK_THROWS_WITH_AS(challenge_score(ragged), doctest::Contains("expected 2"),
                       std::invalid_argument);

  ScoreMatrix range;
  range.fractions = {0.5};
  range.acc = {{1.2}};
  CHECK_THROWS_WITH_AS(challenge_score(range), doctest::Contains("outside [0, 1]"),
                       std::invalid_argument);
}

TEST_CASE("subset curves are written ascending and round trip") {
  const auto dir = fs::temp_directory_path() / "asckit-curve";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string path = (dir / "curve.csv").string();

  write_subset_curve({{1.0, 0.5699}, {0.05, 0.4240}}, path);
  std::ifstream in(path);
  std::string header, first, second;
  REQUIRE(std::getline(in, header));
  REQUIRE(std::getline(in, first));
  REQUIRE(std::getline(in, second));
  CHECK(header == "fraction,accuracy");
  CHECK(first == "0.05,0.424000");
  CHECK(second == "1,0.569900");

  const auto rows = read_subset_curve(path);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].first == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(rows[0].second == doctest::Approx(0.4240).epsilon(1e-9));
  CHECK(rows[1].first == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rows[1].second == doctest::Approx(0.5699).epsilon(1e-9));

  write_subset_curve({{0.25, 0.5}}, (dir / "single.csv").string());
  CHECK(read_subset_curve((dir / "single.csv").string()).size() == 1);

  CHECK_THROWS_WITH_AS(write_subset_curve({{0.5, 0.4}, {0.5, 0.6}}, path),
                       doctest::Contains("duplicate fraction"), std::invalid_argument);
  CHECK_THROWS_AS(write_subset_curve({}, path), std::invalid_argument);

  std::ofstream bad((dir / "bad.csv").string());
  bad << "frac,acc\n0.5,0.4\n";
  bad.close();
  CHECK_THROWS_AS(read_subset_curve((dir / "bad.csv").string()), std::invalid_argument);
  CHECK_THROWS_AS(read_subset_curve((dir / "absent.csv").string()), std::runtime_error);
}

TEST_CASE("submissions round trip") {
  const auto dir = fs::temp_directory_path() / "asckit-subm";
  fs::remove_all(dir);
  fs::create_directories(dir);

  PredictionSet plain;
  plain.items.push_back({"a.wav", "park", {}});
  plain.items.push_back({"b.wav", "street_traffic", {}});
  const std::string p1 = (dir / "plain.csv").string();
  write_submission(plain, p1);
  const PredictionSet back = read_submission(p1);
  REQUIRE(back.items.size() == 2);
  CHECK(back.items[0].filename == "a.wav");
  CHECK(back.items[0].scene == "park");
  CHECK(back.items[1].scene == "street_traffic");
  CHECK(back.items[0].probs.empty());

  PredictionSet probs = plain;
  for (auto& p : probs.items) {
    p.probs.assign(10, 0.05f);
    p.probs[3] = 0.55f;
  }
  const std::string p2 = (dir / "probs.csv").string();
  write_submission(probs, p2);
  const PredictionSet back2 = read_submission(p2);
  REQUIRE(back2.items.size() == 2);
  for (const auto& p : back2.items) {
    REQUIRE(p.probs.size() == 10);
    CHECK(p.probs[3] == doctest::Approx(0.55f).epsilon(1e-6));
  }

  PredictionSet mixed = probs;
  mixed.items[1].probs.clear();
  CHECK_THROWS_WITH_AS(write_submission(mixed, (dir / "mixed.csv").string()),
                       doctest::Contains("mixed rows"), std::invalid_argument);

  std::ofstream bad((dir / "bad.csv").string());
  bad << "filename,scene_label\nx.wav,beach\n";
  bad.close();
  CHECK_THROWS_WITH_AS(read_submission((dir / "bad.csv").string()),
                       doctest::Contains("unknown scene"), std::invalid_argument);

  std::ofstream badhdr((dir / "badhdr.csv").string());
  badhdr << "file,scene\n";
  badhdr.close();
  CHECK_THROWS_AS(read_submission((dir / "badhdr.csv").string()), std::invalid_argument);
}

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

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "asckit/manifest.hpp"
#include "asckit/model.hpp"
#include "asckit/scorer.hpp"

namespace fs = std::filesystem;
using namespace asckit;

namespace {

struct CmdResult {
  int status = -1;
  std::string output;  // stdout and stderr combined
};

CmdResult run_cli(const std::string& args) {
  const std::string cmd = std::string(ASCKIT_CLI_PATH) + " " + args + " 2>&1";
  CmdResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return res;
  char buf[4096];
  while (size_t n = fread(buf, 1, sizeof(buf), pipe)) res.output.append(buf, n);
  const int rc = pclose(pipe);
  res.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return res;
}

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "asckit-cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Shared synthetic corpus: 10 scenes x 9 devices x 2 clips, one city.
const fs::path& corpus_dir() {
  static const fs::path dir = [] {
    const fs::path d = work_dir() / "corpus";
    const CmdResult r =
        run_cli("synth --out " + d.string() + " --clips 2 --cities 1 --seed 3");
    REQUIRE(r.status == 0);
    REQUIRE(r.output.find("wrote 180 clips") != std::string::npos);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int line_count(const fs::path& p) {
  const std::string text = slurp(p);
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("version flag") {
  const CmdResult r = run_cli("--version");
  CHECK(r.status == 0);
  CHECK(r.output.find("asckit 0.1.0") != std::string::npos);
}

TEST_CASE("a subcommand is required") {
  const CmdResult r = run_cli("");
  CHECK(r.status != 0);
}

TEST_CASE("profile reports the default baseline under the limits") {
  const fs::path json_path = work_dir() / "profile.json";
  const CmdResult r = run_cli("profile --json " + json_path.string());
  REQUIRE(r.status == 0);
  CHECK(r.output.find("61,148") != std::string::npos);
  CHECK(r.output.find("26,951,680") != std::string::npos);
  CHECK(r.output.find("pass") != std::string::npos);

  const nlohmann::json j = nlohmann::json::parse(slurp(json_path));
  CHECK(j.at("total_params") == 61148);
  CHECK(j.at("total_macs") == 26951680);
  CHECK(j.at("param_memory_bytes") == 122296);
  CHECK(j.at("limits").at("memory_ok") == true);
  CHECK(j.at("limits").at("macs_ok") == true);
  CHECK(j.at("limits").at("ok") == true);
}

TEST_CASE("profile --enforce fails a tightened limit") {
  const CmdResult r = run_cli("profile --enforce --mac-limit 1000");
  CHECK(r.status == 1);
  CHECK(r.output.find("\"error\"") != std::string::npos);
  CHECK(r.output.find("\"profile\"") != std::string::npos);
  CHECK(r.output.find("limits exceeded") != std::string::npos);
}

TEST_CASE("synth writes a valid manifest and is seed-deterministic") {
  const Manifest m = parse_manifest((corpus_dir() / "manifest.tsv").string());
  REQUIRE(m.records.size() == 180);
  CHECK(validate_manifest(m, SplitTag::evaluation).empty());
  CHECK(fs::exists(corpus_dir() / "synth_config.json"));
  for (size_t i = 0; i < 3; ++i) CHECK(fs::exists(corpus_dir() / m.records[i].filename));

  const fs::path again = work_dir() / "corpus-again";
  REQUIRE(run_cli("synth --out " + again.string() + " --clips 2 --cities 1 --seed 3").status == 0);
  CHECK(slurp(again / "manifest.tsv") == slurp(corpus_dir() / "manifest.tsv"));
  CHECK(slurp(again / m.records[0].filename) == slurp(corpus_dir() / m.records[0].filename));

  const fs::path other = work_dir() / "corpus-other";
  REQUIRE(run_cli("synth --out " + other.string() + " --clips 2 --cities 1 --seed 4").status == 0);
  CHECK(slurp(other / "manifest.tsv") == slurp(corpus_dir() / "manifest.tsv"));  // same names
  CHECK(slurp(other / m.records[0].filename) != slurp(corpus_dir() / m.records[0].filename));
}

TEST_CASE("subsets emits the nested split files and a stratification report") {
  const fs::path out = work_dir() / "subsets";
  const CmdResult r = run_cli("subsets --manifest " + (corpus_dir() / "manifest.tsv").string() +
                              " --out " + out.string() + " --seed 5");
  REQUIRE(r.status == 0);
  for (const char* name : {"split5.csv", "split10.csv", "split25.csv", "split50.csv",
                           "split100.csv", "stratification.csv"})
    CHECK(fs::exists(out / name));
  CHECK(line_count(out / "split100.csv") == 181);  // header + every clip
  CHECK(line_count(out / "split50.csv") == 91);    // strata of 2 keep 1 each
  CHECK(slurp(out / "split100.csv").rfind("filename\n", 0) == 0);
  CHECK(slurp(out / "stratification.csv").rfind("fraction,field,value", 0) == 0);
  CHECK(r.output.find("split100.csv") != std::string::npos);
}

TEST_CASE("train exports a checkpoint and a history") {
  const fs::path out = work_dir() / "run";
  const CmdResult r = run_cli(
      "train --out " + out.string() + " --audio-root " + corpus_dir().string() +
      " --manifest " + (corpus_dir() / "manifest.tsv").string() +
      " --epochs 1 --batch_size 32 --seed 1");
  REQUIRE(r.status == 0);
  CHECK(r.output.find("trained 180 clips") != std::string::npos);
  CHECK(r.output.find("checkpoint:") != std::string::npos);
  REQUIRE(fs::exists(out / "model.ckpt"));
  CHECK(fs::exists(out / "train_config.txt"));
  REQUIRE(fs::exists(out / "history.csv"));
  CHECK(line_count(out / "history.csv") == 2);
  CHECK(slurp(out / "history.csv").rfind("epoch,train_loss,val_accuracy,learning_rate", 0) == 0);

  const ModelGraph g = load_checkpoint((out / "model.ckpt").string());
  CHECK(g.precision_bits == 16);
  CHECK(g.nodes.size() > 10);
  CHECK(g.frontend.n_mels == 256);
  CHECK(g.input_shape == Shape3{1, 256, 63});
}

TEST_CASE("train rejects a subset naming a missing clip") {
  const fs::path subset = work_dir() / "ghost.csv";
  std::ofstream(subset) << "filename\naudio/ghost-city1-0000-a.wav\n";
  const CmdResult r = run_cli(
      "train --out " + (work_dir() / "run-ghost").string() + " --audio-root " +
      corpus_dir().string() + " --manifest " + (corpus_dir() / "manifest.tsv").string() +
      " --subset " + subset.string() + " --epochs 1");
  CHECK(r.status == 1);
  CHECK(r.output.find("\"error\"") != std::string::npos);
  CHECK(r.output.find("\"train\"") != std::string::npos);
  CHECK(r.output.find("ghost") != std::string::npos);
}

TEST_CASE("train rejects unknown config keys") {
  const CmdResult r = run_cli("train --out x --manifest m.tsv --bogus_key 1");
  CHECK(r.status == 1);
  CHECK(r.output.find("\"error\"") != std::string::npos);
  CHECK(r.output.find("bogus_key") != std::string::npos);
}

TEST_CASE("eval writes predictions and metrics") {
  const fs::path out = work_dir() / "eval";
  const CmdResult r = run_cli(
      "eval --checkpoint " + (work_dir() / "run" / "model.ckpt").string() + " --manifest " +
      (corpus_dir() / "manifest.tsv").string() + " --audio-root " + corpus_dir().string() +
      " --out " + out.string());
  REQUIRE(r.status == 0);
  CHECK(r.output.find("macro accuracy:") != std::string::npos);
  REQUIRE(fs::exists(out / "predictions.csv"));
  REQUIRE(fs::exists(out / "metrics.json"));

  const PredictionSet preds = read_submission((out / "predictions.csv").string());
  CHECK(preds.items.size() == 180);

  const nlohmann::json metrics = nlohmann::json::parse(slurp(out / "metrics.json"));
  const double acc = metrics.at("macro_accuracy").get<double>();
  CHECK(acc >= 0.0);
  CHECK(acc <= 1.0);
  CHECK(metrics.at("n_clips") == 180);
  CHECK(metrics.at("breakdown").at("device").contains("a"));
  CHECK(metrics.at("breakdown").at("scene").size() == 10);
  // The corpus spans seen and held-out devices, so the gap is reported.
  CHECK(metrics.contains("device_gap"));
}

TEST_CASE("score applies best-then-mean and caps submissions at three systems") {
  const fs::path table = work_dir() / "table.csv";
  std::ofstream(table) << "system,0.05,0.1,0.25,0.5,1\n"
                       << "baseline,0.507,0.507,0.507,0.507,0.507\n";
  const fs::path report = work_dir() / "score.json";
  const CmdResult r =
      run_cli("score --table " + table.string() + " --out " + report.string());
  REQUIRE(r.status == 0);
  CHECK(r.output.find("challenge score: 0.5070") != std::string::npos);
  const nlohmann::json j = nlohmann::json::parse(slurp(report));
  CHECK(j.at("score").get<double>() == doctest::Approx(0.507));
  CHECK(j.at("n_systems") == 1);

  const fs::path big = work_dir() / "table4.csv";
  std::ofstream(big) << "system,0.5\ns1,0.4\ns2,0.4\ns3,0.4\ns4,0.4\n";
  const CmdResult r4 = run_cli("score --table " + big.string());
  CHECK(r4.status == 1);
  CHECK(r4.output.find("at most 3 systems") != std::string::npos);
}

TEST_CASE("curve sorts results ascending by fraction") {
  const fs::path results = work_dir() / "results.csv";
  std::ofstream(results) << "fraction,accuracy\n1,0.5699\n0.05,0.424\n";
  const fs::path out = work_dir() / "curve.csv";
  const CmdResult r = run_cli("curve --results " + results.string() + " --out " + out.string());
  REQUIRE(r.status == 0);
  const std::string text = slurp(out);
  CHECK(text.rfind("fraction,accuracy\n0.05,", 0) == 0);

  const CmdResult missing = run_cli("curve --out " + out.string());
  CHECK(missing.status != 0);
}

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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "asckit/kvconfig.hpp"
#include "asckit/manifest.hpp"
#include "asckit/model.hpp"
#include "asckit/profiler.hpp"
#include "asckit/scorer.hpp"
#include "asckit/subsets.hpp"
#include "asckit/synth.hpp"
#include "asckit/trainer.hpp"

namespace fs = std::filesystem;
using namespace asckit;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(s);
  while (std::getline(ss, field, ',')) {
    if (!field.empty()) out.push_back(field);
  }
  return out;
}

// Remaining tokens as --key value or --key=value override pairs.
std::vector<std::pair<std::string, std::string>> parse_overrides(
    const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (size_t i = 0; i < extras.size();) {
    std::string key = extras[i];
    if (key.rfind("--", 0) != 0)
      throw std::invalid_argument("unexpected argument '" + key + "'");
    key = key.substr(2);
    const size_t eq = key.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(key.substr(0, eq), key.substr(eq + 1));
      ++i;
    } else {
      if (i + 1 >= extras.size())
        throw std::invalid_argument("missing value for override --" + key);
      out.emplace_back(key, extras[i + 1]);
      i += 2;
    }
  }
  return out;
}

FrontendConfig frontend_from_kv(const KvConfig& kv) {
  FrontendConfig fe;
  fe.target_rate = int(kv.get_int("frontend.target_rate", fe.target_rate));
  fe.fft_size = int(kv.get_int("frontend.fft_size", fe.fft_size));
  fe.window_ms = kv.get_double("frontend.window_ms", fe.window_ms);
  fe.hop_samples = int(kv.get_int("frontend.hop_samples", fe.hop_samples));
  fe.n_mels = int(kv.get_int("frontend.n_mels", fe.n_mels));
  fe.log_floor = kv.get_double("frontend.log_floor", fe.log_floor);
  return fe;
}

void frontend_to_kv(const FrontendConfig& fe, KvConfig& kv) {
  auto num = [](double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
  };
  kv.set("frontend.target_rate", std::to_string(fe.target_rate));
  kv.set("frontend.fft_size", std::to_string(fe.fft_size));
  kv.set("frontend.window_ms", num(fe.window_ms));
  kv.set("frontend.hop_samples", std::to_string(fe.hop_samples));
  kv.set("frontend.n_mels", std::to_string(fe.n_mels));
  kv.set("frontend.log_floor", num(fe.log_floor));
}

// Precedence: config value, then flag, then ASCKIT_AUDIO_ROOT, then the
// manifest's parent directory.
std::string resolve_audio_root(const KvConfig& kv, const std::string& flag,
                               const std::string& manifest_path) {
  std::string root = kv.get("audio_root", "");
  if (!flag.empty()) root = flag;
  if (const char* env = std::getenv("ASCKIT_AUDIO_ROOT"); env && *env) root = env;
  if (root.empty()) root = fs::path(manifest_path).parent_path().string();
  if (root.empty()) root = ".";
  return root;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

Manifest read_manifest_checked(const std::string& path, const std::string& split) {
  Manifest m = parse_manifest(path);
  m.split_tag = parse_split_tag(split);
  const auto violations = validate_manifest(m, m.split_tag);
  if (!violations.empty()) {
    std::ostringstream os;
    os << "manifest '" << path << "' has " << violations.size() << " violation(s): ";
    for (size_t i = 0; i < violations.size() && i < 3; ++i) {
      if (i) os << "; ";
      os << "row " << violations[i].row << ": " << violations[i].message;
    }
    throw std::invalid_argument(os.str());
  }
  return m;
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir, uint64_t seed,
              bool seed_set, int clips, int cities) {
  SyntheticCorpusSpec spec;
  if (!spec_path.empty()) spec = load_corpus_spec(spec_path);
  if (seed_set) spec.seed = seed;
  if (clips > 0) spec.clips_per_scene_device = clips;
  if (cities > 0) spec.cities = cities;
  spec.validate();
  const Manifest m = generate_synthetic_corpus(spec, out_dir);
  write_text((fs::path(out_dir) / "synth_config.json").string(), corpus_spec_to_json(spec) + "\n");
  std::cout << "wrote " << m.records.size() << " clips under " << out_dir << "\n"
            << "manifest: " << (fs::path(out_dir) / "manifest.tsv").string() << "\n";
  return 0;
}

int cmd_subsets(const std::string& manifest_path, const std::string& out_dir, uint64_t seed,
                const std::string& fractions_arg) {
  const Manifest m = parse_manifest(manifest_path);
  std::vector<double> fractions = default_fractions();
  if (!fractions_arg.empty()) {
    fractions.clear();
    for (const auto& f : split_list(fractions_arg)) fractions.push_back(std::stod(f));
  }
  fs::create_directories(out_dir);
  const SubsetFamily family = make_nested_subsets(m, fractions, seed);
  const auto files = write_subset_files(family, out_dir);

  std::ostringstream strat;
  strat << "fraction,field,value,share_subset,share_full,deviation_pp\n";
  for (const auto& row : stratification_report(family, m)) {
    strat << std::setprecision(6) << row.fraction << "," << row.field << "," << row.value << ","
          << std::fixed << std::setprecision(6) << row.share_subset << "," << row.share_full
          << "," << row.deviation_pp << "\n";
    strat.unsetf(std::ios::fixed);
  }
  write_text((fs::path(out_dir) / "stratification.csv").string(), strat.str());

  KvConfig snap;
  snap.set("manifest", manifest_path);
  snap.set("seed", std::to_string(seed));
  {
    std::ostringstream fr;
    for (size_t i = 0; i < fractions.size(); ++i) fr << (i ? "," : "") << fractions[i];
    snap.set("fractions", fr.str());
  }
  write_kv_file(snap, (fs::path(out_dir) / "subsets_config.txt").string());

  for (const auto& f : files) std::cout << f << "\n";
  std::cout << "stratification report: " << (fs::path(out_dir) / "stratification.csv").string()
            << "\n";
  return 0;
}

const std::set<std::string>& train_allowed_keys() {
  static const std::set<std::string> keys = {
      "epochs", "batch_size", "peak_lr", "weight_decay", "warmup_fraction", "lr_floor", "beta1",
      "beta2", "adam_eps", "seed", "normalize_input", "augment.time_roll",
      "augment.time_roll_max", "augment.mixstyle", "augment.mixstyle_alpha", "augment.mixstyle_p",
      "augment.freq_mask", "augment.freq_mask_max_width", "augment.dir", "augment.dir_p",
      "augment.dir_bank", "augment.dir_synthetic_count", "frontend.target_rate",
      "frontend.fft_size", "frontend.window_ms", "frontend.hop_samples", "frontend.n_mels",
      "frontend.log_floor", "manifest", "split", "subset", "val_manifest", "audio_root",
      "out_dir", "holdout", "test_fraction", "kd.teacher", "kd.temperature", "kd.weight",
      "model.seed", "model.base_channels", "model.channels_multiplier", "model.expansion_rate",
      "export_fp16"};
  return keys;
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& extras,
              const std::string& audio_root_flag, const std::string& out_flag) {
  KvConfig kv;
  if (!config_path.empty()) kv = parse_kv_file(config_path);
  apply_overrides(kv, parse_overrides(extras));
  if (!out_flag.empty()) kv.set("out_dir", out_flag);
  require_known(kv, train_allowed_keys());

  const std::string manifest_path = kv.get("manifest", "");
  if (manifest_path.empty()) throw std::invalid_argument("train: 'manifest' is required");
  const std::string out_dir = kv.get("out_dir", "");
  if (out_dir.empty()) throw std::invalid_argument("train: 'out_dir' is required");

  const TrainConfig cfg = train_config_from_kv(kv);
  const FrontendConfig fe = frontend_from_kv(kv);
  const std::string audio_root = resolve_audio_root(kv, audio_root_flag, manifest_path);

  Manifest m = read_manifest_checked(manifest_path, kv.get("split", "evaluation"));

  Manifest train_m = m, holdout_m;
  bool have_holdout = false;
  const std::string holdout = kv.get("holdout", "");
  if (!holdout.empty()) {
    std::set<std::string> devices;
    for (const auto& d : split_list(holdout)) devices.insert(normalize_device(d));
    const auto parts =
        make_device_split(m, devices, kv.get_double("test_fraction", 0.1), cfg.seed);
    train_m = parts.first;
    holdout_m = parts.second;
    have_holdout = true;
  }

  ClipStore store = load_clips(train_m, audio_root, fe);
  const std::string subset = kv.get("subset", "");
  if (!subset.empty()) store = filter_clips(store, read_subset_file(subset, train_m));

  ClipStore val_store;
  const std::string val_path = kv.get("val_manifest", "");
  if (!val_path.empty()) {
    const Manifest vm = read_manifest_checked(val_path, kv.get("split", "evaluation"));
    val_store = load_clips(vm, audio_root, fe);
  } else if (have_holdout) {
    val_store = load_clips(holdout_m, audio_root, fe);
  }

  KDConfig kd;
  const bool use_kd = kv.has("kd.teacher");
  if (use_kd) {
    kd.teacher_logits = read_teacher_logits(kv.get("kd.teacher", ""));
    kd.temperature = kv.get_double("kd.temperature", kd.temperature);
    kd.weight = kv.get_double("kd.weight", kd.weight);
  }

  BaselineConfig bcfg;
  bcfg.base_channels = int(kv.get_int("model.base_channels", bcfg.base_channels));
  bcfg.channels_multiplier = kv.get_double("model.channels_multiplier", bcfg.channels_multiplier);
  bcfg.expansion_rate = kv.get_double("model.expansion_rate", bcfg.expansion_rate);
  bcfg.input_shape = {1, fe.n_mels, 0};
  {
    // frame count for the configured clip length is data-dependent; derive it
    // from the first training clip
    if (store.clips.empty()) throw std::invalid_argument("train: empty training set");
    const int n_frames = 1 + int(int64_t(store.clips.front().wave.size()) / fe.hop_samples);
    bcfg.input_shape = {1, fe.n_mels, n_frames};
  }
  const ModelGraph model =
      build_baseline(bcfg, kv.get_u64("model.seed", cfg.seed));

  const TrainResult result = train(model, store, val_store, fe, cfg, use_kd ? &kd : nullptr);

  fs::create_directories(out_dir);
  ModelGraph to_save = result.model;
  to_save.frontend = fe;
  if (kv.get_bool("export_fp16", true)) to_save = cast_fp16(to_save);
  const std::string ckpt_path = (fs::path(out_dir) / "model.ckpt").string();
  save_checkpoint(ckpt_path, to_save);

  std::ostringstream hist;
  hist << "epoch,train_loss,val_accuracy,learning_rate\n";
  for (size_t e = 0; e < result.history.train_loss.size(); ++e) {
    hist << (e + 1) << "," << std::fixed << std::setprecision(6)
         << result.history.train_loss[e] << "," << result.history.val_accuracy[e] << ","
         << std::setprecision(8) << result.history.learning_rate[e] << "\n";
    hist.unsetf(std::ios::fixed);
  }
  write_text((fs::path(out_dir) / "history.csv").string(), hist.str());

  KvConfig snap = train_config_to_kv(cfg);
  frontend_to_kv(fe, snap);
  snap.set("manifest", manifest_path);
  snap.set("audio_root", audio_root);
  snap.set("out_dir", out_dir);
  if (!subset.empty()) snap.set("subset", subset);
  if (!val_path.empty()) snap.set("val_manifest", val_path);
  if (!holdout.empty()) {
    snap.set("holdout", holdout);
    snap.set("test_fraction", std::to_string(kv.get_double("test_fraction", 0.1)));
  }
  if (use_kd) {
    snap.set("kd.teacher", kv.get("kd.teacher", ""));
    std::ostringstream t, w;
    t << kd.temperature;
    w << kd.weight;
    snap.set("kd.temperature", t.str());
    snap.set("kd.weight", w.str());
  }
  snap.set("model.seed", std::to_string(kv.get_u64("model.seed", cfg.seed)));
  snap.set("export_fp16", kv.get_bool("export_fp16", true) ? "true" : "false");
  write_kv_file(snap, (fs::path(out_dir) / "train_config.txt").string());

  std::cout << "trained " << store.clips.size() << " clips for " << cfg.epochs << " epochs\n";
  if (!result.history.train_loss.empty()) {
    std::cout << "final train loss " << std::fixed << std::setprecision(4)
              << result.history.train_loss.back();
    if (!val_store.clips.empty())
      std::cout << ", val macro accuracy " << result.history.val_accuracy.back();
    std::cout << "\n";
  }
  std::cout << "checkpoint: " << ckpt_path << "\n";
  return 0;
}

int cmd_profile(const std::string& ckpt_path, const std::string& json_path, int64_t memory_limit,
                int64_t mac_limit, bool enforce) {
  const ModelGraph g = ckpt_path.empty() ? build_baseline(BaselineConfig{}) : load_checkpoint(ckpt_path);
  const ComplexityReport rep = profile_model(g);
  const LimitCheck check = check_limits(rep, memory_limit, mac_limit);
  std::cout << report_table(rep, &check);
  if (!json_path.empty()) write_text(json_path, report_json(rep, &check).dump(2) + "\n");
  if (enforce && !check.ok()) throw std::runtime_error("complexity limits exceeded");
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& manifest_path,
             const std::string& audio_root_flag, const std::string& out_dir,
             const std::string& split, int batch) {
  const ModelGraph g = load_checkpoint(ckpt_path);
  const Manifest m = read_manifest_checked(manifest_path, split);
  const std::string audio_root = resolve_audio_root(KvConfig{}, audio_root_flag, manifest_path);
  const ClipStore clips = load_clips(m, audio_root, g.frontend);
  const PredictionSet preds = predict(g, clips, g.frontend, batch, true);
  const double acc = macro_accuracy(preds, m);

  nlohmann::json metrics{{"macro_accuracy", acc}, {"n_clips", m.records.size()}};
  for (const std::string field : {"device", "scene", "city"}) {
    const BreakdownReport rep = breakdown(preds, m, field);
    nlohmann::json groups;
    for (const auto& [k, v] : rep.groups) groups[k] = v;
    metrics["breakdown"][field] = groups;
    if (rep.has_device_gap) {
      metrics["seen_device_accuracy"] = rep.seen_accuracy;
      metrics["unseen_device_accuracy"] = rep.unseen_accuracy;
      metrics["device_gap"] = rep.device_gap;
    }
  }

  fs::create_directories(out_dir);
  write_submission(preds, (fs::path(out_dir) / "predictions.csv").string());
  write_text((fs::path(out_dir) / "metrics.json").string(), metrics.dump(2) + "\n");

  KvConfig snap;
  snap.set("checkpoint", ckpt_path);
  snap.set("manifest", manifest_path);
  snap.set("audio_root", audio_root);
  snap.set("split", split);
  snap.set("batch", std::to_string(batch));
  write_kv_file(snap, (fs::path(out_dir) / "eval_config.txt").string());

  std::cout << std::fixed << std::setprecision(4) << "macro accuracy: " << acc << "\n"
            << "predictions: " << (fs::path(out_dir) / "predictions.csv").string() << "\n"
            << "metrics: " << (fs::path(out_dir) / "metrics.json").string() << "\n";
  return 0;
}

// Accuracy table CSV: header "system" then one fraction column per subset.
ScoreMatrix read_score_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("score: cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("score: empty table '" + path + "'");
  std::vector<std::string> header = split_list(line);
  if (header.size() < 2 || header[0] != "system")
    throw std::invalid_argument("score: header must be 'system,<fraction>...'");
  ScoreMatrix m;
  for (size_t c = 1; c < header.size(); ++c) m.fractions.push_back(std::stod(header[c]));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_list(line);
    if (fields.size() != header.size())
      throw std::invalid_argument("score: row '" + line + "' has " +
                                  std::to_string(fields.size()) + " fields, expected " +
                                  std::to_string(header.size()));
    std::vector<double> row;
    for (size_t c = 1; c < fields.size(); ++c) row.push_back(std::stod(fields[c]));
    m.acc.push_back(std::move(row));
  }
  return m;
}

int cmd_score(const std::string& table_path, const std::string& out_path) {
  const ScoreMatrix m = read_score_table(table_path);
  if (m.acc.empty()) throw std::invalid_argument("score: table has no systems");
  if (m.acc.size() > 3)
    throw std::invalid_argument("score: a submission allows at most 3 systems, got " +
                                std::to_string(m.acc.size()));
  const nlohmann::json rep = score_report_json(m);
  std::cout << "challenge score: " << std::fixed << std::setprecision(4)
            << rep["score"].get<double>() << "\n";
  if (!out_path.empty()) {
    write_text(out_path, rep.dump(2) + "\n");
    KvConfig snap;
    snap.set("table", table_path);
    snap.set("out", out_path);
    write_kv_file(snap, out_path + ".config.txt");
    std::cout << "report: " << out_path << "\n";
  }
  return 0;
}

int cmd_curve(const std::string& results_path, const std::string& out_path) {
  const auto rows = read_subset_curve(results_path);
  write_subset_curve(rows, out_path);
  KvConfig snap;
  snap.set("results", results_path);
  snap.set("out", out_path);
  write_kv_file(snap, out_path + ".config.txt");
  std::cout << "curve: " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"asckit: low-complexity acoustic scene classification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "asckit 0.1.0");

  std::string active = "asckit";
  int rc = 0;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled corpus");
  std::string sy_spec, sy_out;
  uint64_t sy_seed = 0;
  int sy_clips = 0, sy_cities = 0;
  synth->add_option("--spec", sy_spec, "Corpus spec JSON (defaults built in)");
  synth->add_option("--out", sy_out, "Output directory")->required();
  synth->add_option("--seed", sy_seed, "Corpus seed override");
  synth->add_option("--clips", sy_clips, "Clips per scene x device override");
  synth->add_option("--cities", sy_cities, "City count override");
  synth->callback([&]() {
    active = "synth";
    rc = cmd_synth(sy_spec, sy_out, sy_seed, synth->count("--seed") > 0, sy_clips, sy_cities);
  });

  // subsets
  auto* subsets = app.add_subcommand("subsets", "Emit nested stratified training subsets");
  std::string su_manifest, su_out, su_fractions;
  uint64_t su_seed = 0;
  subsets->add_option("--manifest", su_manifest, "Training manifest TSV")->required();
  subsets->add_option("--out", su_out, "Output directory")->required();
  subsets->add_option("--seed", su_seed, "Sampling seed");
  subsets->add_option("--fractions", su_fractions, "Comma list, default 0.05,0.1,0.25,0.5,1");
  subsets->callback([&]() {
    active = "subsets";
    rc = cmd_subsets(su_manifest, su_out, su_seed, su_fractions);
  });

  // train
  auto* train = app.add_subcommand("train", "Train the baseline and export a checkpoint");
  std::string tr_config, tr_audio_root, tr_out;
  train->add_option("--config", tr_config, "Flat key=value config file");
  train->add_option("--audio-root", tr_audio_root, "Audio root directory");
  train->add_option("--out", tr_out, "Output directory (same as --out_dir <dir>)");
  train->allow_extras();
  train->callback([&]() {
    active = "train";
    rc = cmd_train(tr_config, train->remaining(), tr_audio_root, tr_out);
  });

  // profile
  auto* profile = app.add_subcommand("profile", "Static complexity report for a checkpoint");
  std::string pr_ckpt, pr_json;
  int64_t pr_mem = kDefaultMemoryLimitBytes, pr_mac = kDefaultMacLimit;
  bool pr_enforce = false;
  profile->add_option("--checkpoint", pr_ckpt, "Checkpoint path (omit for default baseline)");
  profile->add_option("--json", pr_json, "Write the JSON report here");
  profile->add_option("--memory-limit", pr_mem, "Parameter memory limit in bytes");
  profile->add_option("--mac-limit", pr_mac, "MAC limit per inference");
  profile->add_flag("--enforce", pr_enforce, "Exit nonzero when limits are exceeded");
  profile->callback([&]() {
    active = "profile";
    rc = cmd_profile(pr_ckpt, pr_json, pr_mem, pr_mac, pr_enforce);
  });

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest");
  std::string ev_ckpt, ev_manifest, ev_root, ev_out, ev_split = "evaluation";
  int ev_batch = 64;
  eval->add_option("--checkpoint", ev_ckpt, "Checkpoint path")->required();
  eval->add_option("--manifest", ev_manifest, "Evaluation manifest TSV")->required();
  eval->add_option("--audio-root", ev_root, "Audio root directory");
  eval->add_option("--out", ev_out, "Output directory")->required();
  eval->add_option("--split", ev_split, "Manifest split for device validation");
  eval->add_option("--batch", ev_batch, "Inference batch size");
  eval->callback([&]() {
    active = "eval";
    rc = cmd_eval(ev_ckpt, ev_manifest, ev_root, ev_out, ev_split, ev_batch);
  });

  // score
  auto* score = app.add_subcommand("score", "Aggregate system x subset accuracies");
  std::string sc_table, sc_out;
  score->add_option("--table", sc_table, "CSV: system,<fraction columns>")->required();
  score->add_option("--out", sc_out, "Write the JSON score report here");
  score->callback([&]() {
    active = "score";
    rc = cmd_score(sc_table, sc_out);
  });

  // curve
  auto* curve = app.add_subcommand("curve", "Emit the subset-performance curve CSV");
  std::string cu_results, cu_out;
  curve->add_option("--results", cu_results, "CSV fraction,accuracy (any order)")->required();
  curve->add_option("--out", cu_out, "Output CSV path")->required();
  curve->callback([&]() {
    active = "curve";
    rc = cmd_curve(cu_results, cu_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    const nlohmann::json err{{"error", {{"command", active}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return rc;
}

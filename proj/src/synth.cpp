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

#include "asckit/synth.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "asckit/rng.hpp"

namespace asckit {
namespace {

using nlohmann::json;

std::map<std::string, SceneSignature> default_signatures() {
  auto sig = [](double t1, double t2, double t3, double lo, double hi) {
    SceneSignature s;
    s.tone_hz = {t1, t2, t3};
    s.band_lo_hz = lo;
    s.band_hi_hz = hi;
    return s;
  };
  return {
      {"airport", sig(430, 1210, 2750, 1400, 2600)},
      {"bus", sig(110, 260, 640, 90, 320)},
      {"metro", sig(160, 390, 980, 450, 900)},
      {"metro_station", sig(300, 760, 1900, 800, 1600)},
      {"park", sig(520, 1560, 3900, 2800, 5200)},
      {"public_square", sig(240, 700, 1750, 1100, 2100)},
      {"shopping_mall", sig(360, 930, 2300, 600, 1250)},
      {"street_pedestrian", sig(200, 560, 1400, 1700, 3300)},
      {"street_traffic", sig(130, 320, 820, 200, 550)},
      {"tram", sig(280, 840, 2100, 3600, 6800)},
  };
}

std::map<std::string, DeviceFilter> default_filters() {
  auto flt = [](double sg, double hz, double g) {
    DeviceFilter f;
    f.shelf_gain = sg;
    f.shelf_hz = hz;
    f.gain = g;
    return f;
  };
  return {
      {"a", flt(1.00, 3000, 1.00)}, {"b", flt(0.63, 3200, 0.79)},
      {"c", flt(0.50, 3600, 1.26)}, {"d", flt(0.35, 2400, 1.10)},
      {"s1", flt(1.60, 2500, 0.56)}, {"s2", flt(0.35, 4500, 1.12)},
      {"s3", flt(2.20, 1800, 0.42)}, {"s4", flt(0.25, 5000, 1.40)},
      {"s5", flt(2.80, 1500, 0.30)}, {"s6", flt(0.18, 2800, 0.70)},
      {"s7", flt(1.90, 2100, 1.20)}, {"s8", flt(0.30, 3800, 0.50)},
      {"s9", flt(2.40, 1200, 0.90)}, {"s10", flt(0.22, 4200, 1.05)},
  };
}

std::string clip_filename(const std::string& scene, int city, int idx, const std::string& device) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d", idx);
  return "audio/" + scene + "-city" + std::to_string(city) + "-" + buf + "-" + device + ".wav";
}

// Adds a sinusoid via the two-term recurrence s[n] = 2cos(w) s[n-1] - s[n-2],
// which is much cheaper than a sin() call per sample and stable at clip length.
void add_tone(std::vector<double>& buf, double freq_hz, double phase, double amp, int rate) {
  const double w = 2.0 * M_PI * freq_hz / rate;
  const double coef = 2.0 * std::cos(w);
  double s2 = std::sin(phase - w);  // sample -1
  double s1 = std::sin(phase);      // sample 0
  buf[0] += amp * s1;
  for (size_t i = 1; i < buf.size(); ++i) {
    const double s = coef * s1 - s2;
    s2 = s1;
    s1 = s;
    buf[i] += amp * s;
  }
}

void apply_device(std::vector<double>& buf, const DeviceFilter& f, int rate) {
  if (f.shelf_gain != 1.0) {
    const double alpha = 1.0 - std::exp(-2.0 * M_PI * f.shelf_hz / rate);
    double lp = 0.0;
    for (double& x : buf) {
      lp += alpha * (x - lp);
      x = lp + f.shelf_gain * (x - lp);
    }
  }
  for (double& x : buf) x *= f.gain;
}

void split_tag_for(Manifest& m, const SyntheticCorpusSpec& spec) {
  bool beyond_test = false, beyond_train = false;
  for (const auto& d : spec.devices) {
    if (!dev_test_devices().count(d)) beyond_test = true;
    if (!dev_train_devices().count(d)) beyond_train = true;
  }
  m.split_tag = beyond_test ? SplitTag::evaluation
                            : (beyond_train ? SplitTag::dev_test : SplitTag::dev_train);
}

}  // namespace

SyntheticCorpusSpec::SyntheticCorpusSpec() {
  scenes.assign(scene_labels().begin(), scene_labels().end());
  devices = {"a", "b", "c", "s1", "s2", "s3", "s4", "s5", "s6"};
  scene_signatures = default_signatures();
  device_filters = default_filters();
}

void SyntheticCorpusSpec::validate() const {
  if (scenes.empty()) throw std::invalid_argument("corpus spec: empty scene list");
  if (devices.size() < 2) throw std::invalid_argument("corpus spec: need at least 2 devices");
  if (clips_per_scene_device < 1)
    throw std::invalid_argument("corpus spec: clips_per_scene_device must be >= 1");
  if (cities < 1) throw std::invalid_argument("corpus spec: cities must be >= 1");
  if (sample_rate <= 0) throw std::invalid_argument("corpus spec: bad sample rate");
  if (duration_sec <= 0.0) throw std::invalid_argument("corpus spec: bad duration");
  for (const auto& s : scenes) {
    if (scene_index(s) < 0) throw std::invalid_argument("corpus spec: unknown scene " + s);
    if (!scene_signatures.count(s))
      throw std::invalid_argument("corpus spec: no signature for scene " + s);
  }
  for (const auto& d : devices)
    if (!is_valid_device(d)) throw std::invalid_argument("corpus spec: unknown device " + d);
}

SyntheticCorpusSpec load_corpus_spec(const std::string& json_path) {
  std::ifstream f(json_path);
  if (!f) throw std::runtime_error("cannot open corpus spec: " + json_path);
  json j = json::parse(f);

  SyntheticCorpusSpec spec;
  if (j.contains("seed")) spec.seed = j["seed"].get<uint64_t>();
  if (j.contains("clips_per_scene_device"))
    spec.clips_per_scene_device = j["clips_per_scene_device"].get<int>();
  if (j.contains("cities")) spec.cities = j["cities"].get<int>();
  if (j.contains("sample_rate")) spec.sample_rate = j["sample_rate"].get<int>();
  if (j.contains("duration_sec")) spec.duration_sec = j["duration_sec"].get<double>();
  if (j.contains("scenes")) spec.scenes = j["scenes"].get<std::vector<std::string>>();
  if (j.contains("devices")) {
    spec.devices.clear();
    for (const auto& d : j["devices"]) spec.devices.push_back(normalize_device(d.get<std::string>()));
  }
  if (j.contains("device_filters")) {
    for (const auto& [id, v] : j["device_filters"].items()) {
      DeviceFilter& f = spec.device_filters[normalize_device(id)];
      if (v.contains("shelf_gain")) f.shelf_gain = v["shelf_gain"].get<double>();
      if (v.contains("shelf_hz")) f.shelf_hz = v["shelf_hz"].get<double>();
      if (v.contains("gain")) f.gain = v["gain"].get<double>();
    }
  }
  if (j.contains("scene_signatures")) {
    for (const auto& [name, v] : j["scene_signatures"].items()) {
      SceneSignature& s = spec.scene_signatures[name];
      if (v.contains("tone_hz")) {
        auto t = v["tone_hz"].get<std::vector<double>>();
        if (t.size() != 3) throw std::runtime_error("corpus spec: tone_hz needs 3 entries");
        s.tone_hz = {t[0], t[1], t[2]};
      }
      if (v.contains("band_lo_hz")) s.band_lo_hz = v["band_lo_hz"].get<double>();
      if (v.contains("band_hi_hz")) s.band_hi_hz = v["band_hi_hz"].get<double>();
      if (v.contains("tone_gain")) s.tone_gain = v["tone_gain"].get<double>();
      if (v.contains("band_gain")) s.band_gain = v["band_gain"].get<double>();
      if (v.contains("noise_gain")) s.noise_gain = v["noise_gain"].get<double>();
    }
  }
  spec.validate();
  return spec;
}

std::string corpus_spec_to_json(const SyntheticCorpusSpec& spec) {
  json j;
  j["seed"] = spec.seed;
  j["clips_per_scene_device"] = spec.clips_per_scene_device;
  j["cities"] = spec.cities;
  j["sample_rate"] = spec.sample_rate;
  j["duration_sec"] = spec.duration_sec;
  j["scenes"] = spec.scenes;
  j["devices"] = spec.devices;
  for (const auto& [id, f] : spec.device_filters) {
    j["device_filters"][id] = {
        {"shelf_gain", f.shelf_gain}, {"shelf_hz", f.shelf_hz}, {"gain", f.gain}};
  }
  for (const auto& [name, s] : spec.scene_signatures) {
    j["scene_signatures"][name] = {
        {"tone_hz", std::vector<double>(s.tone_hz.begin(), s.tone_hz.end())},
        {"band_lo_hz", s.band_lo_hz},
        {"band_hi_hz", s.band_hi_hz},
        {"tone_gain", s.tone_gain},
        {"band_gain", s.band_gain},
        {"noise_gain", s.noise_gain}};
  }
  return j.dump(2);
}

Manifest synth_manifest(const SyntheticCorpusSpec& spec) {
  spec.validate();
  Manifest m;
  for (const auto& scene : spec.scenes) {
    for (const auto& device : spec.devices) {
      for (int idx = 1; idx <= spec.clips_per_scene_device; ++idx) {
        const int city = (idx - 1) % spec.cities + 1;
        ClipRecord rec;
        rec.filename = clip_filename(scene, city, idx, device);
        rec.scene = scene;
        rec.city = "city" + std::to_string(city);
        rec.device = device;
        rec.duration = spec.duration_sec;
        rec.sample_rate = spec.sample_rate;
        m.records.push_back(std::move(rec));
      }
    }
  }
  split_tag_for(m, spec);
  return m;
}

Waveform synth_clip(const SyntheticCorpusSpec& spec, const std::string& scene,
                    const std::string& device, int clip_index) {
  const auto sit = spec.scene_signatures.find(scene);
  if (sit == spec.scene_signatures.end())
    throw std::invalid_argument("synth_clip: no signature for scene " + scene);
  const SceneSignature& sig = sit->second;
  const auto fit = spec.device_filters.find(device);
  const DeviceFilter filter = fit != spec.device_filters.end() ? fit->second : DeviceFilter{};

  const int n = int(std::lround(spec.duration_sec * spec.sample_rate));
  std::vector<double> buf(size_t(n), 0.0);

  // Source content is keyed on (seed, scene, clip index) only, never on the
  // device, so the same clip index across devices shares identical audio
  // before the device filter.
  Rng rng(mix_seed(mix_seed(spec.seed, hash_str(scene)), uint64_t(clip_index)));

  for (double f0 : sig.tone_hz) {
    const double detune = rng.uniform(-0.01, 0.01);
    const double phase = rng.uniform(0.0, 2.0 * M_PI);
    const double amp = sig.tone_gain * rng.uniform(0.7, 1.0);
    add_tone(buf, f0 * (1.0 + detune), phase, amp, spec.sample_rate);
  }

  constexpr int kBandComponents = 48;
  const double comp_amp = sig.band_gain / std::sqrt(double(kBandComponents));
  for (int b = 0; b < kBandComponents; ++b) {
    const double freq = rng.uniform(sig.band_lo_hz, sig.band_hi_hz);
    const double phase = rng.uniform(0.0, 2.0 * M_PI);
    const double amp = comp_amp * rng.uniform(0.8, 1.2);
    add_tone(buf, freq, phase, amp, spec.sample_rate);
  }

  const double loudness = rng.uniform(0.85, 1.15);
  for (double& x : buf) x = loudness * (x + sig.noise_gain * rng.normal());

  apply_device(buf, filter, spec.sample_rate);

  Waveform w;
  w.sample_rate = spec.sample_rate;
  w.samples.resize(buf.size());
  for (size_t i = 0; i < buf.size(); ++i) w.samples[i] = float(buf[i]);
  return w;
}

Manifest generate_synthetic_corpus(const SyntheticCorpusSpec& spec, const std::string& out_dir) {
  Manifest m = synth_manifest(spec);
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "audio");
  for (const auto& rec : m.records) {
    // Recover the clip index from the filename tail: -NNNN-device.wav.
    const size_t dev_sep = rec.filename.rfind('-');
    const size_t idx_sep = rec.filename.rfind('-', dev_sep - 1);
    const int idx = std::stoi(rec.filename.substr(idx_sep + 1, dev_sep - idx_sep - 1));
    Waveform w = synth_clip(spec, rec.scene, rec.device, idx);
    write_wav((fs::path(out_dir) / rec.filename).string(), w);
  }
  write_manifest((fs::path(out_dir) / "manifest.tsv").string(), m);
  return m;
}

}  // namespace asckit

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

#include "asckit/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace asckit {
namespace {

uint32_t rd_u32(const uint8_t* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}

uint16_t rd_u16(const uint8_t* p) { return uint16_t(p[0]) | uint16_t(p[1]) << 8; }

void wr_u32(std::vector<uint8_t>& b, uint32_t v) {
  b.push_back(uint8_t(v));
  b.push_back(uint8_t(v >> 8));
  b.push_back(uint8_t(v >> 16));
  b.push_back(uint8_t(v >> 24));
}

void wr_u16(std::vector<uint8_t>& b, uint16_t v) {
  b.push_back(uint8_t(v));
  b.push_back(uint8_t(v >> 8));
}

}  // namespace

Waveform read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open wav file: " + path);
  std::vector<uint8_t> raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (raw.size() < 44 || std::memcmp(raw.data(), "RIFF", 4) != 0 ||
      std::memcmp(raw.data() + 8, "WAVE", 4) != 0) {
    throw std::runtime_error("not a RIFF/WAVE file: " + path);
  }

  int channels = 0, bits = 0, rate = 0;
  uint16_t format = 0;
  const uint8_t* data = nullptr;
  size_t data_len = 0;

  size_t pos = 12;
  while (pos + 8 <= raw.size()) {
    const uint8_t* hdr = raw.data() + pos;
    uint32_t len = rd_u32(hdr + 4);
    const uint8_t* body = hdr + 8;
    if (pos + 8 + len > raw.size()) len = uint32_t(raw.size() - pos - 8);
    if (std::memcmp(hdr, "fmt ", 4) == 0 && len >= 16) {
      format = rd_u16(body);
      channels = rd_u16(body + 2);
      rate = int(rd_u32(body + 4));
      bits = rd_u16(body + 14);
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = body;
      data_len = len;
    }
    pos += 8 + len + (len & 1);  // chunks are word-aligned
  }

  if (format != 1) throw std::runtime_error("unsupported wav format (want PCM): " + path);
  if (channels < 1) throw std::runtime_error("wav has no channels: " + path);
  if (bits != 16 && bits != 24) throw std::runtime_error("unsupported wav bit depth: " + path);
  if (!data) throw std::runtime_error("wav has no data chunk: " + path);

  const int bytes_per = bits / 8;
  const size_t frame_bytes = size_t(bytes_per) * channels;
  const size_t frames = data_len / frame_bytes;

  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(frames);
  for (size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      const uint8_t* s = data + i * frame_bytes + size_t(c) * bytes_per;
      int32_t v;
      if (bits == 16) {
        v = int16_t(uint16_t(s[0]) | uint16_t(s[1]) << 8);
        acc += v / 32768.0;
      } else {
        v = int32_t(uint32_t(s[0]) << 8 | uint32_t(s[1]) << 16 | uint32_t(s[2]) << 24) >> 8;
        acc += v / 8388608.0;
      }
    }
    w.samples[i] = float(acc / channels);
  }
  return w;
}

void write_wav(const std::string& path, const Waveform& w) {
  if (w.sample_rate <= 0) throw std::invalid_argument("write_wav: sample_rate must be positive");
  const uint32_t data_len = uint32_t(w.samples.size() * 2);

  std::vector<uint8_t> b;
  b.reserve(44 + data_len);
  b.insert(b.end(), {'R', 'I', 'F', 'F'});
  wr_u32(b, 36 + data_len);
  b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  wr_u32(b, 16);
  wr_u16(b, 1);  // PCM
  wr_u16(b, 1);  // mono
  wr_u32(b, uint32_t(w.sample_rate));
  wr_u32(b, uint32_t(w.sample_rate) * 2);  // byte rate
  wr_u16(b, 2);                            // block align
  wr_u16(b, 16);
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  wr_u32(b, data_len);
  for (float x : w.samples) {
    float c = std::clamp(x, -1.0f, 1.0f);
    int32_t q = int32_t(std::lrint(c * 32767.0));
    q = std::clamp(q, -32768, 32767);
    wr_u16(b, uint16_t(int16_t(q)));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open wav file for writing: " + path);
  f.write(reinterpret_cast<const char*>(b.data()), std::streamsize(b.size()));
  if (!f) throw std::runtime_error("short write: " + path);
}

}  // namespace asckit

// Copyright 2026 VQASR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vqasr/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace vqasr {

namespace {

uint16_t read_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint32_t read_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

void write_u16(std::ostream& os, uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

void write_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

AudioBuffer read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open WAV file: " + path);

  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44) throw CorruptHeaderError("WAV too short: " + path);
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw CorruptHeaderError("missing RIFF/WAVE markers: " + path);
  }

  // Walk the chunk list; require an fmt chunk before data.
  std::size_t pos = 12;
  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  const unsigned char* data_ptr = nullptr;
  uint32_t data_len = 0;

  while (pos + 8 <= bytes.size()) {
    const char* cid = reinterpret_cast<const char*>(bytes.data() + pos);
    const uint32_t clen = read_u32(bytes.data() + pos + 4);
    if (pos + 8 + clen > bytes.size())
      throw CorruptHeaderError("chunk overruns file: " + path);
    if (std::memcmp(cid, "fmt ", 4) == 0) {
      if (clen < 16) throw CorruptHeaderError("fmt chunk too small: " + path);
      const unsigned char* f = bytes.data() + pos + 8;
      format = read_u16(f);
      channels = read_u16(f + 2);
      sample_rate = read_u32(f + 4);
      bits = read_u16(f + 14);
      have_fmt = true;
    } else if (std::memcmp(cid, "data", 4) == 0) {
      data_ptr = bytes.data() + pos + 8;
      data_len = clen;
    }
    pos += 8 + clen + (clen & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data_ptr == nullptr)
    throw CorruptHeaderError("missing fmt or data chunk: " + path);
  if (format != 1)
    throw UnsupportedFormatError("not linear PCM (format tag " +
                                 std::to_string(format) + "): " + path);
  if (channels != 1)
    throw UnsupportedFormatError("expected mono, got " +
                                 std::to_string(channels) +
                                 " channels: " + path);
  if (bits != 16)
    throw UnsupportedFormatError("expected 16-bit samples, got " +
                                 std::to_string(bits) + ": " + path);

  AudioBuffer buf;
  buf.sample_rate = static_cast<int>(sample_rate);
  const std::size_t n = data_len / 2;
  buf.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int16_t s = static_cast<int16_t>(read_u16(data_ptr + 2 * i));
    buf.samples[i] = static_cast<double>(s) / 32768.0;
  }
  return buf;
}

void write_wav(const std::string& path, const AudioBuffer& buf) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write WAV file: " + path);

  const uint32_t n = static_cast<uint32_t>(buf.samples.size());
  const uint32_t data_bytes = n * 2;

  out.write("RIFF", 4);
  write_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, 1);  // PCM
  write_u16(out, 1);  // mono
  write_u32(out, static_cast<uint32_t>(buf.sample_rate));
  write_u32(out, static_cast<uint32_t>(buf.sample_rate) * 2);  // byte rate
  write_u16(out, 2);   // block align
  write_u16(out, 16);  // bits
  out.write("data", 4);
  write_u32(out, data_bytes);
  for (uint32_t i = 0; i < n; ++i) {
    double v = std::clamp(buf.samples[i], -1.0, 1.0);
    long q = std::lround(v * 32768.0);
    q = std::clamp(q, -32768L, 32767L);
    write_u16(out, static_cast<uint16_t>(static_cast<int16_t>(q)));
  }
  if (!out) throw DataError("short write on WAV file: " + path);
}

std::vector<std::span<const double>> frame_signal(const AudioBuffer& buf,
                                                  const FrameSpec& spec) {
  const int win = spec.window_samples(buf.sample_rate);
  const int hop = spec.hop_samples(buf.sample_rate);
  const std::size_t count = spec.frame_count(buf.samples.size(), buf.sample_rate);
  if (count == 0)
    throw EmptySignalError("signal shorter than one analysis window (" +
                           std::to_string(buf.samples.size()) + " < " +
                           std::to_string(win) + " samples)");
  std::vector<std::span<const double>> frames;
  frames.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    frames.emplace_back(buf.samples.data() + i * hop, static_cast<std::size_t>(win));
  }
  return frames;
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open manifest: " + path);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();

  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 = t1 == std::string::npos ? std::string::npos
                                                   : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw DataError("manifest line " + std::to_string(lineno) +
                      " is not id<TAB>path<TAB>transcript: " + path);
    ManifestEntry e;
    e.id = line.substr(0, t1);
    e.audio_path = line.substr(t1 + 1, t2 - t1 - 1);
    e.transcript = line.substr(t2 + 1);
    if (!e.audio_path.empty() &&
        !std::filesystem::path(e.audio_path).is_absolute()) {
      e.audio_path = (base / e.audio_path).string();
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace vqasr

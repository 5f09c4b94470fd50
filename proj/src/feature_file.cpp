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

#include "vqasr/feature_file.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>

namespace vqasr {

static_assert(std::endian::native == std::endian::little,
              "feature file serialization assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'V', 'Q', 'F', 'B'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const std::string& path) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw CorruptHeaderError("truncated feature file: " + path);
  return v;
}

}  // namespace

void write_feature_file(const std::string& path,
                        const FeatureMatrix& features) {
  if (features.labels.size() != features.cols)
    throw ShapeMismatchError("feature file needs one label per channel");
  std::set<std::string> unique(features.labels.begin(), features.labels.end());
  if (unique.size() != features.labels.size())
    throw DataError("feature file channel labels must be unique");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write feature file: " + path);
  out.write(kMagic, 4);
  write_pod<std::uint16_t>(out, kVersion);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(features.rows));
  write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(features.cols));
  for (const std::string& label : features.labels) {
    write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(label.size()));
    out.write(label.data(), static_cast<std::streamsize>(label.size()));
  }
  for (double v : features.data) {
    const float f = static_cast<float>(v);
    write_pod<float>(out, f);
  }
  if (!out) throw DataError("short write on feature file: " + path);
}

FeatureMatrix read_feature_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open feature file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw CorruptHeaderError("bad feature file magic: " + path);
  const auto version = read_pod<std::uint16_t>(in, path);
  if (version != kVersion)
    throw UnsupportedFormatError("feature file version " +
                                 std::to_string(version) + ": " + path);
  const auto n_frames = read_pod<std::uint32_t>(in, path);
  const auto n_channels = read_pod<std::uint16_t>(in, path);

  FeatureMatrix features(n_frames, n_channels);
  features.labels.resize(n_channels);
  for (std::uint16_t c = 0; c < n_channels; ++c) {
    const auto len = read_pod<std::uint16_t>(in, path);
    features.labels[c].resize(len);
    in.read(features.labels[c].data(), len);
    if (!in) throw CorruptHeaderError("truncated label table: " + path);
  }
  for (double& v : features.data) v = read_pod<float>(in, path);

  // must be at end of payload
  in.peek();
  if (!in.eof())
    throw CorruptHeaderError("trailing bytes in feature file: " + path);
  return features;
}

}  // namespace vqasr

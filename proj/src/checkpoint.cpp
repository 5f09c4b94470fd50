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

#include "vqasr/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace vqasr {

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'V', 'Q', 'C', 'K'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const std::string& path) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw CorruptHeaderError("truncated checkpoint: " + path);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::vector<ParamRef>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write(kMagic, 4);
  write_pod<std::uint16_t>(out, kVersion);
  write_pod<std::uint16_t>(out, 0);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const ParamRef& p : params) {
    write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    write_pod<std::uint8_t>(out,
                            static_cast<std::uint8_t>(p.value->ndim()));
    for (std::size_t d : p.value->shape())
      write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  }
  for (const ParamRef& p : params) {
    out.write(reinterpret_cast<const char*>(p.value->data()),
              static_cast<std::streamsize>(p.value->size() * sizeof(double)));
  }
  if (!out) throw DataError("short write on checkpoint: " + path);
}

NamedTensors read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw CorruptHeaderError("bad checkpoint magic: " + path);
  const auto version = read_pod<std::uint16_t>(in, path);
  if (version != kVersion)
    throw UnsupportedFormatError("checkpoint version " +
                                 std::to_string(version) + ": " + path);
  read_pod<std::uint16_t>(in, path);  // reserved
  const auto n = read_pod<std::uint32_t>(in, path);

  NamedTensors tensors;
  tensors.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto name_len = read_pod<std::uint16_t>(in, path);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto ndims = read_pod<std::uint8_t>(in, path);
    std::vector<std::size_t> shape(ndims);
    for (std::uint8_t d = 0; d < ndims; ++d)
      shape[d] = read_pod<std::uint32_t>(in, path);
    tensors.emplace_back(std::move(name), Tensor(std::move(shape)));
  }
  for (auto& [name, tensor] : tensors) {
    in.read(reinterpret_cast<char*>(tensor.data()),
            static_cast<std::streamsize>(tensor.size() * sizeof(double)));
    if (!in) throw CorruptHeaderError("truncated checkpoint data: " + path);
  }
  return tensors;
}

void load_checkpoint(const std::string& path,
                     const std::vector<ParamRef>& params) {
  NamedTensors tensors = read_checkpoint(path);
  if (tensors.size() != params.size())
    throw ManifestMismatchError(
        "checkpoint has " + std::to_string(tensors.size()) +
        " parameters, model expects " + std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (tensors[i].first != params[i].name)
      throw ManifestMismatchError("parameter " + std::to_string(i) + " is '" +
                                  tensors[i].first + "', expected '" +
                                  params[i].name + "'");
    if (!tensors[i].second.same_shape(*params[i].value))
      throw ManifestMismatchError("shape mismatch for " + params[i].name +
                                  ": " + tensors[i].second.shape_str() +
                                  " vs " + params[i].value->shape_str());
    *params[i].value = std::move(tensors[i].second);
  }
}

NamedTensors average_checkpoints(const std::vector<std::string>& paths) {
  if (paths.empty()) throw NoCheckpointsError("no checkpoints to average");
  NamedTensors acc = read_checkpoint(paths[0]);
  for (std::size_t i = 1; i < paths.size(); ++i) {
    NamedTensors next = read_checkpoint(paths[i]);
    if (next.size() != acc.size())
      throw ManifestMismatchError("checkpoint " + paths[i] +
                                  " has a different parameter count");
    for (std::size_t j = 0; j < acc.size(); ++j) {
      if (next[j].first != acc[j].first ||
          !next[j].second.same_shape(acc[j].second))
        throw ManifestMismatchError("checkpoint " + paths[i] +
                                    " manifest differs at " + acc[j].first);
      add_inplace(acc[j].second, next[j].second);
    }
  }
  const double inv = 1.0 / static_cast<double>(paths.size());
  for (auto& [name, tensor] : acc) scale_inplace(tensor, inv);
  return acc;
}

}  // namespace vqasr

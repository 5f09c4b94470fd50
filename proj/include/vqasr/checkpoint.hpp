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

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vqasr/optim.hpp"
#include "vqasr/tensor.hpp"

namespace vqasr {

// Checkpoint file layout (all little-endian):
//   magic "VQCK" | u16 version=1 | u16 reserved=0 | u32 n_params
//   per parameter: u16 name_len, name bytes, u8 ndims, u32 dims[ndims]
//   then raw f64 data per parameter, in manifest order.

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

void save_checkpoint(const std::string& path,
                     const std::vector<ParamRef>& params);

NamedTensors read_checkpoint(const std::string& path);

// Loads values into an existing parameter list; names, order and shapes
// must match exactly (ManifestMismatchError otherwise).
void load_checkpoint(const std::string& path,
                     const std::vector<ParamRef>& params);

// Arithmetic mean per parameter across checkpoint files.
NamedTensors average_checkpoints(const std::vector<std::string>& paths);

}  // namespace vqasr

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

#include "vqasr/feature_matrix.hpp"

namespace vqasr {

// Feature file layout (little-endian):
//   magic "VQFB" | u16 version=1 | u32 n_frames | u16 n_channels
//   per channel: u16 label_len, label bytes (labels must be unique)
//   payload: n_frames * n_channels 32-bit floats, row-major.
void write_feature_file(const std::string& path, const FeatureMatrix& features);
FeatureMatrix read_feature_file(const std::string& path);

}  // namespace vqasr

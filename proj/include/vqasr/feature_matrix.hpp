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

#include <cstddef>
#include <string>
#include <vector>

#include "vqasr/errors.hpp"

namespace vqasr {

// Frames-by-channels matrix, the currency between pipeline stages.
// Row-major storage, one row per analysis frame. Channel labels are
// carried along so feature files stay self-describing.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;          // rows * cols, row-major
  std::vector<std::string> labels;   // size cols (may be empty when unlabeled)

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c)
      : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  // Appends the columns of `other` to the right of this matrix.
  // Row counts must agree.
  void append_columns(const FeatureMatrix& other) {
    if (rows != other.rows) {
      throw ShapeMismatchError("append_columns: row count mismatch (" +
                               std::to_string(rows) + " vs " +
                               std::to_string(other.rows) + ")");
    }
    FeatureMatrix merged(rows, cols + other.cols);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) merged.at(r, c) = at(r, c);
      for (std::size_t c = 0; c < other.cols; ++c)
        merged.at(r, cols + c) = other.at(r, c);
    }
    merged.labels = labels;
    merged.labels.insert(merged.labels.end(), other.labels.begin(),
                         other.labels.end());
    *this = std::move(merged);
  }
};

}  // namespace vqasr

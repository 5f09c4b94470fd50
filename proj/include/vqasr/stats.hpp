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

#include <vector>

#include "vqasr/errors.hpp"

namespace vqasr {

double mean(const std::vector<double>& values);

// Sample standard deviation (n-1 denominator).
double sample_std(const std::vector<double>& values);

// Standard deviation of the mean: sample_std / sqrt(n).
double stderr_of_mean(const std::vector<double>& values);

// Two-tailed Welch t-test p-value. Degenerate zero-variance pairs map to
// p = 1 when the means agree and p = 0 otherwise.
double welch_p_value(const std::vector<double>& a,
                     const std::vector<double>& b);

// 100 * (wer_a - wer_b) / wer_a.
double relative_reduction(double wer_a, double wer_b);

}  // namespace vqasr

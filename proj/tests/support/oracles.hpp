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

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "vqasr/decode.hpp"

namespace vqasr::testing {

// Independent reference implementations the production code is checked
// against. Deliberately brute-force.

// O(n^2) discrete Fourier transform.
std::vector<std::complex<double>> naive_dft(const std::vector<double>& x);

// Plain word-level Levenshtein distance (no backtrace, no error split).
std::size_t levenshtein_distance(const std::vector<std::string>& a,
                                 const std::vector<std::string>& b);

// Exhaustively enumerates every token sequence of length <= max_len that
// ends in eos and returns the one with the highest summed log-probability.
std::vector<int> exhaustive_best_sequence(const StepScorer& scorer,
                                          int vocab_size, int eos_id,
                                          int max_len);

// Central-difference derivative of f with respect to *slot.
double finite_difference(const std::function<double()>& f, double* slot,
                         double h = 1e-5);

// |a - b| / max(|a|, |b|, floor)
double relative_error(double a, double b, double floor = 1e-8);

}  // namespace vqasr::testing

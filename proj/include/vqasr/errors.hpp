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

#include <stdexcept>
#include <string>

namespace vqasr {

// Base class for all recoverable errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define VQASR_DEFINE_ERROR(NAME)                                \
  class NAME : public Error {                                   \
   public:                                                      \
    explicit NAME(const std::string& msg) : Error(msg) {}       \
  }

// I/O and data
VQASR_DEFINE_ERROR(NotFoundError);
VQASR_DEFINE_ERROR(UnsupportedFormatError);
VQASR_DEFINE_ERROR(CorruptHeaderError);
VQASR_DEFINE_ERROR(DataError);

// Signal processing
VQASR_DEFINE_ERROR(EmptySignalError);
VQASR_DEFINE_ERROR(DegenerateFilterError);
VQASR_DEFINE_ERROR(TooFewCyclesError);
VQASR_DEFINE_ERROR(ZeroAmplitudeError);
VQASR_DEFINE_ERROR(TooShortError);

// Tensor / model
VQASR_DEFINE_ERROR(ShapeMismatchError);
VQASR_DEFINE_ERROR(OddChannelsError);
VQASR_DEFINE_ERROR(IndivisibleHeadsError);
VQASR_DEFINE_ERROR(InvalidTargetError);
VQASR_DEFINE_ERROR(NonFiniteGradientError);
VQASR_DEFINE_ERROR(NonFiniteLossError);

// Checkpoints / scoring
VQASR_DEFINE_ERROR(ManifestMismatchError);
VQASR_DEFINE_ERROR(NoCheckpointsError);
VQASR_DEFINE_ERROR(EmptyReferenceError);

// Configuration
VQASR_DEFINE_ERROR(ConfigError);

#undef VQASR_DEFINE_ERROR

}  // namespace vqasr

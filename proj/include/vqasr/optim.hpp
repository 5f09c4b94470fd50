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

#include <cstdint>
#include <string>
#include <vector>

#include "vqasr/tensor.hpp"

namespace vqasr {

// A named view of one parameter tensor and its gradient accumulator.
struct ParamRef {
  std::string name;
  Tensor* value = nullptr;
  Tensor* grad = nullptr;
};

enum class ClipMode { global_norm, element_value };

// Warmup then inverse square root: lr = peak * min(step/warmup,
// sqrt(warmup/step)). Continuous at step == warmup.
double lr_schedule(std::int64_t step, double peak, std::int64_t warmup);

// Applies gradient clipping in place across all grads; returns the
// pre-clip global norm (global_norm mode) or the max |g| (value mode).
double clip_gradients(const std::vector<ParamRef>& params, double clip,
                      ClipMode mode);

struct OptimizerConfig {
  double lr_peak = 0.002;
  std::int64_t warmup_steps = 10000;
  double clip = 10.0;
  ClipMode clip_mode = ClipMode::global_norm;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
};

// Adam with warmup/inverse-root schedule and gradient clipping. Moment
// buffers are laid out parallel to the parameter list handed to init().
class AdamOptimizer {
 public:
  explicit AdamOptimizer(OptimizerConfig cfg) : cfg_(cfg) {}

  void init(const std::vector<ParamRef>& params);

  // Performs one update: clip -> lr_schedule(step) -> bias-corrected Adam.
  // Increments the step counter. Throws NonFiniteGradientError (before
  // touching any parameter) when a gradient is not finite.
  void step(const std::vector<ParamRef>& params);

  std::int64_t step_count() const { return step_; }
  void set_step_count(std::int64_t s) { step_ = s; }
  double last_lr() const { return last_lr_; }
  const OptimizerConfig& config() const { return cfg_; }

 private:
  OptimizerConfig cfg_;
  std::int64_t step_ = 0;
  double last_lr_ = 0.0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

}  // namespace vqasr

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

#include "vqasr/optim.hpp"

#include <omp.h>

#include <cmath>

namespace vqasr {

double lr_schedule(std::int64_t step, double peak, std::int64_t warmup) {
  if (step < 1) throw ConfigError("lr_schedule: step must be >= 1");
  if (warmup < 1) throw ConfigError("lr_schedule: warmup must be >= 1");
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(warmup);
  return peak * std::min(s / w, std::sqrt(w / s));
}

double clip_gradients(const std::vector<ParamRef>& params, double clip,
                      ClipMode mode) {
  if (mode == ClipMode::global_norm) {
    double sq = 0.0;
    for (const ParamRef& p : params)
      for (std::size_t i = 0; i < p.grad->size(); ++i)
        sq += (*p.grad)[i] * (*p.grad)[i];
    const double norm = std::sqrt(sq);
    if (clip > 0.0 && norm > clip) {
      const double scale = clip / norm;
      for (const ParamRef& p : params) scale_inplace(*p.grad, scale);
    }
    return norm;
  }
  double max_abs = 0.0;
  for (const ParamRef& p : params) {
    for (std::size_t i = 0; i < p.grad->size(); ++i) {
      double& g = (*p.grad)[i];
      max_abs = std::max(max_abs, std::abs(g));
      if (clip > 0.0) g = std::clamp(g, -clip, clip);
    }
  }
  return max_abs;
}

void AdamOptimizer::init(const std::vector<ParamRef>& params) {
  m_.clear();
  v_.clear();
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const ParamRef& p : params) {
    m_.emplace_back(p.value->shape());
    v_.emplace_back(p.value->shape());
  }
  step_ = 0;
}

void AdamOptimizer::step(const std::vector<ParamRef>& params) {
  if (params.size() != m_.size())
    throw ShapeMismatchError("optimizer step: parameter list changed size");
  for (const ParamRef& p : params) {
    if (!p.value->same_shape(*p.grad))
      throw ShapeMismatchError("optimizer step: grad shape mismatch for " +
                               p.name);
    if (!all_finite(*p.grad))
      throw NonFiniteGradientError("non-finite gradient in " + p.name);
  }

  clip_gradients(params, cfg_.clip, cfg_.clip_mode);

  ++step_;
  const double lr = lr_schedule(step_, cfg_.lr_peak, cfg_.warmup_steps);
  last_lr_ = lr;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));

  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& value = *params[pi].value;
    const Tensor& grad = *params[pi].grad;
    Tensor& m = m_[pi];
    Tensor& v = v_[pi];
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      value[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

}  // namespace vqasr

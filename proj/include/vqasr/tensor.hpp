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
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include "vqasr/errors.hpp"

namespace vqasr {

// Dense row-major tensor of doubles. All training math runs in double
// precision so finite-difference checks stay sharp.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
    data_.assign(numel(shape_), 0.0);
  }
  Tensor(std::initializer_list<std::size_t> shape)
      : Tensor(std::vector<std::size_t>(shape)) {}

  static std::size_t numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t ndim() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_[i]; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
  }
  double& at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  void zero() { fill(0.0); }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  std::string shape_str() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// y = a @ b with optional transposes; y must be preallocated to the
// result shape. When accumulate is true the product is added to y.
void gemm(const Tensor& a, bool transpose_a, const Tensor& b, bool transpose_b,
          Tensor& y, bool accumulate = false);

// Raw row-major variant for callers that reinterpret a tensor's shape
// (e.g. a [out x in x k] convolution weight used as [out x in*k]).
void gemm_view(const double* a, std::size_t a_rows, std::size_t a_cols,
               bool transpose_a, const double* b, std::size_t b_rows,
               std::size_t b_cols, bool transpose_b, double* y,
               std::size_t y_rows, std::size_t y_cols,
               bool accumulate = false);

// Elementwise helpers. Shapes must match.
void add_inplace(Tensor& a, const Tensor& b);
void scale_inplace(Tensor& a, double c);

// Uniform(-k, k) fill with k = 1/sqrt(fan_in).
void init_uniform_fan_in(Tensor& t, std::size_t fan_in, std::mt19937_64& rng);

bool all_finite(const Tensor& t);

void require_same_shape(const Tensor& a, const Tensor& b, const char* where);

}  // namespace vqasr

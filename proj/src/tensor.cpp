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

#include "vqasr/tensor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace vqasr {

namespace {

using EigenMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<EigenMat>;
using ConstMapMat = Eigen::Map<const EigenMat>;

ConstMapMat map2d(const Tensor& t) {
  if (t.ndim() != 2)
    throw ShapeMismatchError("gemm operand must be 2-D, got " + t.shape_str());
  return ConstMapMat(t.data(), static_cast<Eigen::Index>(t.dim(0)),
                     static_cast<Eigen::Index>(t.dim(1)));
}

}  // namespace

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape_.size(); ++i)
    os << (i ? "x" : "") << shape_[i];
  os << "]";
  return os.str();
}

void gemm(const Tensor& a, bool transpose_a, const Tensor& b, bool transpose_b,
          Tensor& y, bool accumulate) {
  ConstMapMat ma = map2d(a);
  ConstMapMat mb = map2d(b);
  const Eigen::Index rows = transpose_a ? ma.cols() : ma.rows();
  const Eigen::Index inner_a = transpose_a ? ma.rows() : ma.cols();
  const Eigen::Index inner_b = transpose_b ? mb.cols() : mb.rows();
  const Eigen::Index cols = transpose_b ? mb.rows() : mb.cols();
  if (inner_a != inner_b)
    throw ShapeMismatchError("gemm inner dimensions disagree: " +
                             a.shape_str() + " vs " + b.shape_str());
  if (y.ndim() != 2 || static_cast<Eigen::Index>(y.dim(0)) != rows ||
      static_cast<Eigen::Index>(y.dim(1)) != cols)
    throw ShapeMismatchError("gemm output has shape " + y.shape_str());
  MapMat my(y.data(), rows, cols);

  if (!transpose_a && !transpose_b) {
    if (accumulate) my.noalias() += ma * mb;
    else my.noalias() = ma * mb;
  } else if (transpose_a && !transpose_b) {
    if (accumulate) my.noalias() += ma.transpose() * mb;
    else my.noalias() = ma.transpose() * mb;
  } else if (!transpose_a && transpose_b) {
    if (accumulate) my.noalias() += ma * mb.transpose();
    else my.noalias() = ma * mb.transpose();
  } else {
    if (accumulate) my.noalias() += ma.transpose() * mb.transpose();
    else my.noalias() = ma.transpose() * mb.transpose();
  }
}

void gemm_view(const double* a, std::size_t a_rows, std::size_t a_cols,
               bool transpose_a, const double* b, std::size_t b_rows,
               std::size_t b_cols, bool transpose_b, double* y,
               std::size_t y_rows, std::size_t y_cols, bool accumulate) {
  ConstMapMat ma(a, static_cast<Eigen::Index>(a_rows),
                 static_cast<Eigen::Index>(a_cols));
  ConstMapMat mb(b, static_cast<Eigen::Index>(b_rows),
                 static_cast<Eigen::Index>(b_cols));
  const Eigen::Index rows = transpose_a ? ma.cols() : ma.rows();
  const Eigen::Index inner_a = transpose_a ? ma.rows() : ma.cols();
  const Eigen::Index inner_b = transpose_b ? mb.cols() : mb.rows();
  const Eigen::Index cols = transpose_b ? mb.rows() : mb.cols();
  if (inner_a != inner_b || rows != static_cast<Eigen::Index>(y_rows) ||
      cols != static_cast<Eigen::Index>(y_cols))
    throw ShapeMismatchError("gemm_view: dimension mismatch");
  MapMat my(y, rows, cols);
  auto assign = [&](const auto& product) {
    if (accumulate) my.noalias() += product;
    else my.noalias() = product;
  };
  if (!transpose_a && !transpose_b) assign(ma * mb);
  else if (transpose_a && !transpose_b) assign(ma.transpose() * mb);
  else if (!transpose_a && transpose_b) assign(ma * mb.transpose());
  else assign(ma.transpose() * mb.transpose());
}

void add_inplace(Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add_inplace");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

void scale_inplace(Tensor& a, double c) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= c;
}

void init_uniform_fan_in(Tensor& t, std::size_t fan_in, std::mt19937_64& rng) {
  const double k = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (std::size_t i = 0; i < t.size(); ++i) {
    // 53-bit uniform in [0, 1); stable across standard libraries
    const double u = static_cast<double>(rng() >> 11) / 9007199254740992.0;
    t[i] = k * (2.0 * u - 1.0);
  }
}

bool all_finite(const Tensor& t) {
  for (std::size_t i = 0; i < t.size(); ++i)
    if (!std::isfinite(t[i])) return false;
  return true;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* where) {
  if (!a.same_shape(b))
    throw ShapeMismatchError(std::string(where) + ": shape mismatch " +
                             a.shape_str() + " vs " + b.shape_str());
}

}  // namespace vqasr

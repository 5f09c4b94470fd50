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

#include "vqasr/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>

namespace vqasr {

double mean(const std::vector<double>& values) {
  if (values.empty()) throw DataError("mean of an empty sample");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_std(const std::vector<double>& values) {
  if (values.size() < 2)
    throw DataError("sample std needs at least two values");
  const double m = mean(values);
  double acc = 0.0;
  for (double v : values) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

double stderr_of_mean(const std::vector<double>& values) {
  return sample_std(values) / std::sqrt(static_cast<double>(values.size()));
}

double welch_p_value(const std::vector<double>& a,
                     const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2)
    throw DataError("welch test needs at least two values per sample");
  const double ma = mean(a), mb = mean(b);
  const double va = sample_std(a) * sample_std(a);
  const double vb = sample_std(b) * sample_std(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());

  const double pooled = va / na + vb / nb;
  if (pooled <= 0.0) return ma == mb ? 1.0 : 0.0;

  const double t = (ma - mb) / std::sqrt(pooled);
  const double df = pooled * pooled /
                    (va * va / (na * na * (na - 1.0)) +
                     vb * vb / (nb * nb * (nb - 1.0)));
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(dist, -std::abs(t));
}

double relative_reduction(double wer_a, double wer_b) {
  if (wer_a == 0.0) return 0.0;
  return 100.0 * (wer_a - wer_b) / wer_a;
}

}  // namespace vqasr

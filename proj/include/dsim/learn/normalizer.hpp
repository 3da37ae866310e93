// Copyright 2026 The dsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

// Running observation statistics. Normalization reads the statistics as
// constants, so no gradient flows into them; they are updated only between
// gradient computations.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "dsim/ad/ops.hpp"

namespace dsim {

class RunningNormalizer {
 public:
  RunningNormalizer() = default;
  explicit RunningNormalizer(int dim, double clip = 10.0)
      : mean_(dim, 0.0), var_(dim, 1.0), clip_(clip) {}

  int dim() const { return static_cast<int>(mean_.size()); }

  /// Merges a batch (rows in order) into the statistics.
  void update(const std::vector<std::vector<double>>& batch);

  template <class T>
  std::vector<T> normalize(std::span<const T> x) const {
    if (static_cast<int>(x.size()) != dim()) {
      throw std::invalid_argument("RunningNormalizer: dimension mismatch");
    }
    std::vector<T> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double inv = 1.0 / std::sqrt(var_[i] + 1e-8);
      out[i] = ad::clamp((x[i] - mean_[i]) * inv, T(-clip_), T(clip_));
    }
    return out;
  }

  std::vector<double>& mean() { return mean_; }
  std::vector<double>& var() { return var_; }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& var() const { return var_; }
  double count() const { return count_; }
  void set_count(double c) { count_ = c; }
  double clip() const { return clip_; }

 private:
  std::vector<double> mean_;
  std::vector<double> var_;
  double count_ = 0.0;
  double clip_ = 10.0;
};

inline void RunningNormalizer::update(const std::vector<std::vector<double>>& batch) {
  if (batch.empty()) return;
  const int d = dim();
  const double n = static_cast<double>(batch.size());
  std::vector<double> bm(d, 0.0), bv(d, 0.0);
  for (const auto& row : batch) {
    if (static_cast<int>(row.size()) != d) {
      throw std::invalid_argument("RunningNormalizer: dimension mismatch");
    }
    for (int i = 0; i < d; ++i) bm[i] += row[i];
  }
  for (double& m : bm) m /= n;
  for (const auto& row : batch) {
    for (int i = 0; i < d; ++i) bv[i] += (row[i] - bm[i]) * (row[i] - bm[i]);
  }
  for (double& v : bv) v /= n;
  // Chan et al. parallel combination.
  const double total = count_ + n;
  for (int i = 0; i < d; ++i) {
    const double delta = bm[i] - mean_[i];
    const double m2 = var_[i] * count_ + bv[i] * n + delta * delta * count_ * n / total;
    mean_[i] += delta * n / total;
    var_[i] = m2 / total;
  }
  count_ = total;
}

}  // namespace dsim

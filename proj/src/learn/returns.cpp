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
#include "dsim/learn/returns.hpp"

#include <stdexcept>

namespace dsim {
namespace {

void check_sizes(std::size_t a, std::size_t b, std::size_t c) {
  if (a != b || a != c) throw std::invalid_argument("return estimators: size mismatch");
}

}  // namespace

std::vector<double> td_lambda_targets(std::span<const double> rewards,
                                      std::span<const double> next_values,
                                      std::span<const std::uint8_t> cut, double gamma,
                                      double lambda) {
  check_sizes(rewards.size(), next_values.size(), cut.size());
  const int n = static_cast<int>(rewards.size());
  std::vector<double> g(n);
  for (int t = n - 1; t >= 0; --t) {
    if (t == n - 1 || cut[t]) {
      g[t] = rewards[t] + gamma * next_values[t];
    } else {
      g[t] = rewards[t] +
             gamma * ((1.0 - lambda) * next_values[t] + lambda * g[t + 1]);
    }
  }
  return g;
}

std::vector<double> gae_advantages(std::span<const double> rewards,
                                   std::span<const double> values,
                                   std::span<const double> next_values,
                                   std::span<const std::uint8_t> cut, double gamma,
                                   double lambda) {
  check_sizes(rewards.size(), next_values.size(), cut.size());
  if (values.size() != rewards.size()) {
    throw std::invalid_argument("gae_advantages: size mismatch");
  }
  const int n = static_cast<int>(rewards.size());
  std::vector<double> adv(n);
  double next = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    const double delta = rewards[t] + gamma * next_values[t] - values[t];
    const bool boundary = t == n - 1 || cut[t];
    adv[t] = delta + (boundary ? 0.0 : gamma * lambda * next);
    next = adv[t];
  }
  return adv;
}

}  // namespace dsim

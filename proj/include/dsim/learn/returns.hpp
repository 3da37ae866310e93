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

#include <cstdint>
#include <span>
#include <vector>

namespace dsim {

/// TD(lambda) targets over one lane's window.
///
/// next_values[t] is the bootstrap value of the state reached by step t:
/// V(s_{t+1}) inside an episode, V of the terminal observation at a timeout,
/// 0 at a termination. cut[t] marks an episode boundary after step t, where
/// the recursion restarts. The last step always bootstraps from
/// next_values[T-1].
std::vector<double> td_lambda_targets(std::span<const double> rewards,
                                      std::span<const double> next_values,
                                      std::span<const std::uint8_t> cut, double gamma,
                                      double lambda);

/// Generalized advantage estimation with the same conventions; values[t] is
/// V(s_t).
std::vector<double> gae_advantages(std::span<const double> rewards,
                                   std::span<const double> values,
                                   std::span<const double> next_values,
                                   std::span<const std::uint8_t> cut, double gamma,
                                   double lambda);

}  // namespace dsim

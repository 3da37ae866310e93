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

#include "dsim/envs/env.hpp"
#include "dsim/envs/parallel.hpp"
#include "dsim/learn/agent.hpp"

namespace dsim {

struct EvalMetrics {
  double mean_return = 0.0;
  double mean_episode_length = 0.0;
  double mean_forward_velocity = 0.0;  // per-episode average, then mean
  double mean_command = 0.0;
  double velocity_error = 0.0;  // |mean v - command| / command, mean over episodes
  int falls = 0;
  int unconverged = 0;
  int faults = 0;  // episodes cut short by a failed step
};

/// Runs `episodes` episodes with the deterministic (mean) action. Episode k
/// starts from reset stream (seed, k, 0), so results do not depend on
/// anything but the arguments. A step fault ends its episode and is counted
/// in `faults`.
EvalMetrics evaluate(const Agent& agent, const LocomotionEnv& env, int episodes,
                     std::uint64_t seed, WorkerPool* pool = nullptr);

}  // namespace dsim

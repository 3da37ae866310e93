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
#include "dsim/learn/evaluate.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dsim {

EvalMetrics evaluate(const Agent& agent, const LocomotionEnv& env, int episodes,
                     std::uint64_t seed, WorkerPool* pool) {
  if (episodes < 1) throw std::invalid_argument("evaluate: episodes must be >= 1");
  struct Episode {
    double ret = 0.0, velocity = 0.0, command = 0.0;
    int length = 0, unconverged = 0;
    bool fell = false, faulted = false;
  };
  std::vector<Episode> eps(episodes);
  auto run = [&](int k) {
    LaneState<double> lane;
    env.reset_lane(lane, seed, k);
    Episode& e = eps[k];
    e.command = lane.command;
    std::vector<double> obs = env.observe(lane);
    double vsum = 0.0;
    for (;;) {
      const std::vector<double> a = agent.act(obs);
      LaneStep<double> s;
      try {
        s = env.step_lane<double>(lane, a, seed, k);
      } catch (const LaneFault&) {
        e.faulted = true;
        break;
      }
      e.ret += s.reward;
      e.unconverged += s.unconverged_solves;
      vsum += s.forward_velocity;
      ++e.length;
      if (s.done) {
        e.fell = s.termination == TerminationType::kFall;
        break;
      }
      obs = s.observation;
    }
    e.velocity = e.length > 0 ? vsum / e.length : 0.0;
  };
  if (pool != nullptr) {
    pool->parallel_for(episodes, run);
  } else {
    for (int k = 0; k < episodes; ++k) run(k);
  }
  EvalMetrics m;
  for (const Episode& e : eps) {
    m.mean_return += e.ret / episodes;
    m.mean_episode_length += static_cast<double>(e.length) / episodes;
    m.mean_forward_velocity += e.velocity / episodes;
    m.mean_command += e.command / episodes;
    const double denom = std::abs(e.command) > 1e-12 ? std::abs(e.command) : 1.0;
    m.velocity_error += std::abs(e.velocity - e.command) / denom / episodes;
    m.falls += e.fell ? 1 : 0;
    m.unconverged += e.unconverged;
    m.faults += e.faulted ? 1 : 0;
  }
  return m;
}

}  // namespace dsim

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

// Short-horizon actor-critic: the actor is trained on the analytic gradient
// of an H-step return computed through the simulator, bootstrapped with a
// target critic; the critic regresses TD(lambda) targets on the detached
// rollout.
//
// Each lane records its window on its own tape. Lanes share the policy but
// nothing else, so the batch gradient is the index-ordered sum of lane
// gradients and does not depend on the number of worker threads.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dsim/envs/env.hpp"
#include "dsim/envs/parallel.hpp"
#include "dsim/learn/agent.hpp"

namespace dsim {

struct ShacConfig {
  int horizon = 24;
  double gamma = 0.99;
  double lambda = 0.95;
  double actor_lr = 2e-3;
  double critic_lr = 2e-3;
  int critic_epochs = 16;
  int critic_minibatches = 4;
  double target_alpha = 0.2;
  double grad_clip = 1.0;
  int lanes = 64;
  double adam_beta1 = 0.7;
  double adam_beta2 = 0.95;
  // Both learning rates fall linearly to final_lr over lr_decay_steps env
  // steps (0: the whole training budget), then stay there.
  bool linear_lr_decay = true;
  double final_lr = 1e-5;
  std::int64_t lr_decay_steps = 0;

  void validate() const;
};

struct IterationMetrics {
  std::int64_t iteration = 0;
  std::int64_t env_steps = 0;  // cumulative
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double mean_reward = 0.0;  // per step over the iteration's rollout
  double grad_norm = 0.0;    // before clipping
  int episodes = 0;          // completed in this iteration
  double episode_return = std::numeric_limits<double>::quiet_NaN();
  double episode_length = std::numeric_limits<double>::quiet_NaN();
  int faults = 0;
  int unconverged = 0;
  int clamped = 0;
};

/// One lane's recorded window (values only).
struct LaneWindow {
  std::vector<std::vector<double>> obs;       // o_t, t < H
  std::vector<double> rewards;
  std::vector<std::uint8_t> cut;              // episode boundary after t
  std::vector<std::uint8_t> terminated;       // fall after t
  std::vector<std::vector<double>> boot_obs;  // observation to bootstrap step t from
  std::vector<int> episode_lengths;           // of episodes ending in the window
  int unconverged = 0;
  int clamped = 0;
};

struct ShacWindow {
  double loss = 0.0;          // actor loss
  std::vector<double> grad;   // d loss / d policy_params
  std::vector<LaneWindow> lanes;
  std::vector<LaneState<double>> final_states;
};

class ShacTrainer {
 public:
  ShacTrainer(const LocomotionEnv& env, const ShacConfig& cfg,
              std::uint64_t seed, WorkerPool* pool = nullptr);

  const ShacConfig& config() const { return cfg_; }
  const std::vector<LaneState<double>>& lanes() const { return lanes_; }
  std::vector<LaneState<double>>& lanes() { return lanes_; }

  /// Adam settings matching the configuration.
  AdamConfig actor_adam() const;
  AdamConfig critic_adam() const;

  void reset_lanes();

  /// Rollout, actor update, critic regression, target blend.
  IterationMetrics iterate(Agent& agent);

  /// Actor loss and its gradient w.r.t. the policy parameters from the
  /// current lane states. Does not modify the trainer or the agent.
  ShacWindow window(const Agent& agent) const;

  /// The same actor loss evaluated in plain double precision.
  double window_loss(const Agent& agent) const;

  /// Critic regression on a finished window; returns the mean loss.
  double fit_critic(Agent& agent, const std::vector<LaneWindow>& lanes) const;

 private:
  const LocomotionEnv& env_;
  ShacConfig cfg_;
  std::uint64_t seed_;
  WorkerPool* pool_;
  std::vector<LaneState<double>> lanes_;
  std::vector<double> episode_return_;
};

}  // namespace dsim

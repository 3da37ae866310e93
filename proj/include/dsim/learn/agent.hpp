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

// Policy, value function, observation statistics and optimizer state shared
// by both trainers.
//
// The policy network outputs the pre-squash mean mu(o); actions are
// tanh(mu) in deterministic mode (SHAC, evaluation) and tanh(mu + sigma eps)
// when sampling (PPO), with a state-independent log sigma.

#include <cstdint>
#include <span>
#include <vector>

#include "dsim/learn/mlp.hpp"
#include "dsim/learn/normalizer.hpp"
#include "dsim/learn/optim.hpp"

namespace dsim {

struct NetConfig {
  std::vector<int> policy_hidden{128, 64};
  std::vector<int> value_hidden{128, 64};
  double init_log_std = -0.5;
  double policy_output_gain = 0.1;
};

struct Agent {
  Mlp policy;
  std::vector<double> policy_params;
  std::vector<double> log_std;
  Mlp value;
  std::vector<double> value_params;
  std::vector<double> target_params;
  RunningNormalizer obs_norm;
  Adam actor_opt;   // over [policy_params, log_std]
  Adam critic_opt;  // over value_params
  std::int64_t env_steps = 0;
  std::int64_t iteration = 0;

  static Agent create(int obs_dim, int act_dim, const NetConfig& net,
                      std::uint64_t seed, AdamConfig actor, AdamConfig critic);

  int obs_dim() const { return policy.shape().input; }
  int act_dim() const { return policy.shape().output; }
  std::size_t actor_size() const { return policy_params.size() + log_std.size(); }

  /// Pre-squash policy mean for a raw observation.
  std::vector<double> policy_mean(std::span<const double> obs,
                                  MlpCache* cache = nullptr) const;
  /// tanh(policy_mean(obs)).
  std::vector<double> act(std::span<const double> obs) const;
  double value_of(std::span<const double> obs, bool target) const;

  /// Deterministic action on the active tape; parameter gradients go to
  /// `grad` (size policy_params.size(), may be empty).
  std::vector<ad::Var> act_var(std::span<const ad::Var> obs,
                               std::span<double> grad) const;
  ad::Var target_value_var(std::span<const ad::Var> obs) const;

  /// Copies [policy_params, log_std] out of / into one flat vector.
  std::vector<double> actor_vector() const;
  void set_actor_vector(std::span<const double> v);
};

}  // namespace dsim

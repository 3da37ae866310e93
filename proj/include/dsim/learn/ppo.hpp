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

// Clipped-surrogate PPO with GAE and a tanh-squashed Gaussian policy. The
// simulator is stepped in double precision only; no simulator gradients.
//
// The Gaussian lives on the pre-squash variable z = mu + sigma * eps and
// a = tanh(z). Because z is stored, the tanh Jacobian term of the squashed
// log-density cancels in every likelihood ratio and is omitted.

#include <cstdint>
#include <vector>

#include "dsim/envs/batch.hpp"
#include "dsim/learn/agent.hpp"
#include "dsim/learn/shac.hpp"

namespace dsim {

struct PpoConfig {
  int rollout_length = 32;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_ratio = 0.2;
  int epochs = 5;
  int minibatches = 4;
  double entropy_coef = 0.0;
  double value_coef = 0.5;
  double lr = 3e-4;
  double grad_clip = 1.0;
  int lanes = 64;
  bool normalize_advantages = true;  // per minibatch

  void validate() const;
};

/// Clipped surrogate objective for one sample (to be maximized).
double clipped_surrogate(double ratio, double advantage, double clip);

/// d surrogate / d ratio (0 where the clip is active).
double clipped_surrogate_grad(double ratio, double advantage, double clip);

/// Diagonal Gaussian log-density of z under N(mu, exp(log_std)^2).
double gaussian_log_prob(std::span<const double> z, std::span<const double> mu,
                         std::span<const double> log_std);

struct PpoSample {
  std::vector<double> obs;  // normalized with the rollout-time statistics
  std::vector<double> z;
  double log_prob = 0.0;
  double advantage = 0.0;
  double ret = 0.0;
};

/// Gradient of the PPO loss over a minibatch w.r.t. [policy_params,
/// log_std] (actor) and value_params (critic).
struct PpoGradients {
  std::vector<double> actor;
  std::vector<double> critic;
  double policy_loss = 0.0;
  double value_loss = 0.0;
};
PpoGradients ppo_gradients(const Agent& agent, const std::vector<PpoSample>& batch,
                           std::span<const int> indices, const PpoConfig& cfg,
                           WorkerPool* pool = nullptr);

class PpoTrainer {
 public:
  PpoTrainer(const LocomotionEnv& env, const PpoConfig& cfg, std::uint64_t seed,
             WorkerPool* pool = nullptr);

  const PpoConfig& config() const { return cfg_; }
  AdamConfig adam() const { return {cfg_.lr, 0.9, 0.999, 1e-8}; }
  EnvBatch& batch() { return batch_; }

  IterationMetrics iterate(Agent& agent);

  /// Collects one rollout with the current policy (no parameter updates).
  std::vector<PpoSample> collect(Agent& agent, IterationMetrics& m);

 private:
  const LocomotionEnv& env_;
  PpoConfig cfg_;
  std::uint64_t seed_;
  WorkerPool* pool_;
  EnvBatch batch_;
  std::vector<std::vector<double>> obs_;
  std::vector<double> episode_return_;
  std::vector<std::uint64_t> draws_;  // per-lane noise counter
};

}  // namespace dsim

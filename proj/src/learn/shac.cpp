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
#include "dsim/learn/shac.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <type_traits>

#include "dsim/envs/seeding.hpp"
#include "dsim/learn/returns.hpp"

namespace dsim {
namespace {

// Fixed chunking keeps floating-point summation order independent of the
// thread count.
constexpr int kReductionChunks = 8;

template <class T>
struct LaneObjective {
  T loss{0.0};  // sum of discounted rewards and bootstraps (to be maximized)
  LaneWindow record;
  LaneState<double> final_state;
};

template <class T>
LaneObjective<T> run_lane(const Agent& agent, const LocomotionEnv& env,
                          const ShacConfig& cfg, const LaneState<double>& start,
                          std::uint64_t seed, int index, std::span<double> grad) {
  LaneObjective<T> out;
  LaneWindow& rec = out.record;
  LaneState<T> lane = start.cast<T>();
  auto act = [&](const std::vector<T>& obs) {
    if constexpr (std::is_same_v<T, ad::Var>) {
      return agent.act_var(obs, grad);
    } else {
      return agent.act(obs);
    }
  };
  auto bootstrap = [&](const std::vector<T>& obs) -> T {
    if constexpr (std::is_same_v<T, ad::Var>) {
      return agent.target_value_var(obs);
    } else {
      return agent.value_of(obs, true);
    }
  };

  std::vector<T> obs = env.observe(lane);
  double discount = 1.0;
  for (int t = 0; t < cfg.horizon; ++t) {
    rec.obs.push_back(ad::value_vector(obs));
    const std::vector<T> a = act(obs);
    LaneStep<T> s = env.step_lane<T>(lane, a, seed, index);
    out.loss = out.loss + discount * s.reward;
    discount *= cfg.gamma;
    rec.rewards.push_back(ad::value(s.reward));
    rec.unconverged += s.unconverged_solves;
    rec.clamped += s.clamped_actions;
    rec.cut.push_back(s.done ? 1 : 0);
    rec.terminated.push_back(s.termination == TerminationType::kFall ? 1 : 0);
    if (s.done) {
      rec.episode_lengths.push_back(s.episode_length);
      rec.boot_obs.push_back(ad::value_vector(s.terminal_observation));
      // Timeouts bootstrap from the critic; terminations contribute V = 0.
      if (s.termination == TerminationType::kTimeout) {
        out.loss = out.loss + discount * bootstrap(s.terminal_observation);
      }
      discount = 1.0;
    } else {
      rec.boot_obs.push_back(ad::value_vector(s.observation));
      if (t + 1 == cfg.horizon) out.loss = out.loss + discount * bootstrap(s.observation);
    }
    obs = std::move(s.observation);
  }
  out.final_state = lane.template cast<double>();
  return out;
}

}  // namespace

void ShacConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("shac config: " + what);
  };
  if (horizon < 1 || horizon > 64) fail("horizon must be in [1, 64]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma must be in [0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail("lambda must be in [0, 1]");
  if (!(actor_lr >= 0.0) || !(critic_lr >= 0.0)) fail("learning rates must be >= 0");
  if (critic_epochs < 0) fail("critic_epochs must be >= 0");
  if (critic_minibatches < 1) fail("critic_minibatches must be >= 1");
  if (!(target_alpha > 0.0 && target_alpha <= 1.0)) fail("target_alpha must be in (0, 1]");
  if (lanes < 1) fail("lanes must be >= 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    fail("adam betas must be in [0, 1)");
  }
  if (!(final_lr >= 0.0)) fail("final_lr must be >= 0");
  if (lr_decay_steps < 0) fail("lr_decay_steps must be >= 0");
}

ShacTrainer::ShacTrainer(const LocomotionEnv& env, const ShacConfig& cfg,
                         std::uint64_t seed, WorkerPool* pool)
    : env_(env), cfg_(cfg), seed_(seed), pool_(pool) {
  cfg_.validate();
  lanes_.resize(cfg_.lanes);
  episode_return_.assign(cfg_.lanes, 0.0);
  reset_lanes();
}

AdamConfig ShacTrainer::actor_adam() const {
  return {cfg_.actor_lr, cfg_.adam_beta1, cfg_.adam_beta2, 1e-8};
}

AdamConfig ShacTrainer::critic_adam() const {
  return {cfg_.critic_lr, cfg_.adam_beta1, cfg_.adam_beta2, 1e-8};
}

void ShacTrainer::reset_lanes() {
  for (int i = 0; i < cfg_.lanes; ++i) {
    env_.reset_lane(lanes_[i], seed_, i);
    episode_return_[i] = 0.0;
  }
}

ShacWindow ShacTrainer::window(const Agent& agent) const {
  const int n = cfg_.lanes;
  const std::size_t np = agent.policy_params.size();
  std::vector<std::vector<double>> grads(n, std::vector<double>(np, 0.0));
  std::vector<double> losses(n, 0.0);
  ShacWindow w;
  w.lanes.resize(n);
  w.final_states.resize(n);
  auto one = [&](int i) {
    ad::Tape tape;
    tape.reserve(1 << 16);
    ad::TapeScope scope(tape);
    auto obj = run_lane<ad::Var>(agent, env_, cfg_, lanes_[i], seed_, i, grads[i]);
    tape.backward(obj.loss);
    losses[i] = obj.loss.value();
    w.lanes[i] = std::move(obj.record);
    w.final_states[i] = std::move(obj.final_state);
  };
  if (pool_ != nullptr) {
    pool_->parallel_for(n, one);
  } else {
    for (int i = 0; i < n; ++i) one(i);
  }
  const double scale = -1.0 / (static_cast<double>(n) * cfg_.horizon);
  w.grad.assign(np, 0.0);
  for (int i = 0; i < n; ++i) {
    w.loss += scale * losses[i];
    for (std::size_t k = 0; k < np; ++k) w.grad[k] += scale * grads[i][k];
  }
  return w;
}

double ShacTrainer::window_loss(const Agent& agent) const {
  double total = 0.0;
  for (int i = 0; i < cfg_.lanes; ++i) {
    total += run_lane<double>(agent, env_, cfg_, lanes_[i], seed_, i, {}).loss;
  }
  return -total / (static_cast<double>(cfg_.lanes) * cfg_.horizon);
}

double ShacTrainer::fit_critic(Agent& agent, const std::vector<LaneWindow>& lanes) const {
  std::vector<std::vector<double>> inputs;
  std::vector<double> targets;
  for (const LaneWindow& lw : lanes) {
    const int h = static_cast<int>(lw.rewards.size());
    std::vector<double> next(h);
    for (int t = 0; t < h; ++t) {
      next[t] = lw.terminated[t] ? 0.0 : agent.value_of(lw.boot_obs[t], true);
    }
    const std::vector<double> g =
        td_lambda_targets(lw.rewards, next, lw.cut, cfg_.gamma, cfg_.lambda);
    for (int t = 0; t < h; ++t) {
      inputs.push_back(agent.obs_norm.normalize<double>(lw.obs[t]));
      targets.push_back(g[t]);
    }
  }
  const int total = static_cast<int>(targets.size());
  if (total == 0 || cfg_.critic_epochs == 0) return 0.0;

  std::vector<int> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(stream_seed(seed_ ^ 0x63726974ULL, 0,
                                  static_cast<std::uint64_t>(agent.iteration)));
  const std::size_t np = agent.value_params.size();
  const int mb_count = std::min(cfg_.critic_minibatches, total);
  double loss_sum = 0.0;
  int loss_terms = 0;
  for (int epoch = 0; epoch < cfg_.critic_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int mb = 0; mb < mb_count; ++mb) {
      const int lo = mb * total / mb_count;
      const int hi = (mb + 1) * total / mb_count;
      const int size = hi - lo;
      std::vector<std::vector<double>> chunk_grad(kReductionChunks,
                                                  std::vector<double>(np, 0.0));
      std::vector<double> chunk_loss(kReductionChunks, 0.0);
      auto chunk = [&](int c) {
        const int a = lo + c * size / kReductionChunks;
        const int b = lo + (c + 1) * size / kReductionChunks;
        MlpCache cache;
        for (int k = a; k < b; ++k) {
          const int s = order[k];
          const double v = agent.value.forward(agent.value_params, inputs[s], &cache)[0];
          const double err = v - targets[s];
          chunk_loss[c] += err * err;
          const double g = 2.0 * err / size;
          agent.value.backward(agent.value_params, cache, std::span<const double>(&g, 1),
                               chunk_grad[c]);
        }
      };
      if (pool_ != nullptr) {
        pool_->parallel_for(kReductionChunks, chunk);
      } else {
        for (int c = 0; c < kReductionChunks; ++c) chunk(c);
      }
      std::vector<double> grad(np, 0.0);
      double loss = 0.0;
      for (int c = 0; c < kReductionChunks; ++c) {
        loss += chunk_loss[c];
        for (std::size_t k = 0; k < np; ++k) grad[k] += chunk_grad[c][k];
      }
      clip_grad_norm(grad, cfg_.grad_clip);
      agent.critic_opt.step(agent.value_params, grad);
      loss_sum += loss / size;
      ++loss_terms;
    }
  }
  return loss_sum / loss_terms;
}

IterationMetrics ShacTrainer::iterate(Agent& agent) {
  IterationMetrics m;
  m.iteration = agent.iteration;
  const std::int64_t steps = static_cast<std::int64_t>(cfg_.lanes) * cfg_.horizon;

  ShacWindow w;
  bool fault = false;
  try {
    w = window(agent);
    fault = !std::isfinite(w.loss);
    for (double g : w.grad) {
      if (!std::isfinite(g)) {
        fault = true;
        break;
      }
    }
  } catch (const ad::GradientFault&) {
    fault = true;
  } catch (const LaneFault&) {
    fault = true;
  }
  agent.env_steps += steps;
  m.env_steps = agent.env_steps;
  if (fault) {
    m.faults = 1;
    reset_lanes();
    agent.iteration += 1;
    return m;
  }

  m.actor_loss = w.loss;
  std::vector<double> grad = w.grad;
  grad.resize(agent.actor_size(), 0.0);  // log_std is not used by SHAC
  m.grad_norm = clip_grad_norm(grad, cfg_.grad_clip);
  std::vector<double> actor = agent.actor_vector();
  agent.actor_opt.step(actor, grad);
  agent.set_actor_vector(actor);

  m.critic_loss = fit_critic(agent, w.lanes);
  blend_toward(agent.target_params, agent.value_params, cfg_.target_alpha);

  // Bookkeeping in lane order.
  double reward_sum = 0.0;
  double return_sum = 0.0;
  double length_sum = 0.0;
  std::vector<std::vector<double>> seen;
  for (int i = 0; i < cfg_.lanes; ++i) {
    const LaneWindow& lw = w.lanes[i];
    m.unconverged += lw.unconverged;
    m.clamped += lw.clamped;
    std::size_t ended = 0;
    for (std::size_t t = 0; t < lw.rewards.size(); ++t) {
      reward_sum += lw.rewards[t];
      episode_return_[i] += lw.rewards[t];
      if (lw.cut[t]) {
        return_sum += episode_return_[i];
        length_sum += lw.episode_lengths[ended++];
        ++m.episodes;
        episode_return_[i] = 0.0;
      }
    }
    seen.insert(seen.end(), lw.obs.begin(), lw.obs.end());
  }
  m.mean_reward = reward_sum / static_cast<double>(steps);
  if (m.episodes > 0) {
    m.episode_return = return_sum / m.episodes;
    m.episode_length = length_sum / m.episodes;
  }
  agent.obs_norm.update(seen);
  lanes_ = std::move(w.final_states);
  agent.iteration += 1;
  return m;
}

}  // namespace dsim

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
#include "dsim/learn/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "dsim/envs/seeding.hpp"
#include "dsim/learn/returns.hpp"

namespace dsim {
namespace {

constexpr int kReductionChunks = 8;

}  // namespace

void PpoConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("ppo config: " + what);
  };
  if (rollout_length < 1) fail("rollout_length must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma must be in [0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) fail("gae_lambda must be in [0, 1]");
  if (!(clip_ratio > 0.0)) fail("clip_ratio must be > 0");
  if (epochs < 0) fail("epochs must be >= 0");
  if (minibatches < 1) fail("minibatches must be >= 1");
  if (!(lr >= 0.0)) fail("lr must be >= 0");
  if (lanes < 1) fail("lanes must be >= 1");
}

double clipped_surrogate(double ratio, double advantage, double clip) {
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  return std::min(ratio * advantage, clipped * advantage);
}

double clipped_surrogate_grad(double ratio, double advantage, double clip) {
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  // The unclipped branch is the minimum (and carries the gradient) unless
  // the clipped value is strictly smaller.
  return clipped * advantage < ratio * advantage ? 0.0 : advantage;
}

double gaussian_log_prob(std::span<const double> z, std::span<const double> mu,
                         std::span<const double> log_std) {
  double lp = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double s = std::exp(log_std[j]);
    const double e = (z[j] - mu[j]) / s;
    lp += -0.5 * e * e - log_std[j] - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  return lp;
}

PpoGradients ppo_gradients(const Agent& agent, const std::vector<PpoSample>& batch,
                           std::span<const int> indices, const PpoConfig& cfg,
                           WorkerPool* pool) {
  const int size = static_cast<int>(indices.size());
  const int na = agent.act_dim();
  const std::size_t np = agent.policy_params.size();
  const std::size_t nv = agent.value_params.size();
  PpoGradients out;
  out.actor.assign(agent.actor_size(), 0.0);
  out.critic.assign(nv, 0.0);
  if (size == 0) return out;

  double adv_mean = 0.0;
  for (int k : indices) adv_mean += batch[k].advantage;
  adv_mean /= size;
  double adv_var = 0.0;
  for (int k : indices) adv_var += (batch[k].advantage - adv_mean) * (batch[k].advantage - adv_mean);
  double adv_std = std::sqrt(adv_var / size) + 1e-8;
  if (!cfg.normalize_advantages) {
    adv_mean = 0.0;
    adv_std = 1.0;
  }

  std::vector<double> sigma(na);
  for (int j = 0; j < na; ++j) sigma[j] = std::exp(agent.log_std[j]);

  struct Chunk {
    std::vector<double> actor, critic;
    double policy_loss = 0.0, value_loss = 0.0;
  };
  std::vector<Chunk> chunks(kReductionChunks);
  auto work = [&](int c) {
    Chunk& ch = chunks[c];
    ch.actor.assign(agent.actor_size(), 0.0);
    ch.critic.assign(nv, 0.0);
    const int a = c * size / kReductionChunks;
    const int b = (c + 1) * size / kReductionChunks;
    MlpCache pc, vc;
    std::vector<double> g_mu(na);
    for (int k = a; k < b; ++k) {
      const PpoSample& s = batch[indices[k]];
      const double adv = (s.advantage - adv_mean) / adv_std;
      const std::vector<double> mu = agent.policy.forward(agent.policy_params, s.obs, &pc);
      const double lp = gaussian_log_prob(s.z, mu, agent.log_std);
      const double ratio = std::exp(lp - s.log_prob);
      ch.policy_loss -= clipped_surrogate(ratio, adv, cfg.clip_ratio) / size;
      // loss = -surrogate; d loss / d log pi = -dS/dratio * ratio.
      const double dlogp = -clipped_surrogate_grad(ratio, adv, cfg.clip_ratio) * ratio / size;
      if (dlogp != 0.0) {
        for (int j = 0; j < na; ++j) {
          const double e = (s.z[j] - mu[j]) / sigma[j];
          g_mu[j] = dlogp * e / sigma[j];
          ch.actor[np + j] += dlogp * (e * e - 1.0);
        }
        agent.policy.backward(agent.policy_params, pc, g_mu,
                              std::span<double>(ch.actor.data(), np));
      }
      const double v = agent.value.forward(agent.value_params, s.obs, &vc)[0];
      const double err = v - s.ret;
      ch.value_loss += 0.5 * err * err / size;
      const double gv = cfg.value_coef * err / size;
      agent.value.backward(agent.value_params, vc, std::span<const double>(&gv, 1),
                           ch.critic);
    }
  };
  if (pool != nullptr) {
    pool->parallel_for(kReductionChunks, work);
  } else {
    for (int c = 0; c < kReductionChunks; ++c) work(c);
  }
  for (const Chunk& ch : chunks) {
    for (std::size_t i = 0; i < out.actor.size(); ++i) out.actor[i] += ch.actor[i];
    for (std::size_t i = 0; i < nv; ++i) out.critic[i] += ch.critic[i];
    out.policy_loss += ch.policy_loss;
    out.value_loss += ch.value_loss;
  }
  // Entropy bonus: H = sum(log sigma) + const per sample.
  for (int j = 0; j < na; ++j) out.actor[np + j] -= cfg.entropy_coef;
  return out;
}

PpoTrainer::PpoTrainer(const LocomotionEnv& env, const PpoConfig& cfg,
                       std::uint64_t seed, WorkerPool* pool)
    : env_(env), cfg_(cfg), seed_(seed), pool_(pool), batch_(env, cfg.lanes, seed, pool) {
  cfg_.validate();
  obs_ = batch_.reset();
  episode_return_.assign(cfg_.lanes, 0.0);
  draws_.assign(cfg_.lanes, 0);
}

std::vector<PpoSample> PpoTrainer::collect(Agent& agent, IterationMetrics& m) {
  const int n = cfg_.lanes;
  const int len = cfg_.rollout_length;
  const int na = agent.act_dim();
  // Indexed [lane][t].
  std::vector<std::vector<PpoSample>> samples(n);
  std::vector<std::vector<double>> rewards(n), values(n), next_values(n);
  std::vector<std::vector<std::uint8_t>> cut(n);
  std::vector<std::vector<double>> seen;
  double reward_sum = 0.0, return_sum = 0.0, length_sum = 0.0;

  std::vector<std::vector<double>> actions(n);
  for (int t = 0; t < len; ++t) {
    auto policy_step = [&](int i) {
      PpoSample s;
      s.obs = agent.obs_norm.normalize<double>(obs_[i]);
      const std::vector<double> mu = agent.policy.forward(agent.policy_params, s.obs);
      std::mt19937_64 rng(stream_seed(seed_ ^ 0x6e6f697365ULL, i, draws_[i]++));
      std::normal_distribution<double> normal(0.0, 1.0);
      s.z.resize(na);
      actions[i].resize(na);
      for (int j = 0; j < na; ++j) {
        s.z[j] = mu[j] + std::exp(agent.log_std[j]) * normal(rng);
        actions[i][j] = std::tanh(s.z[j]);
      }
      s.log_prob = gaussian_log_prob(s.z, mu, agent.log_std);
      values[i].push_back(agent.value.forward(agent.value_params, s.obs)[0]);
      samples[i].push_back(std::move(s));
    };
    if (pool_ != nullptr) {
      pool_->parallel_for(n, policy_step);
    } else {
      for (int i = 0; i < n; ++i) policy_step(i);
    }
    const std::vector<LaneStep<double>> steps = batch_.step(actions);
    for (int i = 0; i < n; ++i) {
      const LaneStep<double>& s = steps[i];
      seen.push_back(obs_[i]);
      rewards[i].push_back(s.reward);
      reward_sum += s.reward;
      episode_return_[i] += s.reward;
      m.unconverged += s.unconverged_solves;
      m.clamped += s.clamped_actions;
      cut[i].push_back(s.done ? 1 : 0);
      double boot = 0.0;
      if (s.termination == TerminationType::kTimeout) {
        boot = agent.value_of(s.terminal_observation, false);
      } else if (!s.done) {
        boot = agent.value_of(s.observation, false);
      }
      next_values[i].push_back(boot);
      if (s.done) {
        return_sum += episode_return_[i];
        length_sum += s.episode_length;
        ++m.episodes;
        episode_return_[i] = 0.0;
      }
      obs_[i] = s.observation;
    }
  }

  std::vector<PpoSample> flat;
  flat.reserve(static_cast<std::size_t>(n) * len);
  for (int i = 0; i < n; ++i) {
    const std::vector<double> adv = gae_advantages(rewards[i], values[i], next_values[i],
                                                   cut[i], cfg_.gamma, cfg_.gae_lambda);
    for (int t = 0; t < len; ++t) {
      samples[i][t].advantage = adv[t];
      samples[i][t].ret = adv[t] + values[i][t];
      flat.push_back(std::move(samples[i][t]));
    }
  }
  const std::int64_t steps = static_cast<std::int64_t>(n) * len;
  agent.env_steps += steps;
  m.env_steps = agent.env_steps;
  m.mean_reward = reward_sum / static_cast<double>(steps);
  if (m.episodes > 0) {
    m.episode_return = return_sum / m.episodes;
    m.episode_length = length_sum / m.episodes;
  }
  agent.obs_norm.update(seen);
  return flat;
}

IterationMetrics PpoTrainer::iterate(Agent& agent) {
  IterationMetrics m;
  m.iteration = agent.iteration;
  std::vector<PpoSample> data;
  try {
    data = collect(agent, m);
  } catch (const LaneFault&) {
    m.faults = 1;
    agent.env_steps += static_cast<std::int64_t>(cfg_.lanes) * cfg_.rollout_length;
    m.env_steps = agent.env_steps;
    obs_ = batch_.reset();
    std::fill(episode_return_.begin(), episode_return_.end(), 0.0);
    agent.iteration += 1;
    return m;
  }

  const int total = static_cast<int>(data.size());
  std::vector<int> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(stream_seed(seed_ ^ 0x70706fULL, 0,
                                  static_cast<std::uint64_t>(agent.iteration)));
  const int mb_count = std::min(cfg_.minibatches, total);
  double pl = 0.0, vl = 0.0, gn = 0.0;
  int updates = 0;
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int mb = 0; mb < mb_count; ++mb) {
      const int lo = mb * total / mb_count;
      const int hi = (mb + 1) * total / mb_count;
      PpoGradients g = ppo_gradients(
          agent, data, std::span<const int>(order.data() + lo, hi - lo), cfg_, pool_);
      bool finite = true;
      for (double v : g.actor) finite = finite && std::isfinite(v);
      for (double v : g.critic) finite = finite && std::isfinite(v);
      if (!finite) {
        m.faults = 1;
        agent.iteration += 1;
        return m;
      }
      gn += clip_grad_norm(g.actor, cfg_.grad_clip);
      clip_grad_norm(g.critic, cfg_.grad_clip);
      std::vector<double> actor = agent.actor_vector();
      agent.actor_opt.step(actor, g.actor);
      agent.set_actor_vector(actor);
      agent.critic_opt.step(agent.value_params, g.critic);
      pl += g.policy_loss;
      vl += g.value_loss;
      ++updates;
    }
  }
  if (updates > 0) {
    m.actor_loss = pl / updates;
    m.critic_loss = vl / updates;
    m.grad_norm = gn / updates;
  }
  // The target network is unused by PPO; keep it equal to the online one.
  agent.target_params = agent.value_params;
  agent.iteration += 1;
  return m;
}

}  // namespace dsim

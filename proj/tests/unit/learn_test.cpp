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
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dsim/ad/finite_difference.hpp"
#include "dsim/learn/checkpoint.hpp"
#include "dsim/learn/evaluate.hpp"
#include "dsim/learn/ppo.hpp"
#include "dsim/learn/returns.hpp"
#include "dsim/learn/shac.hpp"

namespace dsim {
namespace {

std::vector<double> random_vector(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// ---------------------------------------------------------------------------
// Networks and optimizers

TEST(Mlp, ParameterCount) {
  EXPECT_EQ(MlpShape({19, {128, 64}, 4}).num_params(),
            19 * 128 + 128 + 128 * 64 + 64 + 64 * 4 + 4);
  EXPECT_EQ(MlpShape({3, {}, 2}).num_params(), 8);
}

TEST(Mlp, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(1);
  const Mlp net(MlpShape{5, {7, 6}, 3});
  const std::vector<double> p = net.init(3, 1.0);
  const std::vector<double> x = random_vector(rng, 5);
  const std::vector<double> w = random_vector(rng, 3);
  auto loss_p = [&](std::span<const double> pp) {
    const auto y = net.forward(pp, x);
    double s = 0;
    for (int i = 0; i < 3; ++i) s += w[i] * y[i];
    return s;
  };
  auto loss_x = [&](std::span<const double> xx) {
    const auto y = net.forward(p, xx);
    double s = 0;
    for (int i = 0; i < 3; ++i) s += w[i] * y[i];
    return s;
  };
  MlpCache cache;
  net.forward(p, x, &cache);
  std::vector<double> gp(p.size(), 0.0);
  const std::vector<double> gx = net.backward(p, cache, w, gp);
  const auto fdp = ad::finite_difference(loss_p, p, 1e-6);
  const auto fdx = ad::finite_difference(loss_x, x, 1e-6);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_LT(ad::relative_error(gp[i], fdp[i]), 1e-8);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LT(ad::relative_error(gx[i], fdx[i]), 1e-8);
}

TEST(Mlp, TapeBlockMatchesManualBackward) {
  std::mt19937_64 rng(2);
  const Mlp net(MlpShape{4, {8}, 2});
  const std::vector<double> p = net.init(5, 1.0);
  const std::vector<double> x0 = random_vector(rng, 4);
  ad::Tape tape;
  ad::TapeScope scope(tape);
  std::vector<ad::Var> x;
  for (double v : x0) x.push_back(tape.input(v));
  // Feed the block a computed input so adjoints must flow past it.
  std::vector<ad::Var> xin{x[0] * x[1], ad::sin(x[1]), x[2], ad::Var(0.5)};
  std::vector<double> gp(p.size(), 0.0);
  const auto y = net.forward_var(p, xin, gp);
  const ad::Var loss = y[0] * 3.0 - y[1] * y[1];
  const auto gx = tape.gradient(loss, x);

  auto f = [&](std::span<const double> pp, std::span<const double> xx) {
    const std::vector<double> in{xx[0] * xx[1], std::sin(xx[1]), xx[2], 0.5};
    const auto yy = net.forward(pp, in);
    return yy[0] * 3.0 - yy[1] * yy[1];
  };
  EXPECT_DOUBLE_EQ(loss.value(), f(p, x0));
  const auto fdx = ad::finite_difference([&](std::span<const double> xx) { return f(p, xx); }, x0, 1e-6);
  const auto fdp = ad::finite_difference([&](std::span<const double> pp) { return f(pp, x0); }, p, 1e-6);
  for (std::size_t i = 0; i < x0.size(); ++i) EXPECT_LT(ad::relative_error(gx[i], fdx[i]), 1e-8);
  EXPECT_EQ(gx[3], 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_LT(ad::relative_error(gp[i], fdp[i]), 1e-8);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Adam opt(3, AdamConfig{0.1, 0.9, 0.999, 1e-12});
  std::vector<double> p{1.0, 1.0, 1.0};
  const std::vector<double> g{2.0, -0.001, 0.0};
  opt.step(p, g);
  EXPECT_NEAR(p[0], 0.9, 1e-12);
  EXPECT_NEAR(p[1], 1.1, 1e-9);
  EXPECT_EQ(p[2], 1.0);
  EXPECT_EQ(opt.steps(), 1);
}

TEST(Optim, ClipAndBlend) {
  std::vector<double> g{3.0, 4.0};
  EXPECT_DOUBLE_EQ(clip_grad_norm(g, 1.0), 5.0);
  EXPECT_NEAR(l2_norm(g), 1.0, 1e-15);
  std::vector<double> small{0.3, 0.4};
  clip_grad_norm(small, 1.0);
  EXPECT_EQ(small[0], 0.3);
  std::vector<double> t{0.0, 10.0};
  const std::vector<double> o{1.0, 0.0};
  blend_toward(t, o, 0.2);
  EXPECT_DOUBLE_EQ(t[0], 0.2);
  EXPECT_DOUBLE_EQ(t[1], 8.0);
  blend_toward(t, o, 1.0);
  EXPECT_EQ(t, o);
}

TEST(Normalizer, IncrementalMatchesPooledStatistics) {
  std::mt19937_64 rng(4);
  RunningNormalizer norm(3);
  std::vector<std::vector<double>> all;
  for (int b = 0; b < 5; ++b) {
    std::vector<std::vector<double>> batch;
    for (int k = 0; k < 7 + b; ++k) {
      auto row = random_vector(rng, 3, 2.0);
      row[1] += 5.0;
      batch.push_back(row);
      all.push_back(row);
    }
    norm.update(batch);
  }
  for (int i = 0; i < 3; ++i) {
    double m = 0, v = 0;
    for (const auto& r : all) m += r[i];
    m /= all.size();
    for (const auto& r : all) v += (r[i] - m) * (r[i] - m);
    v /= all.size();
    EXPECT_NEAR(norm.mean()[i], m, 1e-12);
    EXPECT_NEAR(norm.var()[i], v, 1e-12);
  }
  const std::vector<double> x{100.0, 5.0, -100.0};
  const auto y = norm.normalize<double>(x);
  EXPECT_EQ(y[0], 10.0);
  EXPECT_EQ(y[2], -10.0);
}

// ---------------------------------------------------------------------------
// Return estimators

TEST(TdLambda, LambdaOneIsMonteCarlo) {
  const std::vector<double> r{1, 1, 1}, v{0, 0, 0};
  const std::vector<std::uint8_t> cut{0, 0, 0};
  EXPECT_EQ(td_lambda_targets(r, v, cut, 1.0, 1.0), (std::vector<double>{3, 2, 1}));
}

TEST(TdLambda, LambdaZeroIsOneStep) {
  std::mt19937_64 rng(5);
  const auto r = random_vector(rng, 6), v = random_vector(rng, 6);
  const std::vector<std::uint8_t> cut{0, 0, 1, 0, 0, 0};
  const auto g = td_lambda_targets(r, v, cut, 0.9, 0.0);
  for (int t = 0; t < 6; ++t) EXPECT_DOUBLE_EQ(g[t], r[t] + 0.9 * v[t]);
}

// Direct expansion: (1 - lambda) sum_n lambda^(n-1) G^(n) with the tail
// weight on the longest available return.
double brute_force_target(const std::vector<double>& r, const std::vector<double>& v,
                          const std::vector<std::uint8_t>& cut, double gamma,
                          double lambda, int t) {
  int end = t;  // last step of the segment
  while (end + 1 < static_cast<int>(r.size()) && !cut[end]) ++end;
  const int max_n = end - t + 1;
  auto n_step = [&](int n) {
    double g = 0.0, d = 1.0;
    for (int k = 0; k < n; ++k) {
      g += d * r[t + k];
      d *= gamma;
    }
    return g + d * v[t + n - 1];
  };
  double target = 0.0;
  for (int n = 1; n < max_n; ++n) target += (1 - lambda) * std::pow(lambda, n - 1) * n_step(n);
  target += std::pow(lambda, max_n - 1) * n_step(max_n);
  return target;
}

TEST(TdLambda, MatchesBruteForceExpansion) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 12;
    const auto r = random_vector(rng, n), v = random_vector(rng, n);
    std::vector<std::uint8_t> cut(n);
    for (auto& c : cut) c = u(rng) < 0.2;
    const double gamma = u(rng), lambda = u(rng);
    const auto g = td_lambda_targets(r, v, cut, gamma, lambda);
    for (int t = 0; t < n; ++t) {
      EXPECT_NEAR(g[t], brute_force_target(r, v, cut, gamma, lambda, t), 1e-12);
    }
  }
}

TEST(Gae, LambdaOneGammaOneIsReturnMinusBaseline) {
  std::mt19937_64 rng(7);
  const auto r = random_vector(rng, 5), v = random_vector(rng, 5);
  std::vector<double> next(5);
  for (int t = 0; t < 4; ++t) next[t] = v[t + 1];
  next[4] = 0.7;
  const std::vector<std::uint8_t> cut(5, 0);
  const auto adv = gae_advantages(r, v, next, cut, 1.0, 1.0);
  const auto ret = td_lambda_targets(r, next, cut, 1.0, 1.0);
  for (int t = 0; t < 5; ++t) EXPECT_NEAR(adv[t], ret[t] - v[t], 1e-12);
}

// ---------------------------------------------------------------------------
// SHAC

EnvConfig bouncer_env() {
  EnvConfig cfg = default_env_config("bouncer1d");
  cfg.contact.gs_iters = 200;
  cfg.contact.gs_tol = 1e-13;
  return cfg;
}

TEST(Shac, ZeroObjectiveGivesZeroGradient) {
  EnvConfig ec = default_env_config("hopper2d");
  ec.reward = RewardWeights{0, 0, 0, 0, 0, 0, 0.25, 0.25};
  LocomotionEnv env(ec);
  ShacConfig sc;
  sc.lanes = 2;
  sc.horizon = 4;
  ShacTrainer trainer(env, sc, 3);
  Agent agent = Agent::create(env.observation_dim(), env.action_dim(), NetConfig{{16}, {16}},
                              1, trainer.actor_adam(), trainer.critic_adam());
  std::fill(agent.target_params.begin(), agent.target_params.end(), 0.0);
  const ShacWindow w = trainer.window(agent);
  EXPECT_EQ(w.loss, 0.0);
  for (double g : w.grad) EXPECT_EQ(g, 0.0);
}

TEST(Shac, GammaZeroHorizonOneIsMeanImmediateReward) {
  LocomotionEnv env(default_env_config("quadruped2d"));
  ShacConfig sc;
  sc.lanes = 3;
  sc.horizon = 1;
  sc.gamma = 0.0;
  ShacTrainer trainer(env, sc, 3);
  Agent agent = Agent::create(env.observation_dim(), env.action_dim(), NetConfig{{16}, {16}},
                              1, trainer.actor_adam(), trainer.critic_adam());
  const ShacWindow w = trainer.window(agent);
  double mean = 0.0;
  for (const auto& lw : w.lanes) mean += lw.rewards[0] / 3.0;
  EXPECT_NEAR(w.loss, -mean, 1e-12);
}

TEST(Shac, ActorGradientMatchesFiniteDifferencesOnBouncer) {
  LocomotionEnv env(bouncer_env());
  ShacConfig sc;
  sc.lanes = 1;
  sc.horizon = 4;
  ShacTrainer trainer(env, sc, 3);
  // Start just above the ground, falling, so the window crosses an impact.
  trainer.lanes()[0].state.q[0] = 0.004;
  trainer.lanes()[0].state.u[0] = -0.6;
  Agent agent = Agent::create(env.observation_dim(), env.action_dim(), NetConfig{{2}, {4}},
                              9, trainer.actor_adam(), trainer.critic_adam());
  ASSERT_LE(agent.policy_params.size(), 30u);
  // Sizeable weights so actions vary with the state.
  std::mt19937_64 rng(8);
  agent.policy_params = random_vector(rng, static_cast<int>(agent.policy_params.size()), 0.8);

  const ShacWindow w = trainer.window(agent);
  EXPECT_NEAR(w.loss, trainer.window_loss(agent), 1e-12);
  Agent probe = agent;
  auto f = [&](std::span<const double> p) {
    probe.policy_params.assign(p.begin(), p.end());
    return trainer.window_loss(probe);
  };
  const auto fd = ad::finite_difference(f, agent.policy_params, 1e-6);
  double norm = 0.0;
  for (std::size_t i = 0; i < fd.size(); ++i) {
    EXPECT_LT(ad::relative_error(w.grad[i], fd[i]), 1e-4) << "param " << i;
    norm += fd[i] * fd[i];
  }
  EXPECT_GT(norm, 1e-8);
}

TEST(Shac, WindowsAreIsolated) {
  // The gradient of the next window depends only on the states it starts
  // from, not on anything recorded in the previous window.
  EnvConfig ec = default_env_config("hopper2d");
  LocomotionEnv env(ec);
  ShacConfig sc;
  sc.lanes = 2;
  sc.horizon = 3;
  sc.critic_epochs = 0;
  ShacTrainer a(env, sc, 3);
  Agent agent = Agent::create(env.observation_dim(), env.action_dim(), NetConfig{{8}, {8}},
                              2, a.actor_adam(), a.critic_adam());
  const ShacWindow first = a.window(agent);

  EnvConfig changed = ec;
  changed.reward.tracking = 5.0;  // different rewards in the first window
  LocomotionEnv env2(changed);
  ShacTrainer b(env2, sc, 3);
  const ShacWindow first_b = b.window(agent);
  EXPECT_NE(first.grad, first_b.grad);

  ShacTrainer c(env, sc, 3);
  c.lanes() = first_b.final_states;
  a.lanes() = first.final_states;
  EXPECT_EQ(a.window(agent).grad, c.window(agent).grad);
}

TEST(Shac, IterationIsIndependentOfThreadCount) {
  LocomotionEnv env(default_env_config("hopper2d"));
  ShacConfig sc;
  sc.lanes = 4;
  sc.horizon = 5;
  sc.critic_epochs = 2;
  auto run = [&](int threads) {
    WorkerPool pool(threads);
    ShacTrainer t(env, sc, 11, &pool);
    Agent agent = Agent::create(env.observation_dim(), env.action_dim(), NetConfig{{16}, {16}},
                                4, t.actor_adam(), t.critic_adam());
    std::vector<IterationMetrics> ms;
    for (int i = 0; i < 3; ++i) ms.push_back(t.iterate(agent));
    return std::make_pair(agent, ms);
  };
  const auto [a1, m1] = run(1);
  const auto [a3, m3] = run(3);
  EXPECT_EQ(a1.policy_params, a3.policy_params);
  EXPECT_EQ(a1.value_params, a3.value_params);
  EXPECT_EQ(a1.target_params, a3.target_params);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(m1[i].actor_loss, m3[i].actor_loss);
    EXPECT_EQ(m1[i].critic_loss, m3[i].critic_loss);
  }
  EXPECT_EQ(a1.env_steps, 4 * 5 * 3);
}

TEST(Shac, NonFiniteGradientAbortsIteration) {
  LocomotionEnv env(default_env_config("hopper2d"));
  ShacConfig sc;
  sc.lanes = 2;
  sc.horizon = 2;
  ShacTrainer t(env, sc, 1);
  Agent agent = Agent::create(env.observation_dim(), env.action_dim(), NetConfig{{8}, {8}},
                              4, t.actor_adam(), t.critic_adam());
  agent.target_params.back() = std::numeric_limits<double>::quiet_NaN();
  const auto before = agent.policy_params;
  t.lanes()[0].step = 7;
  const IterationMetrics m = t.iterate(agent);
  EXPECT_EQ(m.faults, 1);
  EXPECT_EQ(agent.policy_params, before);
  EXPECT_EQ(t.lanes()[0].step, 0);  // lanes were reset
  EXPECT_EQ(m.env_steps, 4);
}

// ---------------------------------------------------------------------------
// PPO

TEST(Ppo, ClippedSurrogate) {
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.5, 2.0, 0.2), 1.2 * 2.0);
  EXPECT_EQ(clipped_surrogate_grad(1.5, 2.0, 0.2), 0.0);
  EXPECT_DOUBLE_EQ(clipped_surrogate(0.5, 2.0, 0.2), 0.5 * 2.0);
  EXPECT_EQ(clipped_surrogate_grad(0.5, 2.0, 0.2), 2.0);
  EXPECT_DOUBLE_EQ(clipped_surrogate(0.5, -1.0, 0.2), -0.8);
  EXPECT_EQ(clipped_surrogate_grad(1.0, 3.0, 0.2), 3.0);
}

TEST(Ppo, GaussianLogProb) {
  const std::vector<double> z{0.3}, mu{0.1}, ls{std::log(0.5)};
  const double e = 0.2 / 0.5;
  EXPECT_NEAR(gaussian_log_prob(z, mu, ls),
              -0.5 * e * e - std::log(0.5) - 0.5 * std::log(2 * M_PI), 1e-15);
}

struct PpoFixture {
  LocomotionEnv env{default_env_config("hopper2d")};
  PpoConfig cfg;
  Agent agent;
  std::vector<PpoSample> data;

  PpoFixture() {
    cfg.lanes = 4;
    cfg.rollout_length = 8;
    PpoTrainer t(env, cfg, 5);
    agent = Agent::create(env.observation_dim(), env.action_dim(), NetConfig{{16}, {16}},
                          3, t.adam(), t.adam());
    IterationMetrics m;
    data = t.collect(agent, m);
  }
  std::vector<int> all() const {
    std::vector<int> idx(data.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    return idx;
  }
};

TEST(Ppo, ZeroAdvantageLeavesOnlyEntropy) {
  PpoFixture f;
  for (auto& s : f.data) s.advantage = 0.0;
  f.cfg.normalize_advantages = false;
  f.cfg.entropy_coef = 0.01;
  const auto idx = f.all();
  const PpoGradients g = ppo_gradients(f.agent, f.data, idx, f.cfg);
  const std::size_t np = f.agent.policy_params.size();
  for (std::size_t i = 0; i < np; ++i) EXPECT_EQ(g.actor[i], 0.0);
  for (std::size_t j = np; j < g.actor.size(); ++j) EXPECT_DOUBLE_EQ(g.actor[j], -0.01);
}

TEST(Ppo, RatioIsOneOnFreshPolicy) {
  PpoFixture f;
  for (const auto& s : f.data) {
    const auto mu = f.agent.policy.forward(f.agent.policy_params, s.obs);
    EXPECT_NEAR(gaussian_log_prob(s.z, mu, f.agent.log_std), s.log_prob, 1e-12);
  }
}

TEST(Ppo, PositiveAdvantageIncreasesLikelihood) {
  PpoFixture f;
  for (auto& s : f.data) s.advantage = 1.0;
  f.cfg.normalize_advantages = false;
  const auto idx = f.all();
  const PpoGradients g = ppo_gradients(f.agent, f.data, idx, f.cfg);
  auto mean_log_prob = [&](const Agent& a) {
    double lp = 0.0;
    for (const auto& s : f.data) {
      lp += gaussian_log_prob(s.z, a.policy.forward(a.policy_params, s.obs), a.log_std);
    }
    return lp;
  };
  Agent moved = f.agent;
  std::vector<double> actor = moved.actor_vector();
  for (std::size_t i = 0; i < actor.size(); ++i) actor[i] -= 1e-3 * g.actor[i];
  moved.set_actor_vector(actor);
  EXPECT_GT(mean_log_prob(moved), mean_log_prob(f.agent));
}

TEST(Ppo, ActorGradientMatchesFiniteDifferences) {
  PpoFixture f;
  std::mt19937_64 rng(9);
  for (auto& s : f.data) s.advantage = random_vector(rng, 1)[0];
  // Move away from ratio = 1 without reaching the clip boundaries.
  for (auto& s : f.data) s.log_prob += 0.05;
  const auto idx = f.all();
  const PpoGradients g = ppo_gradients(f.agent, f.data, idx, f.cfg);
  auto loss = [&](std::span<const double> v) {
    Agent a = f.agent;
    a.set_actor_vector(v);
    return ppo_gradients(a, f.data, idx, f.cfg).policy_loss;
  };
  const auto x = f.agent.actor_vector();
  const auto fd = ad::finite_difference(loss, x, 1e-6);
  for (std::size_t i = 0; i < x.size(); i += 7) {
    EXPECT_LT(ad::relative_error(g.actor[i], fd[i]), 1e-6) << i;
  }
}

TEST(Ppo, IterationIsIndependentOfThreadCount) {
  LocomotionEnv env(default_env_config("hopper2d"));
  PpoConfig cfg;
  cfg.lanes = 4;
  cfg.rollout_length = 8;
  auto run = [&](int threads) {
    WorkerPool pool(threads);
    PpoTrainer t(env, cfg, 5, &pool);
    Agent a = Agent::create(env.observation_dim(), env.action_dim(), NetConfig{{16}, {16}},
                            3, t.adam(), t.adam());
    for (int i = 0; i < 2; ++i) t.iterate(a);
    return a;
  };
  const Agent a = run(1), b = run(4);
  EXPECT_EQ(a.policy_params, b.policy_params);
  EXPECT_EQ(a.log_std, b.log_std);
  EXPECT_EQ(a.value_params, b.value_params);
  EXPECT_EQ(a.env_steps, 64);
}

// ---------------------------------------------------------------------------
// Evaluation

TEST(Evaluate, UntrainedQuadrupedFalls) {
  LocomotionEnv env(default_env_config("quadruped2d"));
  NetConfig net;
  net.policy_output_gain = 3.0;  // an untrained policy that actually moves
  Agent agent = Agent::create(env.observation_dim(), env.action_dim(), net, 17,
                              AdamConfig{}, AdamConfig{});
  const EvalMetrics m = evaluate(agent, env, 4, 1);
  EXPECT_LT(m.mean_episode_length, env.config().episode_length);
}

TEST(Evaluate, SameSeedSameMetrics) {
  LocomotionEnv env(default_env_config("hopper2d"));
  Agent agent = Agent::create(env.observation_dim(), env.action_dim(), NetConfig{{16}, {16}},
                              5, AdamConfig{}, AdamConfig{});
  WorkerPool pool(3);
  const EvalMetrics a = evaluate(agent, env, 3, 8);
  const EvalMetrics b = evaluate(agent, env, 3, 8, &pool);
  EXPECT_EQ(a.mean_return, b.mean_return);
  EXPECT_EQ(a.mean_episode_length, b.mean_episode_length);
  EXPECT_EQ(a.mean_forward_velocity, b.mean_forward_velocity);
}

// ---------------------------------------------------------------------------
// Checkpoints

Agent trained_agent() {
  LocomotionEnv env(default_env_config("hopper2d"));
  PpoConfig cfg;
  cfg.lanes = 4;
  cfg.rollout_length = 8;
  PpoTrainer t(env, cfg, 5);
  Agent a = Agent::create(env.observation_dim(), env.action_dim(), NetConfig{{16, 8}, {12}},
                          3, t.adam(), t.adam());
  t.iterate(a);
  return a;
}

TEST(Checkpoint, RoundTripIsByteIdentical) {
  const Agent a = trained_agent();
  const CheckpointMeta meta{"ppo", "0123456789abcdef"};
  const std::string path = ::testing::TempDir() + "/ckpt_roundtrip.bin";
  save_checkpoint(path, a, meta);
  const LoadedCheckpoint loaded = load_checkpoint(path);
  EXPECT_EQ(serialize_checkpoint(loaded.agent, loaded.meta), serialize_checkpoint(a, meta));
  EXPECT_EQ(loaded.meta.config_hash, meta.config_hash);
  EXPECT_EQ(loaded.agent.policy_params, a.policy_params);
  EXPECT_EQ(loaded.agent.actor_opt.m(), a.actor_opt.m());
  EXPECT_EQ(loaded.agent.critic_opt.v(), a.critic_opt.v());
  EXPECT_EQ(loaded.agent.actor_opt.steps(), a.actor_opt.steps());
  EXPECT_EQ(loaded.agent.obs_norm.count(), a.obs_norm.count());
  EXPECT_EQ(loaded.agent.env_steps, a.env_steps);
}

TEST(Checkpoint, LoadedAgentEvaluatesIdentically) {
  const Agent a = trained_agent();
  const LoadedCheckpoint b = parse_checkpoint(serialize_checkpoint(a, {"ppo", "x"}));
  LocomotionEnv env(default_env_config("hopper2d"));
  const EvalMetrics ea = evaluate(a, env, 2, 3);
  const EvalMetrics eb = evaluate(b.agent, env, 2, 3);
  EXPECT_EQ(ea.mean_return, eb.mean_return);
  EXPECT_EQ(ea.mean_episode_length, eb.mean_episode_length);
}

TEST(Checkpoint, TruncatedFileIsRejected) {
  const std::vector<char> bytes = serialize_checkpoint(trained_agent(), {"ppo", "x"});
  for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{30}, bytes.size() - 8,
                          bytes.size() - 1}) {
    const std::vector<char> part(bytes.begin(), bytes.begin() + cut);
    EXPECT_THROW(parse_checkpoint(part), CheckpointError) << cut;
  }
}

TEST(Checkpoint, VersionMismatchIsRejected) {
  std::vector<char> bytes = serialize_checkpoint(trained_agent(), {"ppo", "x"});
  bytes[8] = 7;
  try {
    parse_checkpoint(bytes);
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
  bytes = serialize_checkpoint(trained_agent(), {"ppo", "x"});
  bytes[0] = 'X';
  EXPECT_THROW(parse_checkpoint(bytes), CheckpointError);
}

TEST(Checkpoint, MissingFile) {
  EXPECT_THROW(load_checkpoint("/nonexistent/ckpt.bin"), CheckpointError);
}

}  // namespace
}  // namespace dsim

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
#include "dsim/learn/agent.hpp"

#include <cmath>
#include <stdexcept>

#include "dsim/envs/seeding.hpp"

namespace dsim {

Agent Agent::create(int obs_dim, int act_dim, const NetConfig& net,
                    std::uint64_t seed, AdamConfig actor, AdamConfig critic) {
  Agent a;
  a.policy = Mlp(MlpShape{obs_dim, net.policy_hidden, act_dim});
  a.policy_params = a.policy.init(mix64(seed ^ 0x706f6c696379ULL), net.policy_output_gain);
  a.log_std.assign(act_dim, net.init_log_std);
  a.value = Mlp(MlpShape{obs_dim, net.value_hidden, 1});
  a.value_params = a.value.init(mix64(seed ^ 0x76616c7565ULL), 1.0);
  a.target_params = a.value_params;
  a.obs_norm = RunningNormalizer(obs_dim);
  a.actor_opt = Adam(a.actor_size(), actor);
  a.critic_opt = Adam(a.value_params.size(), critic);
  return a;
}

std::vector<double> Agent::policy_mean(std::span<const double> obs,
                                       MlpCache* cache) const {
  const std::vector<double> x = obs_norm.normalize(obs);
  return policy.forward(policy_params, x, cache);
}

std::vector<double> Agent::act(std::span<const double> obs) const {
  std::vector<double> a = policy_mean(obs);
  for (double& v : a) v = std::tanh(v);
  return a;
}

double Agent::value_of(std::span<const double> obs, bool target) const {
  const std::vector<double> x = obs_norm.normalize(obs);
  return value.forward(target ? target_params : value_params, x)[0];
}

std::vector<ad::Var> Agent::act_var(std::span<const ad::Var> obs,
                                    std::span<double> grad) const {
  const std::vector<ad::Var> x = obs_norm.normalize(obs);
  std::vector<ad::Var> mu = policy.forward_var(policy_params, x, grad);
  for (ad::Var& v : mu) v = ad::tanh(v);
  return mu;
}

ad::Var Agent::target_value_var(std::span<const ad::Var> obs) const {
  const std::vector<ad::Var> x = obs_norm.normalize(obs);
  return value.forward_var(target_params, x, {})[0];
}

std::vector<double> Agent::actor_vector() const {
  std::vector<double> v(policy_params);
  v.insert(v.end(), log_std.begin(), log_std.end());
  return v;
}

void Agent::set_actor_vector(std::span<const double> v) {
  if (v.size() != actor_size()) throw std::invalid_argument("actor vector size mismatch");
  std::copy(v.begin(), v.begin() + policy_params.size(), policy_params.begin());
  std::copy(v.begin() + policy_params.size(), v.end(), log_std.begin());
}

}  // namespace dsim

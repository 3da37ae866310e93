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
#include "dsim/envs/batch.hpp"

#include <stdexcept>

namespace dsim {

EnvBatch::EnvBatch(const LocomotionEnv& env, int lanes, std::uint64_t seed,
                   WorkerPool* pool)
    : env_(env), lanes_(lanes), seed_(seed), pool_(pool) {
  if (lanes < 1) throw std::invalid_argument("EnvBatch: need at least one lane");
}

std::vector<std::vector<double>> EnvBatch::reset() {
  for (int i = 0; i < size(); ++i) env_.reset_lane(lanes_[i], seed_, i);
  return observations();
}

std::vector<std::vector<double>> EnvBatch::observations() const {
  std::vector<std::vector<double>> obs(lanes_.size());
  for (int i = 0; i < size(); ++i) obs[i] = env_.observe(lanes_[i]);
  return obs;
}

std::vector<LaneStep<double>> EnvBatch::step(
    const std::vector<std::vector<double>>& actions) {
  if (static_cast<int>(actions.size()) != size()) {
    throw std::invalid_argument("EnvBatch::step: one action per lane required");
  }
  std::vector<LaneStep<double>> out(lanes_.size());
  auto one = [&](int i) {
    out[i] = env_.step_lane<double>(lanes_[i], actions[i], seed_, i);
  };
  if (pool_ != nullptr) {
    pool_->parallel_for(size(), one);
  } else {
    for (int i = 0; i < size(); ++i) one(i);
  }
  return out;
}

}  // namespace dsim

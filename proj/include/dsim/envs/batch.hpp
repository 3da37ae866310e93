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
#include <vector>

#include "dsim/envs/env.hpp"
#include "dsim/envs/parallel.hpp"

namespace dsim {

/// N lanes of one environment stepped in plain double precision.
class EnvBatch {
 public:
  EnvBatch(const LocomotionEnv& env, int lanes, std::uint64_t seed,
           WorkerPool* pool = nullptr);

  const LocomotionEnv& env() const { return env_; }
  int size() const { return static_cast<int>(lanes_.size()); }
  std::uint64_t seed() const { return seed_; }

  /// Starts a fresh episode in every lane; returns the observations.
  std::vector<std::vector<double>> reset();

  std::vector<LaneStep<double>> step(const std::vector<std::vector<double>>& actions);

  std::vector<std::vector<double>> observations() const;

  LaneState<double>& lane(int i) { return lanes_[i]; }
  const LaneState<double>& lane(int i) const { return lanes_[i]; }
  std::vector<LaneState<double>>& lanes() { return lanes_; }

 private:
  const LocomotionEnv& env_;
  std::vector<LaneState<double>> lanes_;
  std::uint64_t seed_;
  WorkerPool* pool_;
};

}  // namespace dsim

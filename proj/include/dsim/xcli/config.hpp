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

// Run configuration: one JSON document with sections
//   algorithm, seed, output_dir,
//   env {..., reward, randomization, termination}, contact, actuator,
//   net, shac, ppo, train.
// Defaults depend on env.system. Unknown keys are errors. `--set a.b=v`
// overrides are applied after the file; v is parsed as JSON when it is
// valid JSON and taken as a string otherwise.
//
// Infinite thresholds (disabled termination tests) are written as null.

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "dsim/envs/env.hpp"
#include "dsim/learn/agent.hpp"
#include "dsim/learn/ppo.hpp"
#include "dsim/learn/shac.hpp"

namespace dsim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainSettings {
  std::int64_t max_env_steps = 1000000;
  std::int64_t max_iterations = -1;  // < 0: no limit
  std::int64_t eval_interval = 50000;  // env steps; <= 0 disables
  int eval_episodes = 8;
  std::uint64_t eval_seed = 1000003;
  int checkpoint_interval = 100;  // iterations; <= 0 keeps only the final one
  int fault_budget = 10;
  // Stop once an evaluation reaches this mean return; NaN (JSON null) never stops.
  double stop_return = std::numeric_limits<double>::quiet_NaN();
};

struct RunConfig {
  std::string algorithm = "shac";
  std::uint64_t seed = 1;
  std::string output_dir = "run";
  EnvConfig env;
  NetConfig net;
  ShacConfig shac;
  PpoConfig ppo;
  TrainSettings train;

  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);

/// Defaults for `system`, then `file` (may be null), then overrides.
RunConfig resolve_config(const nlohmann::json& file,
                         const std::vector<std::string>& overrides);
RunConfig load_config(const std::string& path,
                      const std::vector<std::string>& overrides);

/// Resolved config text as written to config.resolved.
std::string resolved_text(const RunConfig& cfg);

/// FNV-1a 64 of the resolved config without output_dir, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace dsim

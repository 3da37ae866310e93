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

// Checkpoint file layout (all integers little-endian):
//
//   offset 0   8 bytes   magic "DSIMCKPT"
//   offset 8   u32       format version (kCheckpointVersion)
//   offset 12  u64       header length L
//   offset 20  L bytes   JSON header: dims, hidden sizes, optimizer
//                        settings and step counts, env steps, iteration,
//                        config hash, and "arrays": [{name, length}, ...]
//   then       f64 LE    the arrays, concatenated in header order:
//                        policy_params, log_std, value_params,
//                        target_params, actor_m, actor_v, critic_m,
//                        critic_v, obs_mean, obs_var
//
// The JSON header is written with sorted keys and no whitespace so that
// save -> load -> save reproduces the file byte for byte.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsim/learn/agent.hpp"

namespace dsim {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointMeta {
  std::string algorithm;
  std::string config_hash;
};

std::vector<char> serialize_checkpoint(const Agent& agent, const CheckpointMeta& meta);

/// Writes to `path` through a temporary file and a rename.
void save_checkpoint(const std::string& path, const Agent& agent,
                     const CheckpointMeta& meta);

struct LoadedCheckpoint {
  Agent agent;
  CheckpointMeta meta;
};

/// Throws CheckpointError with the reason on any malformed input; nothing
/// is returned partially.
LoadedCheckpoint parse_checkpoint(const std::vector<char>& bytes);
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace dsim

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
#include "dsim/learn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "json.hpp"

namespace dsim {
namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'D', 'S', 'I', 'M', 'C', 'K', 'P', 'T'};
constexpr std::size_t kPreamble = 8 + 4 + 8;

template <class U>
void put_le(std::vector<char>& out, U v) {
  unsigned char b[sizeof(U)];
  std::memcpy(b, &v, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(U));
  out.insert(out.end(), b, b + sizeof(U));
}

template <class U>
U get_le(const char* p) {
  unsigned char b[sizeof(U)];
  std::memcpy(b, p, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(U));
  U v;
  std::memcpy(&v, b, sizeof(U));
  return v;
}

json adam_json(const Adam& a) {
  return {{"lr", a.config().lr},
          {"beta1", a.config().beta1},
          {"beta2", a.config().beta2},
          {"eps", a.config().eps},
          {"steps", a.steps()}};
}

AdamConfig adam_config(const json& j) {
  return {j.at("lr").get<double>(), j.at("beta1").get<double>(),
          j.at("beta2").get<double>(), j.at("eps").get<double>()};
}

struct NamedArray {
  const char* name;
  std::vector<double>* data;
};

std::vector<NamedArray> arrays_of(Agent& a) {
  return {{"policy_params", &a.policy_params}, {"log_std", &a.log_std},
          {"value_params", &a.value_params},   {"target_params", &a.target_params},
          {"actor_m", &a.actor_opt.m()},       {"actor_v", &a.actor_opt.v()},
          {"critic_m", &a.critic_opt.m()},     {"critic_v", &a.critic_opt.v()},
          {"obs_mean", &a.obs_norm.mean()},    {"obs_var", &a.obs_norm.var()}};
}

}  // namespace

std::vector<char> serialize_checkpoint(const Agent& agent, const CheckpointMeta& meta) {
  Agent& a = const_cast<Agent&>(agent);  // arrays_of only reads here
  json header;
  header["format_version"] = kCheckpointVersion;
  header["algorithm"] = meta.algorithm;
  header["config_hash"] = meta.config_hash;
  header["obs_dim"] = agent.obs_dim();
  header["act_dim"] = agent.act_dim();
  header["policy_hidden"] = agent.policy.shape().hidden;
  header["value_hidden"] = agent.value.shape().hidden;
  header["env_steps"] = agent.env_steps;
  header["iteration"] = agent.iteration;
  header["actor_adam"] = adam_json(agent.actor_opt);
  header["critic_adam"] = adam_json(agent.critic_opt);
  header["normalizer"] = {{"count", agent.obs_norm.count()}, {"clip", agent.obs_norm.clip()}};
  json arrays = json::array();
  for (const NamedArray& na : arrays_of(a)) {
    arrays.push_back({{"name", na.name}, {"length", na.data->size()}});
  }
  header["arrays"] = arrays;
  const std::string text = header.dump();

  std::vector<char> out(kMagic, kMagic + 8);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const NamedArray& na : arrays_of(a)) {
    for (double v : *na.data) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

void save_checkpoint(const std::string& path, const Agent& agent,
                     const CheckpointMeta& meta) {
  const std::vector<char> bytes = serialize_checkpoint(agent, meta);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw CheckpointError("cannot open '" + tmp + "' for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw CheckpointError("write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

LoadedCheckpoint parse_checkpoint(const std::vector<char>& bytes) {
  if (bytes.size() < kPreamble) throw CheckpointError("file too short for a checkpoint preamble");
  if (std::memcmp(bytes.data(), kMagic, 8) != 0) throw CheckpointError("bad magic: not a checkpoint");
  const auto version = get_le<std::uint32_t>(bytes.data() + 8);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version) +
                          " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const auto header_len = get_le<std::uint64_t>(bytes.data() + 12);
  if (header_len > bytes.size() - kPreamble) throw CheckpointError("truncated header");
  json h;
  try {
    h = json::parse(bytes.begin() + kPreamble, bytes.begin() + kPreamble + header_len);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed header: ") + e.what());
  }

  LoadedCheckpoint out;
  try {
    if (h.at("format_version").get<std::uint32_t>() != version) {
      throw CheckpointError("header version disagrees with preamble");
    }
    out.meta.algorithm = h.at("algorithm").get<std::string>();
    out.meta.config_hash = h.at("config_hash").get<std::string>();
    NetConfig net;
    net.policy_hidden = h.at("policy_hidden").get<std::vector<int>>();
    net.value_hidden = h.at("value_hidden").get<std::vector<int>>();
    const int obs_dim = h.at("obs_dim").get<int>();
    const int act_dim = h.at("act_dim").get<int>();
    if (obs_dim < 1 || act_dim < 1) throw CheckpointError("invalid dimensions in header");
    Agent a = Agent::create(obs_dim, act_dim, net, 0, adam_config(h.at("actor_adam")),
                            adam_config(h.at("critic_adam")));
    a.actor_opt.set_steps(h.at("actor_adam").at("steps").get<std::int64_t>());
    a.critic_opt.set_steps(h.at("critic_adam").at("steps").get<std::int64_t>());
    a.env_steps = h.at("env_steps").get<std::int64_t>();
    a.iteration = h.at("iteration").get<std::int64_t>();
    a.obs_norm = RunningNormalizer(obs_dim, h.at("normalizer").at("clip").get<double>());
    a.obs_norm.set_count(h.at("normalizer").at("count").get<double>());

    const json& arrays = h.at("arrays");
    std::vector<NamedArray> expected = arrays_of(a);
    if (arrays.size() != expected.size()) throw CheckpointError("unexpected array list in header");
    std::size_t offset = kPreamble + header_len;
    for (std::size_t k = 0; k < expected.size(); ++k) {
      const std::string name = arrays[k].at("name").get<std::string>();
      const auto length = arrays[k].at("length").get<std::size_t>();
      if (name != expected[k].name) {
        throw CheckpointError("array " + std::to_string(k) + " is '" + name + "', expected '" +
                              expected[k].name + "'");
      }
      if (length != expected[k].data->size()) {
        throw CheckpointError("array '" + name + "' has length " + std::to_string(length) +
                              ", expected " + std::to_string(expected[k].data->size()));
      }
      if (bytes.size() - offset < length * 8) throw CheckpointError("truncated array '" + name + "'");
      for (std::size_t i = 0; i < length; ++i) {
        (*expected[k].data)[i] = std::bit_cast<double>(get_le<std::uint64_t>(bytes.data() + offset));
        offset += 8;
      }
    }
    if (offset != bytes.size()) throw CheckpointError("trailing bytes after the last array");
    out.agent = std::move(a);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed header: ") + e.what());
  }
  return out;
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open '" + path + "'");
  const std::vector<char> bytes((std::istreambuf_iterator<char>(f)),
                                std::istreambuf_iterator<char>());
  return parse_checkpoint(bytes);
}

}  // namespace dsim

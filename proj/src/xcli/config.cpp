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
#include "dsim/xcli/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace dsim {
namespace {

using nlohmann::json;

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double read_or(const json& j, double if_null) {
  return j.is_null() ? if_null : j.get<double>();
}

json env_json(const EnvConfig& e) {
  const RewardWeights& w = e.reward;
  const RandomizationConfig& r = e.randomization;
  return {
      {"system", e.system},
      {"dt", e.dt},
      {"decimation", e.decimation},
      {"episode_length", e.episode_length},
      {"command_min", e.command_min},
      {"command_max", e.command_max},
      {"action_scale", e.action_scale},
      {"target_height", finite_or_null(e.target_height)},
      {"accept_unconverged", e.accept_unconverged},
      {"reward",
       {{"tracking", w.tracking},
        {"upright", w.upright},
        {"height", w.height},
        {"action_rate", w.action_rate},
        {"joint_velocity", w.joint_velocity},
        {"torque", w.torque},
        {"sigma_velocity", w.sigma_velocity},
        {"sigma_pitch", w.sigma_pitch}}},
      {"randomization",
       {{"level", r.level},
        {"friction_min", r.friction_min},
        {"friction_max", r.friction_max},
        {"mass_scale_min", r.mass_scale_min},
        {"mass_scale_max", r.mass_scale_max},
        {"init_noise", r.init_noise}}},
      {"termination",
       {{"min_base_height", finite_or_null(e.termination.min_base_height)},
        {"max_pitch", finite_or_null(e.termination.max_pitch)}}},
  };
}

json contact_json(const ContactModelConfig& c) {
  return {{"kind", to_string(c.kind)},
          {"sharpness", c.sharpness},
          {"stiffness", c.stiffness},
          {"damping", c.damping},
          {"friction", c.friction},
          {"restitution", c.restitution},
          {"gs_iters", c.gs_iters},
          {"gs_tol", c.gs_tol},
          {"margin_factor", c.margin_factor},
          {"soft_slip_velocity", c.soft_slip_velocity}};
}

json actuator_json(const ActuatorConfig& a) {
  return {{"kp", a.kp},
          {"kd", a.kd},
          {"stall_torque", a.stall_torque},
          {"speed_slope", a.speed_slope},
          {"mode", to_string(a.mode)}};
}

// Recursively overlays `patch` on `base`; every key in `patch` must already
// exist in `base`.
void overlay(json& base, const json& patch, const std::string& path) {
  if (!patch.is_object()) throw ConfigError("config section '" + path + "' must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      overlay(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return json(text);
  }
}

// Turns {"a.b": v} style overrides into a nested patch.
json overrides_patch(const std::vector<std::string>& overrides) {
  json patch = json::object();
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("override '" + o + "' is not of the form key=value");
    }
    const std::string key = o.substr(0, eq);
    json* node = &patch;
    std::size_t start = 0;
    for (;;) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
      if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
      if (dot == std::string::npos) {
        (*node)[part] = parse_value(o.substr(eq + 1));
        break;
      }
      node = &(*node)[part];
      if (!node->is_object()) *node = json::object();
      start = dot + 1;
    }
  }
  return patch;
}

std::string system_of(const json& file, const json& patch) {
  std::string system = "hopper2d";
  for (const json* j : {&file, &patch}) {
    if (j->is_object() && j->contains("env") && (*j)["env"].is_object() &&
        (*j)["env"].contains("system")) {
      system = (*j)["env"]["system"].get<std::string>();
    }
  }
  return system;
}

}  // namespace

json to_json(const RunConfig& c) {
  const NetConfig& n = c.net;
  const ShacConfig& s = c.shac;
  const PpoConfig& p = c.ppo;
  const TrainSettings& t = c.train;
  return {
      {"algorithm", c.algorithm},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"env", env_json(c.env)},
      {"contact", contact_json(c.env.contact)},
      {"actuator", actuator_json(c.env.actuator)},
      {"net",
       {{"policy_hidden", n.policy_hidden},
        {"value_hidden", n.value_hidden},
        {"init_log_std", n.init_log_std},
        {"policy_output_gain", n.policy_output_gain}}},
      {"shac",
       {{"horizon", s.horizon},
        {"gamma", s.gamma},
        {"lambda", s.lambda},
        {"actor_lr", s.actor_lr},
        {"critic_lr", s.critic_lr},
        {"critic_epochs", s.critic_epochs},
        {"critic_minibatches", s.critic_minibatches},
        {"target_alpha", s.target_alpha},
        {"grad_clip", s.grad_clip},
        {"lanes", s.lanes},
        {"adam_beta1", s.adam_beta1},
        {"adam_beta2", s.adam_beta2},
        {"linear_lr_decay", s.linear_lr_decay},
        {"final_lr", s.final_lr},
        {"lr_decay_steps", s.lr_decay_steps}}},
      {"ppo",
       {{"rollout_length", p.rollout_length},
        {"gamma", p.gamma},
        {"gae_lambda", p.gae_lambda},
        {"clip_ratio", p.clip_ratio},
        {"epochs", p.epochs},
        {"minibatches", p.minibatches},
        {"entropy_coef", p.entropy_coef},
        {"value_coef", p.value_coef},
        {"lr", p.lr},
        {"grad_clip", p.grad_clip},
        {"lanes", p.lanes},
        {"normalize_advantages", p.normalize_advantages}}},
      {"train",
       {{"max_env_steps", t.max_env_steps},
        {"max_iterations", t.max_iterations},
        {"eval_interval", t.eval_interval},
        {"eval_episodes", t.eval_episodes},
        {"eval_seed", t.eval_seed},
        {"checkpoint_interval", t.checkpoint_interval},
        {"fault_budget", t.fault_budget},
        {"stop_return", finite_or_null(t.stop_return)}}},
  };
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  try {
    c.algorithm = j.at("algorithm").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.output_dir = j.at("output_dir").get<std::string>();

    const json& e = j.at("env");
    EnvConfig& ec = c.env;
    ec.system = e.at("system").get<std::string>();
    ec.dt = e.at("dt").get<double>();
    ec.decimation = e.at("decimation").get<int>();
    ec.episode_length = e.at("episode_length").get<int>();
    ec.command_min = e.at("command_min").get<double>();
    ec.command_max = e.at("command_max").get<double>();
    ec.action_scale = e.at("action_scale").get<double>();
    ec.target_height = read_or(e.at("target_height"), std::numeric_limits<double>::quiet_NaN());
    ec.accept_unconverged = e.at("accept_unconverged").get<bool>();
    const json& w = e.at("reward");
    ec.reward = {w.at("tracking").get<double>(),       w.at("upright").get<double>(),
                 w.at("height").get<double>(),         w.at("action_rate").get<double>(),
                 w.at("joint_velocity").get<double>(), w.at("torque").get<double>(),
                 w.at("sigma_velocity").get<double>(), w.at("sigma_pitch").get<double>()};
    const json& r = e.at("randomization");
    ec.randomization = {r.at("level").get<double>(),          r.at("friction_min").get<double>(),
                        r.at("friction_max").get<double>(),   r.at("mass_scale_min").get<double>(),
                        r.at("mass_scale_max").get<double>(), r.at("init_noise").get<double>()};
    const double inf = std::numeric_limits<double>::infinity();
    ec.termination.min_base_height = read_or(e.at("termination").at("min_base_height"), -inf);
    ec.termination.max_pitch = read_or(e.at("termination").at("max_pitch"), inf);

    const json& k = j.at("contact");
    ContactModelConfig& cc = ec.contact;
    cc.kind = contact_kind_from_string(k.at("kind").get<std::string>());
    cc.sharpness = k.at("sharpness").get<double>();
    cc.stiffness = k.at("stiffness").get<double>();
    cc.damping = k.at("damping").get<double>();
    cc.friction = k.at("friction").get<double>();
    cc.restitution = k.at("restitution").get<double>();
    cc.gs_iters = k.at("gs_iters").get<int>();
    cc.gs_tol = k.at("gs_tol").get<double>();
    cc.margin_factor = k.at("margin_factor").get<double>();
    cc.soft_slip_velocity = k.at("soft_slip_velocity").get<double>();

    const json& a = j.at("actuator");
    ec.actuator.kp = a.at("kp").get<double>();
    ec.actuator.kd = a.at("kd").get<double>();
    ec.actuator.stall_torque = a.at("stall_torque").get<double>();
    ec.actuator.speed_slope = a.at("speed_slope").get<double>();
    ec.actuator.mode = saturation_mode_from_string(a.at("mode").get<std::string>());

    const json& n = j.at("net");
    c.net.policy_hidden = n.at("policy_hidden").get<std::vector<int>>();
    c.net.value_hidden = n.at("value_hidden").get<std::vector<int>>();
    c.net.init_log_std = n.at("init_log_std").get<double>();
    c.net.policy_output_gain = n.at("policy_output_gain").get<double>();

    const json& s = j.at("shac");
    ShacConfig& sc = c.shac;
    sc.horizon = s.at("horizon").get<int>();
    sc.gamma = s.at("gamma").get<double>();
    sc.lambda = s.at("lambda").get<double>();
    sc.actor_lr = s.at("actor_lr").get<double>();
    sc.critic_lr = s.at("critic_lr").get<double>();
    sc.critic_epochs = s.at("critic_epochs").get<int>();
    sc.critic_minibatches = s.at("critic_minibatches").get<int>();
    sc.target_alpha = s.at("target_alpha").get<double>();
    sc.grad_clip = s.at("grad_clip").get<double>();
    sc.lanes = s.at("lanes").get<int>();
    sc.adam_beta1 = s.at("adam_beta1").get<double>();
    sc.adam_beta2 = s.at("adam_beta2").get<double>();
    sc.linear_lr_decay = s.at("linear_lr_decay").get<bool>();
    sc.final_lr = s.at("final_lr").get<double>();
    sc.lr_decay_steps = s.at("lr_decay_steps").get<std::int64_t>();

    const json& p = j.at("ppo");
    PpoConfig& pc = c.ppo;
    pc.rollout_length = p.at("rollout_length").get<int>();
    pc.gamma = p.at("gamma").get<double>();
    pc.gae_lambda = p.at("gae_lambda").get<double>();
    pc.clip_ratio = p.at("clip_ratio").get<double>();
    pc.epochs = p.at("epochs").get<int>();
    pc.minibatches = p.at("minibatches").get<int>();
    pc.entropy_coef = p.at("entropy_coef").get<double>();
    pc.value_coef = p.at("value_coef").get<double>();
    pc.lr = p.at("lr").get<double>();
    pc.grad_clip = p.at("grad_clip").get<double>();
    pc.lanes = p.at("lanes").get<int>();
    pc.normalize_advantages = p.at("normalize_advantages").get<bool>();

    const json& t = j.at("train");
    TrainSettings& ts = c.train;
    ts.max_env_steps = t.at("max_env_steps").get<std::int64_t>();
    ts.max_iterations = t.at("max_iterations").get<std::int64_t>();
    ts.eval_interval = t.at("eval_interval").get<std::int64_t>();
    ts.eval_episodes = t.at("eval_episodes").get<int>();
    ts.eval_seed = t.at("eval_seed").get<std::uint64_t>();
    ts.checkpoint_interval = t.at("checkpoint_interval").get<int>();
    ts.fault_budget = t.at("fault_budget").get<int>();
    ts.stop_return = read_or(t.at("stop_return"), std::numeric_limits<double>::quiet_NaN());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

void RunConfig::validate() const {
  try {
    if (algorithm != "shac" && algorithm != "ppo") {
      throw ConfigError("algorithm must be 'shac' or 'ppo'");
    }
    env.validate();
    shac.validate();
    ppo.validate();
    if (train.max_env_steps < 0) throw ConfigError("train.max_env_steps must be >= 0");
    if (train.eval_episodes < 1) throw ConfigError("train.eval_episodes must be >= 1");
    if (train.fault_budget < 0) throw ConfigError("train.fault_budget must be >= 0");
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

RunConfig resolve_config(const json& file, const std::vector<std::string>& overrides) {
  if (!file.is_null() && !file.is_object()) throw ConfigError("config root must be an object");
  const json patch = overrides_patch(overrides);
  RunConfig defaults;
  const std::string system = system_of(file, patch);
  try {
    defaults.env = default_env_config(system);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  json merged = to_json(defaults);
  if (!file.is_null()) overlay(merged, file, "");
  overlay(merged, patch, "");
  RunConfig c = run_config_from_json(merged);
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  json file;
  if (!path.empty()) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config '" + path + "'");
    try {
      file = json::parse(f, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
      throw ConfigError("cannot parse config '" + path + "': " + e.what());
    }
  }
  return resolve_config(file, overrides);
}

std::string resolved_text(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const RunConfig& cfg) {
  json j = to_json(cfg);
  j.erase("output_dir");
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

}  // namespace dsim

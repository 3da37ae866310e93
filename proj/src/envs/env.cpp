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
#include "dsim/envs/env.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dsim/envs/seeding.hpp"

namespace dsim {
namespace {

// Interval [lo, hi] pulled linearly toward `nominal` by (1 - level).
double scaled_uniform(std::mt19937_64& rng, double nominal, double lo, double hi,
                      double level) {
  const double a = nominal + level * (lo - nominal);
  const double b = nominal + level * (hi - nominal);
  if (a == b) return a;
  return std::uniform_real_distribution<double>(a, b)(rng);
}

double symmetric(std::mt19937_64& rng, double half_width) {
  if (half_width == 0.0) return 0.0;
  return std::uniform_real_distribution<double>(-half_width, half_width)(rng);
}

}  // namespace

void EnvConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("env config: " + what);
  };
  make_system(system);
  if (!(dt > 0.0)) fail("dt must be positive");
  if (decimation < 1) fail("decimation must be >= 1");
  if (episode_length < 1) fail("episode_length must be >= 1");
  if (!std::isfinite(command_min) || !std::isfinite(command_max) ||
      command_min > command_max) {
    fail("command range must be finite with min <= max");
  }
  if (!(action_scale >= 0.0)) fail("action_scale must be >= 0");
  const auto& r = randomization;
  if (!(r.level >= 0.0 && r.level <= 1.0)) fail("randomization level must be in [0, 1]");
  if (!(r.friction_min >= 0.0 && r.friction_min <= r.friction_max)) {
    fail("friction range must satisfy 0 <= min <= max");
  }
  if (!(r.mass_scale_min > 0.0 && r.mass_scale_min <= r.mass_scale_max)) {
    fail("mass-scale range must satisfy 0 < min <= max");
  }
  if (!(r.init_noise >= 0.0)) fail("init_noise must be >= 0");
  if (!(reward.sigma_velocity > 0.0 && reward.sigma_pitch > 0.0)) {
    fail("reward widths must be positive");
  }
  contact.validate();
  actuator.validate();
}

EnvConfig default_env_config(const std::string& system) {
  EnvConfig cfg;
  cfg.system = system;
  // A sticking foot converges linearly in the normal/tangential coupling and
  // can need >1000 sweeps to reach gs_tol; such solves are accepted and
  // counted rather than aborting the rollout.
  cfg.contact.gs_iters = 100;
  cfg.accept_unconverged = true;
  // The PD torque is explicit in the sub-step. With h = dt and lambda the
  // largest eigenvalue of the actuated block of M^-1, the free leg is stable
  // only for h kp / 2 < kd < 2 / (h lambda); the legged systems get a kd
  // inside that window for dt up to 5e-3 and 0.8x mass scaling.
  const double inf = std::numeric_limits<double>::infinity();
  if (system == "bouncer1d" || system == "pendulum") {
    cfg.command_min = cfg.command_max = 0.0;
    cfg.termination.min_base_height = -inf;
    cfg.termination.max_pitch = inf;
    cfg.episode_length = 200;
  } else if (system == "hopper2d") {
    cfg.termination.min_base_height = 0.25;
    cfg.termination.max_pitch = inf;
    cfg.actuator.kd = 0.5;
  } else if (system == "quadruped2d") {
    cfg.termination.min_base_height = 0.18;
    cfg.termination.max_pitch = 0.8;
    cfg.actuator.kd = 0.25;
  } else {
    make_system(system);  // throws
  }
  return cfg;
}

LocomotionEnv::LocomotionEnv(EnvConfig cfg)
    : cfg_(std::move(cfg)), model_(make_system(cfg_.system)) {
  cfg_.validate();
  nominal_ = nominal_state(model_);
  const int iz = model_.base_index(BaseCoordinate::kZ);
  const double nominal_height = iz >= 0 ? nominal_.q[iz] : model_.fixed_z;
  target_height_ = std::isnan(cfg_.target_height) ? nominal_height : cfg_.target_height;
}

SystemModel LocomotionEnv::lane_model(const std::vector<double>& mass_scale) const {
  SystemModel m = model_;
  if (mass_scale.empty()) return m;
  m.base_mass *= mass_scale[0];
  m.base_inertia *= mass_scale[0];
  for (std::size_t l = 0; l < m.links.size(); ++l) {
    m.links[l].mass *= mass_scale[l + 1];
    m.links[l].inertia *= mass_scale[l + 1];
  }
  return m;
}

void LocomotionEnv::reset_lane(LaneState<double>& lane, std::uint64_t seed,
                               int index) const {
  std::mt19937_64 rng(stream_seed(seed, static_cast<std::uint64_t>(index), lane.episode));
  const auto& r = cfg_.randomization;
  const double level = r.level;

  lane.episode += 1;
  lane.step = 0;
  lane.prev_action.assign(action_dim(), 0.0);
  lane.command = cfg_.command_min == cfg_.command_max
                     ? cfg_.command_min
                     : std::uniform_real_distribution<double>(cfg_.command_min,
                                                              cfg_.command_max)(rng);
  lane.friction = scaled_uniform(rng, cfg_.contact.friction, r.friction_min,
                                 r.friction_max, level);
  lane.mass_scale.assign(model_.num_bodies(), 1.0);
  for (double& m : lane.mass_scale) {
    m = scaled_uniform(rng, 1.0, r.mass_scale_min, r.mass_scale_max, level);
  }

  lane.state = nominal_;
  const double noise = level * r.init_noise;
  if (noise == 0.0) return;
  const int n = model_.dof();
  const int ip = model_.base_index(BaseCoordinate::kPitch);
  for (int i = 0; i < n; ++i) {
    const bool base = i < static_cast<int>(model_.base_coordinates.size());
    if (!base || i == ip) lane.state.q[i] += symmetric(rng, noise);
    lane.state.u[i] += symmetric(rng, noise);
  }
  for (std::size_t l = 0; l < model_.links.size(); ++l) {
    double& q = lane.state.q[model_.joint_index(static_cast<int>(l))];
    q = std::clamp(q, model_.links[l].lower_limit, model_.links[l].upper_limit);
  }
  // Keep the lowest site on the ground after perturbing the pose.
  if (const int iz = model_.base_index(BaseCoordinate::kZ);
      iz >= 0 && !model_.contact_sites.empty() && model_.links.size() > 0) {
    const Kinematics<double> k = forward_kinematics(model_, lane.state.q);
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& site : model_.contact_sites) {
      lowest = std::min(lowest, body_point(k, site.body, site.x, site.z).z);
    }
    lane.state.q[iz] -= lowest;
  }
}

}  // namespace dsim

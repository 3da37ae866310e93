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

// Locomotion environments over the shipped planar systems.
//
// A lane is one independent environment instance. Lane stepping is written
// once as a template over the scalar so the same code serves plain rollouts
// (double) and differentiable rollouts (ad::Var). Per-lane randomness is
// drawn only at reset, from a stream keyed by (seed, lane, episode), so
// trajectories do not depend on the order in which lanes are stepped.
//
// Observation layout (dimension 6 + 3 * num_actuated + 1):
//   [0]  base height (m)
//   [1]  sin(pitch)
//   [2]  cos(pitch)
//   [3]  base forward velocity (m/s)
//   [4]  base vertical velocity (m/s)
//   [5]  base pitch rate (rad/s)
//   then actuated coordinate positions, actuated coordinate velocities,
//   previous action, commanded forward velocity.
// Coordinates a system does not have read as 0 (pitch 0, so cos = 1).

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsim/actuation/actuator.hpp"
#include "dsim/ad/ops.hpp"
#include "dsim/dynamics/moreau.hpp"
#include "dsim/dynamics/systems.hpp"

namespace dsim {

struct RewardWeights {
  double tracking = 1.0;         // w_a
  double upright = 0.3;          // w_b
  double height = 0.2;           // w_c
  double action_rate = 0.05;     // w_d
  double joint_velocity = 1e-3;  // w_e
  double torque = 2e-5;          // w_f
  double sigma_velocity = 0.25;  // m/s
  double sigma_pitch = 0.25;     // rad
};

struct RandomizationConfig {
  double level = 0.0;  // 0 disables all randomization
  double friction_min = 0.5;
  double friction_max = 1.25;
  double mass_scale_min = 0.8;
  double mass_scale_max = 1.2;
  double init_noise = 0.1;  // rad (joints, pitch) and rad/s, m/s (velocities)
};

struct TerminationConfig {
  double min_base_height = 0.0;  // m
  double max_pitch = 1.0;        // rad
};

struct EnvConfig {
  std::string system = "hopper2d";
  double dt = 2.5e-3;
  int decimation = 8;
  int episode_length = 500;
  double command_min = 0.3;  // m/s
  double command_max = 0.6;
  double action_scale = 0.5;  // joint target offset per unit action (rad, or m)
  // Base-height target; NaN selects the nominal standing height.
  double target_height = std::numeric_limits<double>::quiet_NaN();
  bool accept_unconverged = false;
  RewardWeights reward;
  RandomizationConfig randomization;
  TerminationConfig termination;
  ContactModelConfig contact;
  ActuatorConfig actuator;

  void validate() const;
};

/// Reasonable per-system defaults (termination thresholds, commands).
EnvConfig default_env_config(const std::string& system);

enum class TerminationType { kNone, kFall, kTimeout };

template <class T>
struct LaneState {
  GeneralizedState<T> state;
  std::vector<T> prev_action;
  double command = 0.0;
  int step = 0;
  std::uint64_t episode = 0;  // episodes started in this lane
  double friction = 0.0;
  std::vector<double> mass_scale;  // per body

  template <class U>
  LaneState<U> cast() const {
    LaneState<U> out;
    out.state = state.template cast<U>();
    for (const T& a : prev_action) out.prev_action.push_back(U(ad::value(a)));
    out.command = command;
    out.step = step;
    out.episode = episode;
    out.friction = friction;
    out.mass_scale = mass_scale;
    return out;
  }
};

template <class T>
struct LaneStep {
  std::vector<T> observation;
  T reward{0.0};
  bool done = false;
  TerminationType termination = TerminationType::kNone;
  std::vector<T> terminal_observation;  // set when done
  int clamped_actions = 0;
  int unconverged_solves = 0;  // sub-steps whose contact solve hit gs_iters
  double forward_velocity = 0.0;
  int episode_length = 0;  // set when done
  double command = 0.0;    // command of the step's episode
};

/// An environment step failed inside the simulator.
class LaneFault : public std::runtime_error {
 public:
  LaneFault(int lane, const std::string& what)
      : std::runtime_error("lane " + std::to_string(lane) + ": " + what),
        lane_(lane) {}
  int lane() const { return lane_; }

 private:
  int lane_;
};

template <class T>
struct RewardInputs {
  T forward_velocity;
  T pitch;
  T height;
  std::span<const T> action;
  std::span<const T> prev_action;
  std::span<const T> joint_velocity;
  std::span<const T> torque;
  double command;
  double target_height;
};

/// Weighted sum of smooth terms; bounded above by tracking + upright.
template <class T>
T reward(const RewardInputs<T>& in, const RewardWeights& w) {
  const T ev = in.forward_velocity - in.command;
  const T tracking = ad::exp(-(ev * ev) / (w.sigma_velocity * w.sigma_velocity));
  const T upright = ad::exp(-(in.pitch * in.pitch) / (w.sigma_pitch * w.sigma_pitch));
  const T eh = in.height - in.target_height;
  T action_rate(0.0);
  for (std::size_t i = 0; i < in.action.size(); ++i) {
    const T d = in.action[i] - in.prev_action[i];
    action_rate = action_rate + d * d;
  }
  T joint_velocity(0.0);
  for (const T& v : in.joint_velocity) joint_velocity = joint_velocity + v * v;
  T torque(0.0);
  for (const T& t : in.torque) torque = torque + t * t;
  return w.tracking * tracking + w.upright * upright - w.height * (eh * eh) -
         w.action_rate * action_rate - w.joint_velocity * joint_velocity -
         w.torque * torque;
}

/// Called after every Moreau sub-step with the sub-step index, the step
/// result and the applied joint torques.
template <class T>
using SubstepObserver =
    std::function<void(int, const StepResult<T>&, const std::vector<T>&)>;

class LocomotionEnv {
 public:
  explicit LocomotionEnv(EnvConfig cfg);

  const EnvConfig& config() const { return cfg_; }
  const SystemModel& model() const { return model_; }
  const GeneralizedState<double>& nominal() const { return nominal_; }
  int observation_dim() const { return 6 + 3 * action_dim() + 1; }
  int action_dim() const { return static_cast<int>(model_.actuated.size()); }
  double target_height() const { return target_height_; }

  /// Starts a new episode in `lane`, drawing from stream (seed, index,
  /// lane.episode) and incrementing lane.episode.
  void reset_lane(LaneState<double>& lane, std::uint64_t seed, int index) const;

  /// Model with the lane's randomized per-body mass scales.
  SystemModel lane_model(const std::vector<double>& mass_scale) const;

  template <class T>
  std::vector<T> observe(const LaneState<T>& lane) const;

  /// Advances one policy step: `decimation` Moreau sub-steps under PD
  /// control toward targets mapped from `action`. On termination or timeout
  /// the lane is reset (drawing from `seed`) and the returned observation
  /// is the first of the new episode.
  template <class T>
  LaneStep<T> step_lane(LaneState<T>& lane, std::span<const T> action,
                        std::uint64_t seed, int index,
                        const SubstepObserver<T>& observer = {}) const;

 private:
  template <class T>
  T base_coordinate(const GeneralizedState<T>& s, BaseCoordinate c, bool velocity) const;

  EnvConfig cfg_;
  SystemModel model_;
  GeneralizedState<double> nominal_;
  double target_height_;
};

template <class T>
T LocomotionEnv::base_coordinate(const GeneralizedState<T>& s, BaseCoordinate c,
                                 bool velocity) const {
  const int i = model_.base_index(c);
  if (i >= 0) return velocity ? s.u[i] : s.q[i];
  if (velocity) return T(0.0);
  switch (c) {
    case BaseCoordinate::kX:
      return T(model_.fixed_x);
    case BaseCoordinate::kZ:
      return T(model_.fixed_z);
    case BaseCoordinate::kPitch:
      return T(model_.fixed_pitch);
  }
  return T(0.0);
}

template <class T>
std::vector<T> LocomotionEnv::observe(const LaneState<T>& lane) const {
  const auto& s = lane.state;
  std::vector<T> obs;
  obs.reserve(observation_dim());
  const T pitch = base_coordinate(s, BaseCoordinate::kPitch, false);
  obs.push_back(base_coordinate(s, BaseCoordinate::kZ, false));
  obs.push_back(ad::sin(pitch));
  obs.push_back(ad::cos(pitch));
  obs.push_back(base_coordinate(s, BaseCoordinate::kX, true));
  obs.push_back(base_coordinate(s, BaseCoordinate::kZ, true));
  obs.push_back(base_coordinate(s, BaseCoordinate::kPitch, true));
  for (int a : model_.actuated) obs.push_back(s.q[a]);
  for (int a : model_.actuated) obs.push_back(s.u[a]);
  for (const T& a : lane.prev_action) obs.push_back(a);
  obs.push_back(T(lane.command));
  return obs;
}

template <class T>
LaneStep<T> LocomotionEnv::step_lane(LaneState<T>& lane, std::span<const T> action,
                                     std::uint64_t seed, int index,
                                     const SubstepObserver<T>& observer) const {
  const int na = action_dim();
  if (static_cast<int>(action.size()) != na) {
    throw std::invalid_argument("step_lane: action dimension mismatch");
  }
  LaneStep<T> out;
  out.command = lane.command;

  std::vector<T> act(na);
  std::vector<T> target(na);
  for (int j = 0; j < na; ++j) {
    const double a = ad::value(action[j]);
    if (a < -1.0 || a > 1.0) ++out.clamped_actions;
    act[j] = ad::clamp(action[j], T(-1.0), T(1.0));
    const int dof = model_.actuated[j];
    T q_des = nominal_.q[dof] + cfg_.action_scale * act[j];
    if (const int link = dof - static_cast<int>(model_.base_coordinates.size());
        link >= 0) {
      q_des = ad::clamp(q_des, T(model_.links[link].lower_limit),
                        T(model_.links[link].upper_limit));
    }
    target[j] = q_des;
  }

  const BasicSystemModel<T> model =
      lane_model(lane.mass_scale).template cast<T>();
  StepConfig step_cfg;
  step_cfg.dt = cfg_.dt;
  step_cfg.contact = cfg_.contact;
  step_cfg.contact.friction = lane.friction;
  step_cfg.accept_unconverged = cfg_.accept_unconverged;

  std::vector<T> torque(na);
  std::vector<T> torque_mean(na, T(0.0));
  for (int k = 0; k < cfg_.decimation; ++k) {
    for (int j = 0; j < na; ++j) {
      const int dof = model_.actuated[j];
      const T& u = lane.state.u[dof];
      torque[j] = saturate(pd_torque(target[j], lane.state.q[dof], u, cfg_.actuator),
                           u, cfg_.actuator);
    }
    try {
      auto r = moreau_step<T>(model, lane.state, torque, step_cfg);
      if (!r.converged) ++out.unconverged_solves;
      if (observer) observer(k, r, torque);
      lane.state = std::move(r.state);
    } catch (const StepFault& e) {
      throw LaneFault(index, e.what());
    }
    for (int j = 0; j < na; ++j) {
      torque_mean[j] = torque_mean[j] + torque[j] * (1.0 / cfg_.decimation);
    }
  }

  const auto& s = lane.state;
  std::vector<T> joint_velocity(na);
  for (int j = 0; j < na; ++j) joint_velocity[j] = s.u[model_.actuated[j]];
  const T vx = base_coordinate(s, BaseCoordinate::kX, true);
  const T pitch = base_coordinate(s, BaseCoordinate::kPitch, false);
  const T height = base_coordinate(s, BaseCoordinate::kZ, false);
  const RewardInputs<T> in{vx, pitch, height, act, lane.prev_action, joint_velocity,
                           torque_mean, lane.command, target_height_};
  out.reward = reward(in, cfg_.reward);
  out.forward_velocity = ad::value(vx);

  lane.prev_action = act;
  lane.step += 1;
  const bool fell = ad::value(height) < cfg_.termination.min_base_height ||
                    std::abs(ad::value(pitch)) > cfg_.termination.max_pitch;
  if (fell) {
    out.termination = TerminationType::kFall;
  } else if (lane.step >= cfg_.episode_length) {
    out.termination = TerminationType::kTimeout;
  }
  out.observation = observe(lane);
  if (out.termination != TerminationType::kNone) {
    out.done = true;
    out.episode_length = lane.step;
    out.terminal_observation = out.observation;
    LaneState<double> fresh;
    fresh.episode = lane.episode;
    reset_lane(fresh, seed, index);
    lane = fresh.template cast<T>();
    out.observation = observe(lane);
  }
  return out;
}

}  // namespace dsim

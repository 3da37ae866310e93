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

// Joint PD control with a torque-speed envelope.
//
// The envelope is the usual motor line: driving torque falls linearly from
// the stall torque tau_s to zero at the no-load speed tau_s / k_v.

#include <string>

#include "dsim/ad/ops.hpp"

namespace dsim {

enum class SaturationMode { kHardClamp, kSmoothTanh };

std::string to_string(SaturationMode mode);
SaturationMode saturation_mode_from_string(const std::string& name);

struct ActuatorConfig {
  double kp = 50.0;             // N m / rad
  double kd = 2.0;              // N m s / rad
  double stall_torque = 80.0;   // tau_s, N m
  double speed_slope = 8.0;     // k_v, N m s / rad
  SaturationMode mode = SaturationMode::kSmoothTanh;

  void validate() const;
};

template <class T>
T pd_torque(const T& q_des, const T& q, const T& u, const ActuatorConfig& cfg) {
  return cfg.kp * (q_des - q) - cfg.kd * u;
}

template <class T>
struct TorqueBounds {
  T lo;
  T hi;
};

template <class T>
TorqueBounds<T> torque_bounds(const T& u, const ActuatorConfig& cfg) {
  const T ts(cfg.stall_torque);
  const T hi = ad::clamp(ts - cfg.speed_slope * ad::max(T(0.0), u), T(0.0), ts);
  const T lo = -ad::clamp(ts - cfg.speed_slope * ad::max(T(0.0), -u), T(0.0), ts);
  return {lo, hi};
}

template <class T>
T saturate(const T& tau_raw, const T& u, const ActuatorConfig& cfg) {
  const TorqueBounds<T> b = torque_bounds(u, cfg);
  if (cfg.mode == SaturationMode::kHardClamp) return ad::clamp(tau_raw, b.lo, b.hi);
  const T mid = 0.5 * (b.hi + b.lo);
  const T half = 0.5 * (b.hi - b.lo);
  if (!(ad::value(half) > 0.0)) return mid;
  return mid + half * ad::tanh((tau_raw - mid) / half);
}

}  // namespace dsim

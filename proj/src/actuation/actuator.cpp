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

#include "dsim/actuation/actuator.hpp"

#include <stdexcept>

namespace dsim {

std::string to_string(SaturationMode mode) {
  return mode == SaturationMode::kHardClamp ? "hard-clamp" : "smooth-tanh";
}

SaturationMode saturation_mode_from_string(const std::string& name) {
  if (name == "hard-clamp") return SaturationMode::kHardClamp;
  if (name == "smooth-tanh") return SaturationMode::kSmoothTanh;
  throw std::invalid_argument("unknown saturation mode '" + name +
                              "' (expected hard-clamp or smooth-tanh)");
}

void ActuatorConfig::validate() const {
  if (kp < 0.0 || kd < 0.0 || stall_torque < 0.0 || speed_slope < 0.0) {
    throw std::invalid_argument("actuator gains and limits must be >= 0");
  }
}

}  // namespace dsim

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

// The shipped mechanisms.
//
//   bouncer1d    - 1 DoF point mass on a vertical rail with a force actuator
//   pendulum     - fixed pivot, one revolute joint, no contact sites
//   hopper2d     - base x, z (pitch locked) + hip, knee; one point foot
//   quadruped2d  - base x, z, pitch + hip, knee per leg; two point feet

#include <string>
#include <vector>

#include "dsim/dynamics/system_model.hpp"

namespace dsim {

SystemModel make_bouncer1d(double mass = 1.0);
SystemModel make_pendulum(double mass = 1.0, double length = 1.0,
                          double inertia = 0.0);
SystemModel make_hopper2d();
SystemModel make_quadruped2d();

/// Looks a system up by name; throws std::invalid_argument if unknown.
SystemModel make_system(const std::string& name);
std::vector<std::string> system_names();

/// Standing configuration (feet on the ground for legged systems).
GeneralizedState<double> nominal_state(const SystemModel& model);

}  // namespace dsim

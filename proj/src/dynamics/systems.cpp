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

#include "dsim/dynamics/systems.hpp"

#include <cmath>
#include <stdexcept>

#include "dsim/dynamics/kinematics.hpp"

namespace dsim {
namespace {

// Uniform rod about its center.
double rod_inertia(double mass, double length) {
  return mass * length * length / 12.0;
}

Link<double> leg_link(int parent, double joint_x, double joint_z, double length,
                      double mass, double lower, double upper) {
  Link<double> l;
  l.parent = parent;
  l.joint_x = joint_x;
  l.joint_z = joint_z;
  l.length = length;
  l.com = 0.5 * length;
  l.mass = mass;
  l.inertia = rod_inertia(mass, length);
  l.lower_limit = lower;
  l.upper_limit = upper;
  return l;
}

constexpr double kHipNominal = 0.5;
constexpr double kKneeNominal = -1.0;

}  // namespace

SystemModel make_bouncer1d(double mass) {
  SystemModel m;
  m.name = "bouncer1d";
  m.base_coordinates = {BaseCoordinate::kZ};
  m.base_mass = mass;
  m.base_inertia = 0.0;
  m.contact_sites = {{0, 0.0, 0.0, "bottom"}};
  m.actuated = {0};
  m.validate();
  return m;
}

SystemModel make_pendulum(double mass, double length, double inertia) {
  SystemModel m;
  m.name = "pendulum";
  m.base_mass = 0.0;
  m.base_inertia = 0.0;
  Link<double> l;
  l.parent = -1;
  l.length = length;
  l.com = length;
  l.mass = mass;
  l.inertia = inertia;
  m.links = {l};
  m.actuated = {0};
  m.validate();
  return m;
}

SystemModel make_hopper2d() {
  SystemModel m;
  m.name = "hopper2d";
  m.base_coordinates = {BaseCoordinate::kX, BaseCoordinate::kZ};
  m.base_mass = 3.0;
  m.base_inertia = 0.02;
  m.links = {leg_link(-1, 0.0, 0.0, 0.25, 0.5, -1.2, 1.2),
             leg_link(0, 0.0, -0.25, 0.25, 0.3, -2.4, 0.0)};
  m.contact_sites = {{2, 0.0, -0.25, "foot"}};
  m.actuated = {2, 3};
  m.validate();
  return m;
}

SystemModel make_quadruped2d() {
  SystemModel m;
  m.name = "quadruped2d";
  m.base_coordinates = {BaseCoordinate::kX, BaseCoordinate::kZ,
                        BaseCoordinate::kPitch};
  m.base_mass = 6.0;
  // Diagonal-only, reduced inertia (a 0.5 m body would give ~0.125).
  m.base_inertia = 0.08;
  m.links = {leg_link(-1, 0.2, 0.0, 0.2, 0.4, -1.2, 1.2),   // front thigh
             leg_link(0, 0.0, -0.2, 0.2, 0.2, -2.4, 0.0),   // front shank
             leg_link(-1, -0.2, 0.0, 0.2, 0.4, -1.2, 1.2),  // hind thigh
             leg_link(2, 0.0, -0.2, 0.2, 0.2, -2.4, 0.0)};  // hind shank
  m.contact_sites = {{2, 0.0, -0.2, "front_foot"}, {4, 0.0, -0.2, "hind_foot"}};
  m.actuated = {3, 4, 5, 6};
  m.validate();
  return m;
}

SystemModel make_system(const std::string& name) {
  if (name == "bouncer1d") return make_bouncer1d();
  if (name == "pendulum") return make_pendulum();
  if (name == "hopper2d") return make_hopper2d();
  if (name == "quadruped2d") return make_quadruped2d();
  throw std::invalid_argument("unknown system '" + name + "'");
}

std::vector<std::string> system_names() {
  return {"bouncer1d", "pendulum", "hopper2d", "quadruped2d"};
}

GeneralizedState<double> nominal_state(const SystemModel& model) {
  const int n = model.dof();
  GeneralizedState<double> s{DofVector<double>(n), DofVector<double>(n)};
  if (model.name == "bouncer1d") {
    s.q[0] = 0.5;
    return s;
  }
  for (std::size_t l = 0; l < model.links.size(); ++l) {
    const bool knee = model.links[l].parent >= 0;
    s.q[model.joint_index(static_cast<int>(l))] =
        model.links.size() == 1 ? 0.0 : (knee ? kKneeNominal : kHipNominal);
  }
  // Put the lowest contact site on the ground.
  if (const int iz = model.base_index(BaseCoordinate::kZ); iz >= 0) {
    const Kinematics<double> k = forward_kinematics(model, s.q);
    double lowest = 0.0;
    bool any = false;
    for (const auto& site : model.contact_sites) {
      const double z = body_point(k, site.body, site.x, site.z).z;
      lowest = any ? std::min(lowest, z) : z;
      any = true;
    }
    if (any) s.q[iz] -= lowest;
  }
  return s;
}

}  // namespace dsim

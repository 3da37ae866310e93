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

// Planar articulated mechanisms in minimal coordinates.
//
// Frame convention: x forward, z up, angles counter-clockwise (positive
// pitch lifts the front). A link at joint angle 0 hangs straight down from
// its joint; its tip is at (0, -length) in the link frame.
//
// Generalized coordinates are ordered: present base coordinates (in the
// order given by `base_coordinates`), then one revolute coordinate per link.

#include <stdexcept>
#include <string>
#include <vector>

#include "dsim/ad/ops.hpp"
#include "dsim/dynamics/small_linalg.hpp"

namespace dsim {

enum class BaseCoordinate { kX, kZ, kPitch };

template <class T>
struct Link {
  int parent = -1;  // -1: base body, otherwise an earlier link index
  T joint_x{0.0};   // joint position in the parent frame (m)
  T joint_z{0.0};
  T length{0.0};   // joint to tip (m)
  T com{0.0};      // joint to center of mass along the link (m)
  T mass{0.0};     // kg
  T inertia{0.0};  // planar (diagonal) rotational inertia about the com, kg m^2
  double lower_limit = -3.14;  // rad
  double upper_limit = 3.14;
};

/// A body-fixed point that can touch the ground. Body 0 is the base, body
/// k + 1 is link k.
template <class T>
struct ContactSite {
  int body = 0;
  T x{0.0};
  T z{0.0};
  std::string name;
};

template <class T>
struct BasicSystemModel {
  std::string name;
  std::vector<BaseCoordinate> base_coordinates;
  T base_mass{1.0};
  T base_inertia{1.0};
  // Values used for base coordinates that are not degrees of freedom.
  double fixed_x = 0.0;
  double fixed_z = 0.0;
  double fixed_pitch = 0.0;
  std::vector<Link<T>> links;
  std::vector<ContactSite<T>> contact_sites;
  T gravity{9.81};  // m/s^2, acting along -z
  // Generalized coordinates driven by actuators (joints, or the base z of a
  // thruster-driven point mass).
  std::vector<int> actuated;

  int dof() const {
    return static_cast<int>(base_coordinates.size() + links.size());
  }
  int num_bodies() const { return static_cast<int>(links.size()) + 1; }

  /// Generalized index of a base coordinate, or -1 if it is fixed.
  int base_index(BaseCoordinate c) const {
    for (std::size_t i = 0; i < base_coordinates.size(); ++i) {
      if (base_coordinates[i] == c) return static_cast<int>(i);
    }
    return -1;
  }
  int joint_index(int link) const {
    return static_cast<int>(base_coordinates.size()) + link;
  }

  /// Copies numeric parameters into another scalar type (as constants).
  template <class U>
  BasicSystemModel<U> cast() const {
    BasicSystemModel<U> m;
    m.name = name;
    m.base_coordinates = base_coordinates;
    m.base_mass = U(ad::value(base_mass));
    m.base_inertia = U(ad::value(base_inertia));
    m.fixed_x = fixed_x;
    m.fixed_z = fixed_z;
    m.fixed_pitch = fixed_pitch;
    for (const auto& l : links) {
      Link<U> c;
      c.parent = l.parent;
      c.joint_x = U(ad::value(l.joint_x));
      c.joint_z = U(ad::value(l.joint_z));
      c.length = U(ad::value(l.length));
      c.com = U(ad::value(l.com));
      c.mass = U(ad::value(l.mass));
      c.inertia = U(ad::value(l.inertia));
      c.lower_limit = l.lower_limit;
      c.upper_limit = l.upper_limit;
      m.links.push_back(c);
    }
    for (const auto& s : contact_sites) {
      m.contact_sites.push_back(
          ContactSite<U>{s.body, U(ad::value(s.x)), U(ad::value(s.z)), s.name});
    }
    m.gravity = U(ad::value(gravity));
    m.actuated = actuated;
    return m;
  }

  /// Throws std::invalid_argument on a malformed model.
  void validate() const {
    if (dof() < 1 || dof() > kMaxDof) {
      throw std::invalid_argument(name + ": dof must be in [1, 8]");
    }
    const bool has_base_dof = !base_coordinates.empty();
    if (has_base_dof && !(ad::value(base_mass) > 0.0)) {
      throw std::invalid_argument(name + ": base mass must be > 0");
    }
    if (!(ad::value(base_inertia) >= 0.0)) {
      throw std::invalid_argument(name + ": base inertia must be >= 0");
    }
    for (std::size_t k = 0; k < links.size(); ++k) {
      const auto& l = links[k];
      if (l.parent >= static_cast<int>(k) || l.parent < -1) {
        throw std::invalid_argument(name + ": link parents must precede children");
      }
      if (!(ad::value(l.mass) > 0.0) || !(ad::value(l.inertia) >= 0.0)) {
        throw std::invalid_argument(name + ": link mass must be > 0, inertia >= 0");
      }
    }
    for (const auto& s : contact_sites) {
      if (s.body < 0 || s.body >= num_bodies()) {
        throw std::invalid_argument(name + ": contact site on unknown body");
      }
    }
    for (int a : actuated) {
      if (a < 0 || a >= dof()) {
        throw std::invalid_argument(name + ": actuated index out of range");
      }
    }
  }
};

using SystemModel = BasicSystemModel<double>;

template <class T>
struct GeneralizedState {
  DofVector<T> q;
  DofVector<T> u;

  template <class U>
  GeneralizedState<U> cast() const {
    GeneralizedState<U> s{DofVector<U>(q.size()), DofVector<U>(u.size())};
    for (int i = 0; i < q.size(); ++i) {
      s.q[i] = U(ad::value(q[i]));
      s.u[i] = U(ad::value(u[i]));
    }
    return s;
  }
};

}  // namespace dsim

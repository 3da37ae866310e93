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

#include <array>

#include "dsim/dynamics/system_model.hpp"

namespace dsim {

inline constexpr int kMaxBodies = kMaxDof + 1;

template <class T>
struct Vec2 {
  T x{0.0};
  T z{0.0};
};

/// World pose of every body origin.
template <class T>
struct Kinematics {
  std::array<Vec2<T>, kMaxBodies> origin{};
  std::array<T, kMaxBodies> angle{};
  std::array<T, kMaxBodies> cos_angle{};
  std::array<T, kMaxBodies> sin_angle{};
};

/// A rotational coordinate that moves a body, and the body whose origin is
/// its pivot.
struct RotationalAncestor {
  int dof;
  int pivot_body;
};

struct AncestorList {
  std::array<RotationalAncestor, kMaxDof> items{};
  int count = 0;
};

template <class T>
AncestorList rotational_ancestors(const BasicSystemModel<T>& model, int body) {
  AncestorList list;
  for (int link = body - 1; link >= 0; link = model.links[link].parent) {
    list.items[list.count++] = {model.joint_index(link), link + 1};
  }
  if (const int pitch = model.base_index(BaseCoordinate::kPitch); pitch >= 0) {
    list.items[list.count++] = {pitch, 0};
  }
  return list;
}

template <class T>
Kinematics<T> forward_kinematics(const BasicSystemModel<T>& model,
                                 const DofVector<T>& q) {
  Kinematics<T> k;
  const int ix = model.base_index(BaseCoordinate::kX);
  const int iz = model.base_index(BaseCoordinate::kZ);
  const int ip = model.base_index(BaseCoordinate::kPitch);
  k.origin[0] = {ix >= 0 ? q[ix] : T(model.fixed_x),
                 iz >= 0 ? q[iz] : T(model.fixed_z)};
  k.angle[0] = ip >= 0 ? q[ip] : T(model.fixed_pitch);
  k.cos_angle[0] = ad::cos(k.angle[0]);
  k.sin_angle[0] = ad::sin(k.angle[0]);
  for (std::size_t l = 0; l < model.links.size(); ++l) {
    const Link<T>& link = model.links[l];
    const int p = link.parent + 1;
    const int b = static_cast<int>(l) + 1;
    const T& c = k.cos_angle[p];
    const T& s = k.sin_angle[p];
    k.origin[b] = {k.origin[p].x + c * link.joint_x - s * link.joint_z,
                   k.origin[p].z + s * link.joint_x + c * link.joint_z};
    k.angle[b] = k.angle[p] + q[model.joint_index(static_cast<int>(l))];
    k.cos_angle[b] = ad::cos(k.angle[b]);
    k.sin_angle[b] = ad::sin(k.angle[b]);
  }
  return k;
}

/// World position of a point given in a body frame.
template <class T>
Vec2<T> body_point(const Kinematics<T>& k, int body, const T& local_x,
                   const T& local_z) {
  const T& c = k.cos_angle[body];
  const T& s = k.sin_angle[body];
  return {k.origin[body].x + c * local_x - s * local_z,
          k.origin[body].z + s * local_x + c * local_z};
}

/// Translational Jacobian rows (d p_x / dq, d p_z / dq) of a world point
/// rigidly attached to `body`.
template <class T>
struct PointJacobian {
  DofVector<T> x;
  DofVector<T> z;
};

template <class T>
PointJacobian<T> point_jacobian(const BasicSystemModel<T>& model,
                                const Kinematics<T>& k, int body,
                                const Vec2<T>& p) {
  const int n = model.dof();
  PointJacobian<T> j{DofVector<T>(n), DofVector<T>(n)};
  if (const int ix = model.base_index(BaseCoordinate::kX); ix >= 0) j.x[ix] = T(1.0);
  if (const int iz = model.base_index(BaseCoordinate::kZ); iz >= 0) j.z[iz] = T(1.0);
  const AncestorList anc = rotational_ancestors(model, body);
  for (int a = 0; a < anc.count; ++a) {
    const Vec2<T>& o = k.origin[anc.items[a].pivot_body];
    // e_z x (p - o) in the x-z plane
    j.x[anc.items[a].dof] = -(p.z - o.z);
    j.z[anc.items[a].dof] = p.x - o.x;
  }
  return j;
}

template <class T>
Vec2<T> apply(const PointJacobian<T>& j, const DofVector<T>& u) {
  return {dot(j.x, u), dot(j.z, u)};
}

/// Velocity-product acceleration J_dot u of a point on `body` (the point's
/// acceleration when all generalized accelerations are zero).
template <class T>
Vec2<T> point_bias_acceleration(const BasicSystemModel<T>& model,
                                const Kinematics<T>& k, int body,
                                const Vec2<T>& p, const DofVector<T>& u) {
  const AncestorList anc = rotational_ancestors(model, body);
  const Vec2<T> vp = apply(point_jacobian(model, k, body, p), u);
  Vec2<T> a;
  for (int i = 0; i < anc.count; ++i) {
    const int pivot = anc.items[i].pivot_body;
    const Vec2<T> vo =
        apply(point_jacobian(model, k, pivot, k.origin[pivot]), u);
    const T& w = u[anc.items[i].dof];
    a.x = a.x - w * (vp.z - vo.z);
    a.z = a.z + w * (vp.x - vo.x);
  }
  return a;
}

template <class T>
struct BodyInertia {
  T mass;
  T inertia;
  Vec2<T> com_local;
};

template <class T>
BodyInertia<T> body_inertia(const BasicSystemModel<T>& model, int body) {
  if (body == 0) return {model.base_mass, model.base_inertia, {}};
  const Link<T>& l = model.links[body - 1];
  return {l.mass, l.inertia, {T(0.0), -l.com}};
}

}  // namespace dsim

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

// Equations of motion M(q) u_dot = b(q, u) + tau + J^T lambda, assembled
// body by body from point Jacobians (Kane's form). Planar bodies have a
// constant angular Jacobian, so the only velocity-product terms are the
// translational ones.

#include "dsim/dynamics/kinematics.hpp"

namespace dsim {

/// Generalized mass matrix, sum over bodies of m Jv^T Jv + I Jw^T Jw.
template <class T>
DofMatrix<T> mass_matrix(const BasicSystemModel<T>& model,
                         const Kinematics<T>& k) {
  const int n = model.dof();
  DofMatrix<T> m(n);
  for (int b = 0; b < model.num_bodies(); ++b) {
    const BodyInertia<T> bi = body_inertia(model, b);
    const Vec2<T> com = body_point(k, b, bi.com_local.x, bi.com_local.z);
    const PointJacobian<T> j = point_jacobian(model, k, b, com);
    for (int r = 0; r < n; ++r) {
      for (int c = r; c < n; ++c) {
        m(r, c) = m(r, c) + bi.mass * (j.x[r] * j.x[c] + j.z[r] * j.z[c]);
      }
    }
    const AncestorList anc = rotational_ancestors(model, b);
    for (int i = 0; i < anc.count; ++i) {
      for (int jj = 0; jj < anc.count; ++jj) {
        const int r = anc.items[i].dof;
        const int c = anc.items[jj].dof;
        if (r <= c) m(r, c) = m(r, c) + bi.inertia;
      }
    }
  }
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < r; ++c) m(r, c) = m(c, r);
  }
  return m;
}

template <class T>
DofMatrix<T> mass_matrix(const BasicSystemModel<T>& model,
                         const DofVector<T>& q) {
  return mass_matrix(model, forward_kinematics(model, q));
}

/// Gravity plus velocity-product generalized forces, with the sign
/// convention u_dot = M^-1 (b + tau + contact terms).
template <class T>
DofVector<T> bias_forces(const BasicSystemModel<T>& model,
                         const Kinematics<T>& k, const DofVector<T>& u) {
  const int n = model.dof();
  DofVector<T> b(n);
  for (int body = 0; body < model.num_bodies(); ++body) {
    const BodyInertia<T> bi = body_inertia(model, body);
    const Vec2<T> com = body_point(k, body, bi.com_local.x, bi.com_local.z);
    const PointJacobian<T> j = point_jacobian(model, k, body, com);
    const Vec2<T> a = point_bias_acceleration(model, k, body, com, u);
    const T fx = -bi.mass * a.x;
    const T fz = -bi.mass * (model.gravity + a.z);
    for (int i = 0; i < n; ++i) b[i] = b[i] + j.x[i] * fx + j.z[i] * fz;
  }
  return b;
}

template <class T>
DofVector<T> bias_forces(const BasicSystemModel<T>& model,
                         const DofVector<T>& q, const DofVector<T>& u) {
  return bias_forces(model, forward_kinematics(model, q), u);
}

/// Kinetic plus gravitational potential energy.
template <class T>
T mechanical_energy(const BasicSystemModel<T>& model,
                    const GeneralizedState<T>& s) {
  const Kinematics<T> k = forward_kinematics(model, s.q);
  const DofMatrix<T> m = mass_matrix(model, k);
  T e = T(0.5) * dot(s.u, multiply(m, s.u));
  for (int body = 0; body < model.num_bodies(); ++body) {
    const BodyInertia<T> bi = body_inertia(model, body);
    if (body == 0 && model.base_coordinates.empty()) continue;
    const Vec2<T> com = body_point(k, body, bi.com_local.x, bi.com_local.z);
    e = e + bi.mass * model.gravity * com.z;
  }
  return e;
}

}  // namespace dsim

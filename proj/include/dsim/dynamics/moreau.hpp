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

// Moreau midpoint time stepping:
//
//   q_mid = q + dt/2 u
//   M, b, gaps, J evaluated at q_mid
//   u+    = u + M^-1 (b dt + tau dt + J^T P)
//   q+    = q_mid + dt/2 u+
//
// P comes from the contact solve (hard/smooth) or from penalty forces
// integrated over the step (soft).

#include <sstream>
#include <stdexcept>

#include "dsim/contact/contact.hpp"
#include "dsim/dynamics/dynamics.hpp"

namespace dsim {

struct StepConfig {
  double dt = 2.5e-3;
  ContactModelConfig contact;
  // When false, an unconverged contact solve throws StepFault.
  bool accept_unconverged = false;
};

/// The contact solver hit gs_iters above tolerance, or the state went
/// non-finite.
class StepFault : public std::runtime_error {
 public:
  StepFault(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

template <class T>
struct StepResult {
  GeneralizedState<T> state;
  ContactSet<T> contacts;
  // Impulse per contact site (zero for inactive sites), N s.
  std::array<T, kMaxContacts> site_normal_impulse{};
  std::array<T, kMaxContacts> site_tangential_impulse{};
  int sweeps_used = 0;
  double residual = 0.0;
  bool converged = true;
};

/// Generalized force vector with `joint_torques` on the actuated
/// coordinates.
template <class T>
DofVector<T> generalized_torques(const BasicSystemModel<T>& model,
                                 std::span<const T> joint_torques) {
  DofVector<T> tau(model.dof());
  for (std::size_t i = 0; i < model.actuated.size(); ++i) {
    tau[model.actuated[i]] = joint_torques[i];
  }
  return tau;
}

template <class T>
StepResult<T> moreau_step(const BasicSystemModel<T>& model,
                          const GeneralizedState<T>& state,
                          std::span<const T> joint_torques,
                          const StepConfig& cfg) {
  const int n = model.dof();
  const double dt = cfg.dt;
  const T half_dt(0.5 * dt);

  DofVector<T> q_mid(n);
  for (int i = 0; i < n; ++i) q_mid[i] = state.q[i] + half_dt * state.u[i];

  const Kinematics<T> kin = forward_kinematics(model, q_mid);
  const DofMatrix<T> mass = mass_matrix(model, kin);
  const DofMatrix<T> chol = cholesky(mass);
  DofVector<T> force = bias_forces(model, kin, state.u);
  const DofVector<T> tau = generalized_torques(model, joint_torques);
  for (int i = 0; i < n; ++i) force[i] = force[i] + tau[i];

  StepResult<T> out;
  out.contacts = compute_gaps(model, kin, cfg.contact);
  const ContactSet<T>& contacts = out.contacts;

  if (cfg.contact.kind == ContactKind::kSoft) {
    for (int i = 0; i < contacts.count; ++i) {
      const ContactPoint<T>& c = contacts[i];
      const T rate = dot(c.jn, state.u);
      const T fn = soft_force(c.gap, rate, cfg.contact);
      const T vt = dot(c.jt, state.u);
      const T ft = -cfg.contact.friction * fn *
                   ad::tanh(vt / cfg.contact.soft_slip_velocity);
      for (int d = 0; d < n; ++d) force[d] = force[d] + c.jn[d] * fn + c.jt[d] * ft;
      out.site_normal_impulse[c.site] = fn * dt;
      out.site_tangential_impulse[c.site] = ft * dt;
    }
  }

  DofVector<T> u_free = cholesky_solve(chol, force);
  for (int i = 0; i < n; ++i) u_free[i] = state.u[i] + u_free[i] * dt;

  DofVector<T> u_next = u_free;
  if (cfg.contact.kind != ContactKind::kSoft && contacts.count > 0) {
    DofVector<T> delta_u;
    const ImpulseSolution<T> sol =
        solve_contacts(chol, u_free, state.u, contacts, cfg.contact, &delta_u);
    out.sweeps_used = sol.sweeps_used;
    out.residual = sol.residual;
    out.converged = sol.converged;
    if (!sol.converged && !cfg.accept_unconverged) {
      std::ostringstream msg;
      msg << "contact solve did not converge in " << sol.sweeps_used
          << " sweeps (residual " << sol.residual << ")";
      throw StepFault(msg.str(), sol.residual);
    }
    for (int i = 0; i < contacts.count; ++i) {
      out.site_normal_impulse[contacts[i].site] = sol.normal[i];
      out.site_tangential_impulse[contacts[i].site] = sol.tangential[i];
    }
    for (int i = 0; i < n; ++i) u_next[i] = u_free[i] + delta_u[i];
  }

  out.state.q = DofVector<T>(n);
  out.state.u = u_next;
  for (int i = 0; i < n; ++i) {
    out.state.q[i] = q_mid[i] + half_dt * u_next[i];
    if (!ad::is_finite(out.state.q[i]) || !ad::is_finite(u_next[i])) {
      throw StepFault("non-finite state after step", 0.0);
    }
  }
  return out;
}

}  // namespace dsim

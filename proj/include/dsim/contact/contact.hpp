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

// Ground contact for point sites against the plane z = 0.
//
// Three models share the gap computation:
//   hard   - impulses from a projected Gauss-Seidel solve on the Delassus
//            operator (velocity-level Signorini + Coulomb + Newton
//            restitution);
//   smooth - the same solve with every per-contact update scaled by the
//            logistic weight w(d) = 1 / (1 + exp(d / s));
//   soft   - penalty spring-damper forces, no impulse solve.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "dsim/ad/ops.hpp"
#include "dsim/dynamics/kinematics.hpp"

namespace dsim {

enum class ContactKind { kHard, kSoft, kSmooth };

std::string to_string(ContactKind kind);
ContactKind contact_kind_from_string(const std::string& name);

struct ContactModelConfig {
  ContactKind kind = ContactKind::kSmooth;
  double sharpness = 0.005;      // s, m (smooth)
  double stiffness = 1e4;        // k_n, N/m (soft)
  double damping = 100.0;        // c_n, N s/m (soft)
  double friction = 0.8;         // mu
  double restitution = 0.0;      // epsilon
  int gs_iters = 30;
  double gs_tol = 1e-9;          // N s
  double margin_factor = 5.0;    // smooth: sites with d < margin_factor * s take part
  double soft_slip_velocity = 0.01;  // m/s, regularizes soft-model friction

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

/// Logistic contact weight; the exponent is clamped to +-50.
template <class T>
T sigmoid_weight(const T& gap, double sharpness) {
  const T z = gap / sharpness;
  if (ad::value(z) > 50.0) return T(0.0);
  if (ad::value(z) < -50.0) return T(1.0);
  return T(1.0) / (T(1.0) + ad::exp(z));
}

inline constexpr int kMaxContacts = 4;

template <class T>
struct ContactPoint {
  int site = 0;
  T gap{0.0};                      // d, m; negative is penetration
  std::array<double, 2> normal{0.0, 1.0};
  DofVector<T> jn;                 // normal row
  DofVector<T> jt;                 // tangential row (+x)
  T weight{1.0};                   // w; 1 for hard and soft
};

template <class T>
struct ContactSet {
  std::array<ContactPoint<T>, kMaxContacts> points{};
  int count = 0;
  std::array<T, kMaxContacts> site_gap{};  // gap of every site, active or not
  int num_sites = 0;

  ContactPoint<T>& operator[](int i) { return points[i]; }
  const ContactPoint<T>& operator[](int i) const { return points[i]; }
};

/// Gaps and Jacobian rows at configuration q (the Moreau midpoint).
template <class T>
ContactSet<T> compute_gaps(const BasicSystemModel<T>& model,
                           const Kinematics<T>& k,
                           const ContactModelConfig& cfg) {
  ContactSet<T> set;
  set.num_sites = static_cast<int>(model.contact_sites.size());
  for (int i = 0; i < set.num_sites; ++i) {
    const ContactSite<T>& site = model.contact_sites[i];
    const Vec2<T> p = body_point(k, site.body, site.x, site.z);
    set.site_gap[i] = p.z;
    const double d = ad::value(p.z);
    const bool active = cfg.kind == ContactKind::kSmooth
                            ? d < cfg.margin_factor * cfg.sharpness
                            : d <= 0.0;
    if (!active) continue;
    const PointJacobian<T> j = point_jacobian(model, k, site.body, p);
    ContactPoint<T>& c = set.points[set.count++];
    c.site = i;
    c.gap = p.z;
    c.jn = j.z;
    c.jt = j.x;
    c.weight = cfg.kind == ContactKind::kSmooth
                   ? sigmoid_weight(p.z, cfg.sharpness)
                   : T(1.0);
  }
  return set;
}

template <class T>
ContactSet<T> compute_gaps(const BasicSystemModel<T>& model,
                           const DofVector<T>& q,
                           const ContactModelConfig& cfg) {
  return compute_gaps(model, forward_kinematics(model, q), cfg);
}

/// Penalty normal force max(0, -k d - c d_dot) for d < 0, else 0.
template <class T>
T soft_force(const T& gap, const T& gap_rate, const ContactModelConfig& cfg) {
  if (!(ad::value(gap) < 0.0)) return T(0.0);
  return ad::max(T(0.0), -cfg.stiffness * gap - cfg.damping * gap_rate);
}

template <class T>
struct ImpulseSolution {
  std::array<T, kMaxContacts> normal{};      // P_n per active contact
  std::array<T, kMaxContacts> tangential{};  // P_t per active contact
  int count = 0;
  double residual = 0.0;  // max impulse change in the last sweep
  int sweeps_used = 0;
  bool converged = true;
};

/// Projected Gauss-Seidel on the Delassus operator G = J M^-1 J^T.
///
/// `chol` is the Cholesky factor of M, `u_free` the velocity after smooth
/// forces, `u_pre` the pre-step velocity used for the restitution target.
/// Each per-contact update uses r = 1 / G_ii and is scaled by the contact
/// weight. Returns the impulses and, through `delta_u`, M^-1 J^T P.
template <class T>
ImpulseSolution<T> solve_contacts(const DofMatrix<T>& chol,
                                  const DofVector<T>& u_free,
                                  const DofVector<T>& u_pre,
                                  const ContactSet<T>& contacts,
                                  const ContactModelConfig& cfg,
                                  DofVector<T>* delta_u = nullptr) {
  const int n = u_free.size();
  const int nc = contacts.count;
  ImpulseSolution<T> sol;
  sol.count = nc;
  sol.sweeps_used = 0;
  if (delta_u != nullptr) *delta_u = DofVector<T>(n);
  if (nc == 0) return sol;

  // Rows: 2i normal, 2i+1 tangential.
  const int rows = 2 * nc;
  std::array<DofVector<T>, 2 * kMaxContacts> minv_jt;
  std::array<T, 2 * kMaxContacts> v0;
  for (int i = 0; i < nc; ++i) {
    minv_jt[2 * i] = cholesky_solve(chol, contacts[i].jn);
    minv_jt[2 * i + 1] = cholesky_solve(chol, contacts[i].jt);
    v0[2 * i] = dot(contacts[i].jn, u_free);
    v0[2 * i + 1] = dot(contacts[i].jt, u_free);
  }
  std::array<std::array<T, 2 * kMaxContacts>, 2 * kMaxContacts> g{};
  for (int r = 0; r < rows; ++r) {
    const DofVector<T>& jr = (r % 2 == 0) ? contacts[r / 2].jn : contacts[r / 2].jt;
    for (int c = r; c < rows; ++c) {
      g[r][c] = dot(jr, minv_jt[c]);
      g[c][r] = g[r][c];
    }
  }
  std::array<T, kMaxContacts> restitution_bias{};
  for (int i = 0; i < nc; ++i) {
    restitution_bias[i] = cfg.restitution * dot(contacts[i].jn, u_pre);
  }

  std::array<T, 2 * kMaxContacts> p{};
  for (int r = 0; r < rows; ++r) p[r] = T(0.0);
  auto row_velocity = [&](int r) {
    T v = v0[r];
    for (int c = 0; c < rows; ++c) v = v + g[r][c] * p[c];
    return v;
  };

  sol.converged = false;
  for (int sweep = 0; sweep < cfg.gs_iters; ++sweep) {
    double change = 0.0;
    for (int i = 0; i < nc; ++i) {
      const T& w = contacts[i].weight;
      const int rn = 2 * i;
      const int rt = 2 * i + 1;

      const T gn = row_velocity(rn) + restitution_bias[i];
      const T pn = w * ad::max(T(0.0), p[rn] - gn / g[rn][rn]);
      change = std::max(change, std::abs(ad::value(pn) - ad::value(p[rn])));
      p[rn] = pn;

      // Sites without a tangential degree of freedom (e.g. a vertical rail).
      if (!(ad::value(g[rt][rt]) > 1e-12)) continue;
      const T gt = row_velocity(rt);
      const T bound = cfg.friction * p[rn];
      const T pt = w * ad::clamp(p[rt] - gt / g[rt][rt], -bound, bound);
      change = std::max(change, std::abs(ad::value(pt) - ad::value(p[rt])));
      p[rt] = pt;
    }
    sol.sweeps_used = sweep + 1;
    sol.residual = change;
    if (change < cfg.gs_tol) {
      sol.converged = true;
      break;
    }
  }

  for (int i = 0; i < nc; ++i) {
    sol.normal[i] = p[2 * i];
    sol.tangential[i] = p[2 * i + 1];
  }
  if (delta_u != nullptr) {
    for (int r = 0; r < rows; ++r) {
      for (int d = 0; d < n; ++d) (*delta_u)[d] = (*delta_u)[d] + minv_jt[r][d] * p[r];
    }
  }
  return sol;
}

}  // namespace dsim

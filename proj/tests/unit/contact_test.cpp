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

// Tests for gaps, the impulse solver, penalty forces and force curves.

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "dsim/ad/finite_difference.hpp"
#include "dsim/contact/contact.hpp"
#include "dsim/contact/force_curve.hpp"
#include "dsim/dynamics/moreau.hpp"
#include "dsim/dynamics/systems.hpp"

namespace dsim {
namespace {

ContactModelConfig model_config(ContactKind kind) {
  ContactModelConfig c;
  c.kind = kind;
  return c;
}

TEST(SigmoidWeight, Examples) {
  EXPECT_EQ(sigmoid_weight(0.0, 0.01), 0.5);
  EXPECT_EQ(sigmoid_weight(0.0, 1e-5), 0.5);
  EXPECT_GT(sigmoid_weight(-10 * 0.005, 0.005), 0.9999);
  // 1 / (1 + e), evaluated in extended precision.
  EXPECT_NEAR(sigmoid_weight(0.01, 0.01), 0.2689414213699951207488, 1e-15);
}

TEST(SigmoidWeight, ClampedExponent) {
  EXPECT_EQ(sigmoid_weight(1.0, 1e-3), 0.0);
  EXPECT_EQ(sigmoid_weight(-1.0, 1e-3), 1.0);
}

TEST(SigmoidWeight, StrictlyDecreasing) {
  double prev = 2.0;
  for (double d = -0.02; d <= 0.02; d += 1e-4) {
    const double w = sigmoid_weight(d, 0.005);
    EXPECT_LT(w, prev);
    prev = w;
  }
}

TEST(ComputeGaps, BouncerAboveGroundIsInactiveForHard) {
  const SystemModel m = make_bouncer1d();
  DofVector<double> q(1);
  q[0] = 0.5;
  const auto set = compute_gaps(m, q, model_config(ContactKind::kHard));
  EXPECT_EQ(set.count, 0);
  EXPECT_EQ(set.site_gap[0], 0.5);
}

TEST(ComputeGaps, BouncerAtOrigin) {
  const SystemModel m = make_bouncer1d();
  const DofVector<double> q(1);
  const auto set = compute_gaps(m, q, model_config(ContactKind::kHard));
  ASSERT_EQ(set.count, 1);
  EXPECT_EQ(set[0].gap, 0.0);
  EXPECT_EQ(set[0].jn[0], 1.0);
}

TEST(ComputeGaps, SmoothMarginAdmitsNearbySites) {
  const SystemModel m = make_bouncer1d();
  DofVector<double> q(1);
  auto cfg = model_config(ContactKind::kSmooth);
  q[0] = 4.9 * cfg.sharpness;
  EXPECT_EQ(compute_gaps(m, q, cfg).count, 1);
  q[0] = 5.1 * cfg.sharpness;
  EXPECT_EQ(compute_gaps(m, q, cfg).count, 0);
}

TEST(ComputeGaps, QuadrupedStanceJacobiansMatchFiniteDifferences) {
  const SystemModel m = make_quadruped2d();
  const auto s = nominal_state(m);
  const auto cfg = model_config(ContactKind::kSmooth);
  const auto set = compute_gaps(m, s.q, cfg);
  ASSERT_EQ(set.count, 2);
  for (int c = 0; c < 2; ++c) {
    EXPECT_NEAR(set[c].gap, 0.0, 1e-12);
    const auto& site = m.contact_sites[set[c].site];
    for (int axis = 0; axis < 2; ++axis) {
      auto foot = [&](std::span<const double> x) {
        const auto k = forward_kinematics(m, DofVector<double>::from(x));
        const auto p = body_point(k, site.body, site.x, site.z);
        return axis == 0 ? p.x : p.z;
      };
      const auto fd = ad::finite_difference(foot, s.q.span(), 1e-6);
      const auto& row = axis == 0 ? set[c].jt : set[c].jn;
      for (int i = 0; i < m.dof(); ++i) EXPECT_NEAR(row[i], fd[i], 1e-9);
    }
  }
}

// Single contact on a unit point mass, approaching at u_n = -1 with no
// other forces.
ImpulseSolution<double> single_contact(ContactKind kind, double gap,
                                       double restitution, double* post_velocity) {
  const SystemModel m = make_bouncer1d(1.0);
  auto cfg = model_config(kind);
  cfg.restitution = restitution;
  DofVector<double> q(1);
  q[0] = gap;
  const auto set = compute_gaps(m, q, cfg);
  DofMatrix<double> chol(1);
  chol(0, 0) = 1.0;
  DofVector<double> u(1);
  u[0] = -1.0;
  DofVector<double> du;
  const auto sol = solve_contacts(chol, u, u, set, cfg, &du);
  *post_velocity = u[0] + du[0];
  return sol;
}

TEST(SolveContacts, NoContactsIsEmpty) {
  DofMatrix<double> chol(1);
  chol(0, 0) = 1.0;
  const DofVector<double> u(1);
  const ContactSet<double> none;
  const auto sol = solve_contacts(chol, u, u, none, ContactModelConfig{});
  EXPECT_EQ(sol.count, 0);
  EXPECT_TRUE(sol.converged);
}

TEST(SolveContacts, SingleContactClosedForms) {
  double v = 0.0;
  auto hard = single_contact(ContactKind::kHard, 0.0, 0.0, &v);
  EXPECT_NEAR(hard.normal[0], 1.0, 1e-10);
  EXPECT_NEAR(v, 0.0, 1e-10);

  auto smooth = single_contact(ContactKind::kSmooth, 0.0, 0.0, &v);
  EXPECT_NEAR(smooth.normal[0], 0.5, 1e-10);
  EXPECT_NEAR(v, -0.5, 1e-10);

  single_contact(ContactKind::kHard, 0.0, 0.5, &v);
  EXPECT_NEAR(v, 0.5, 1e-10);

  // Smooth at arbitrary gap is exactly w * P_hard.
  auto smooth2 = single_contact(ContactKind::kSmooth, 0.003, 0.0, &v);
  EXPECT_NEAR(smooth2.normal[0], sigmoid_weight(0.003, 0.005), 1e-10);
}

StepConfig hard_step(double dt) {
  StepConfig cfg;
  cfg.dt = dt;
  cfg.contact.kind = ContactKind::kHard;
  cfg.contact.gs_iters = 200;
  cfg.contact.gs_tol = 1e-12;
  return cfg;
}

// Random quadruped states pressed into the ground.
std::vector<GeneralizedState<double>> pressed_states(int count, std::uint64_t seed) {
  const SystemModel m = make_quadruped2d();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<GeneralizedState<double>> out;
  for (int k = 0; k < count; ++k) {
    auto s = nominal_state(m);
    s.q[1] -= 0.005 * (1.0 + unif(rng));
    s.q[2] += 0.05 * unif(rng);
    for (int i = 0; i < m.dof(); ++i) s.u[i] = 0.5 * unif(rng);
    s.u[1] = -0.5 - 0.5 * std::abs(unif(rng));
    out.push_back(s);
  }
  return out;
}

TEST(SolveContactsProperty, ComplementarityAndFrictionCone) {
  const SystemModel m = make_quadruped2d();
  for (double restitution : {0.0, 0.4}) {
    StepConfig cfg = hard_step(0.005);
    cfg.contact.restitution = restitution;
    cfg.contact.friction = 0.6;
    const std::vector<double> tau(m.actuated.size(), 0.0);
    for (const auto& s : pressed_states(50, 17)) {
      const auto r = moreau_step<double>(m, s, tau, cfg);
      ASSERT_TRUE(r.converged);
      // Post-step normal velocity from the midpoint Jacobians.
      for (int c = 0; c < r.contacts.count; ++c) {
        const auto& cp = r.contacts[c];
        const double pn = r.site_normal_impulse[cp.site];
        const double pt = r.site_tangential_impulse[cp.site];
        const double vn = dot(cp.jn, r.state.u);
        const double un_pre = dot(cp.jn, s.u);
        EXPECT_GE(pn, 0.0);
        EXPECT_LE(std::abs(pt), cfg.contact.friction * pn + 1e-12);
        EXPECT_GE(vn + restitution * un_pre, -1e-8);
        EXPECT_LE(pn * (vn + restitution * un_pre), 1e-8);
      }
    }
  }
}

TEST(SolveContactsProperty, SmoothFrictionConeHolds) {
  const SystemModel m = make_quadruped2d();
  StepConfig cfg = hard_step(0.005);
  cfg.contact.kind = ContactKind::kSmooth;
  const std::vector<double> tau(m.actuated.size(), 0.0);
  for (const auto& s : pressed_states(50, 23)) {
    const auto r = moreau_step<double>(m, s, tau, cfg);
    for (std::size_t i = 0; i < m.contact_sites.size(); ++i) {
      EXPECT_GE(r.site_normal_impulse[i], 0.0);
      EXPECT_LE(std::abs(r.site_tangential_impulse[i]),
                cfg.contact.friction * r.site_normal_impulse[i] + 1e-12);
    }
  }
}

TEST(SolveContactsProperty, SmoothStepGradientMatchesFiniteDifferences) {
  const SystemModel m = make_quadruped2d();
  StepConfig cfg = hard_step(0.005);
  cfg.contact.kind = ContactKind::kSmooth;
  const int n = m.dof();
  int checked = 0;
  for (const auto& s0 : pressed_states(20, 31)) {
    auto post_velocity = [&](auto x) {
      using T = typename decltype(x)::value_type;
      const auto mt = m.cast<T>();
      GeneralizedState<T> s{DofVector<T>(n), DofVector<T>(n)};
      for (int i = 0; i < n; ++i) {
        s.q[i] = x[i];
        s.u[i] = x[n + i];
      }
      const std::vector<T> tau(m.actuated.size(), T(0.0));
      return moreau_step<T>(mt, s, tau, cfg).state.u;
    };
    std::vector<double> x0;
    for (int i = 0; i < n; ++i) x0.push_back(s0.q[i]);
    for (int i = 0; i < n; ++i) x0.push_back(s0.u[i]);
    ad::Tape tape;
    ad::TapeScope scope(tape);
    std::vector<ad::Var> xv;
    for (double v : x0) xv.push_back(tape.input(v));
    const auto uv = post_velocity(xv);
    for (int out = 0; out < n; ++out) {
      const auto g = tape.gradient(uv[out], xv);
      const auto fd = ad::finite_difference(
          [&](std::span<const double> x) {
            return post_velocity(std::vector<double>(x.begin(), x.end()))[out];
          },
          x0, 1e-7);
      for (std::size_t i = 0; i < x0.size(); ++i) {
        EXPECT_LT(ad::relative_error(g[i], fd[i]), 1e-5) << "out " << out << " in " << i;
      }
    }
    ++checked;
  }
  EXPECT_EQ(checked, 20);
}

TEST(SoftForce, Examples) {
  ContactModelConfig cfg = model_config(ContactKind::kSoft);
  cfg.stiffness = 1e4;
  cfg.damping = 100.0;
  EXPECT_EQ(soft_force(0.01, 0.0, cfg), 0.0);
  EXPECT_NEAR(soft_force(-0.01, 0.0, cfg), 100.0, 1e-12);
  EXPECT_EQ(soft_force(-0.001, 1.0, cfg), 0.0);
}

TEST(ForceCurve, Examples) {
  ContactModelConfig cfg = model_config(ContactKind::kHard);
  const CanonicalScenario sc;
  const ForcePoint hard = force_curve(0.005, cfg, sc);
  EXPECT_EQ(hard.force, 0.0);
  EXPECT_EQ(hard.gradient, 0.0);
  const ForcePoint hard_in = force_curve(-0.005, cfg, sc);
  EXPECT_NEAR(hard_in.force, sc.support_force(), 1e-9);
  EXPECT_EQ(hard_in.gradient, 0.0);

  cfg.kind = ContactKind::kSmooth;
  EXPECT_NEAR(force_curve(0.0, cfg, sc).force, 0.5 * sc.support_force(), 1e-9);

  cfg.kind = ContactKind::kSoft;
  const ForcePoint soft = force_curve(-0.002, cfg, sc);
  EXPECT_NEAR(soft.force, cfg.stiffness * 0.002, 1e-9);
  EXPECT_NEAR(soft.gradient, -cfg.stiffness, 1e-6);
}

TEST(ForceCurve, SmoothGradientBandAndHardZero) {
  ContactModelConfig cfg = model_config(ContactKind::kSmooth);
  const CanonicalScenario sc;
  const double s = cfg.sharpness;
  for (double d = -2.99 * s; d < 3 * s; d += 0.05 * s) {
    EXPECT_GT(std::abs(force_curve(d, cfg, sc).gradient), 0.01 * sc.support_force() / s);
  }
  cfg.kind = ContactKind::kHard;
  for (double d = -0.02; d <= 0.02; d += 0.001) {
    if (d == 0.0) continue;
    EXPECT_EQ(force_curve(d, cfg, sc).gradient, 0.0);
  }
}

TEST(ForceCurve, SmoothRecoversHardAsSharpnessShrinks) {
  const CanonicalScenario sc;
  ContactModelConfig hard = model_config(ContactKind::kHard);
  for (double d : {-0.01, 0.01}) {
    const double f_hard = force_curve(d, hard, sc).force;
    double prev = 1e300;
    for (double s : {1e-2, 1e-3, 1e-4, 1e-5}) {
      ContactModelConfig smooth = model_config(ContactKind::kSmooth);
      smooth.sharpness = s;
      const double err = std::abs(force_curve(d, smooth, sc).force - f_hard);
      EXPECT_LE(err, prev);
      prev = err;
    }
    EXPECT_LT(prev, 1e-9);
  }
}

TEST(ForceCurve, StochasticReferenceHasZeroFirstOrderGradient) {
  ContactModelConfig cfg = model_config(ContactKind::kHard);
  const CanonicalScenario sc;
  const double s = 0.005;
  const auto p = stochastic_force_curve(0.0, s, 100000, 1, cfg, sc);
  EXPECT_NEAR(p.mean_force, 0.5 * sc.support_force(), 0.01 * sc.support_force());
  EXPECT_EQ(p.mean_fog, 0.0);
  // The zeroth-order estimate sees the smoothed slope -F / (sigma sqrt(2 pi)).
  EXPECT_NEAR(p.zog_gradient, -sc.support_force() / (s * std::sqrt(2 * M_PI)),
              0.05 * sc.support_force() / s);
}

}  // namespace
}  // namespace dsim

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

// Normal force and its derivative with respect to the gap for a single
// resting contact, under each contact model.
//
// The canonical scenario is a point mass on a vertical rail, at rest, with
// its contact point at gap d. One Moreau step is taken and the force is the
// normal impulse divided by dt, so every model goes through the same solver
// code as the simulation. Derivatives are taken with the tape, with respect
// to d.

#include <cstdint>

#include "dsim/contact/contact.hpp"

namespace dsim {

struct CanonicalScenario {
  double mass = 1.0;      // kg
  double gravity = 9.81;  // m/s^2
  double dt = 1e-3;       // s

  double support_force() const { return mass * gravity; }
};

struct ForcePoint {
  double force = 0.0;     // N
  double gradient = 0.0;  // dF/dd, N/m
};

/// Steady normal force at gap d for the model selected by cfg.kind.
ForcePoint force_curve(double gap, const ContactModelConfig& cfg,
                       const CanonicalScenario& scenario = {});

struct StochasticForcePoint {
  double mean_force = 0.0;     // E[F_hard(d + eta)]
  double mean_fog = 0.0;       // E[dF_hard/dd (d + eta)], per-sample analytic
  double zog_gradient = 0.0;   // E[F_hard(d + eta) eta] / sigma^2
};

/// Monte-Carlo smoothing of the hard model under Gaussian gap noise
/// eta ~ N(0, sigma^2). `cfg.kind` is ignored (always hard).
StochasticForcePoint stochastic_force_curve(double gap, double sigma,
                                            int samples, std::uint64_t seed,
                                            const ContactModelConfig& cfg,
                                            const CanonicalScenario& scenario = {});

}  // namespace dsim

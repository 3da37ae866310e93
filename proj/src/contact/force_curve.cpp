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

#include "dsim/contact/force_curve.hpp"

#include <random>

#include "dsim/ad/ops.hpp"
#include "dsim/dynamics/moreau.hpp"
#include "dsim/dynamics/systems.hpp"

namespace dsim {
namespace {

template <class T>
T canonical_force(const T& gap, const BasicSystemModel<T>& model,
                  const ContactModelConfig& cfg,
                  const CanonicalScenario& scenario) {
  GeneralizedState<T> s{DofVector<T>(1), DofVector<T>(1)};
  s.q[0] = gap;
  s.u[0] = T(0.0);
  StepConfig step;
  step.dt = scenario.dt;
  step.contact = cfg;
  const T zero(0.0);
  const StepResult<T> r = moreau_step(model, s, std::span<const T>(&zero, 1), step);
  return r.site_normal_impulse[0] / scenario.dt;
}

SystemModel canonical_model(const CanonicalScenario& scenario) {
  SystemModel m = make_bouncer1d(scenario.mass);
  m.gravity = scenario.gravity;
  return m;
}

}  // namespace

ForcePoint force_curve(double gap, const ContactModelConfig& cfg,
                       const CanonicalScenario& scenario) {
  const BasicSystemModel<ad::Var> model =
      canonical_model(scenario).cast<ad::Var>();
  ad::Tape tape;
  ad::TapeScope scope(tape);
  const ad::Var d = tape.input(gap);
  const ad::Var f = canonical_force(d, model, cfg, scenario);
  const ad::Var inputs[] = {d};
  return {f.value(), tape.gradient(f, inputs)[0]};
}

StochasticForcePoint stochastic_force_curve(double gap, double sigma,
                                            int samples, std::uint64_t seed,
                                            const ContactModelConfig& cfg,
                                            const CanonicalScenario& scenario) {
  ContactModelConfig hard = cfg;
  hard.kind = ContactKind::kHard;
  const SystemModel model = canonical_model(scenario);
  const BasicSystemModel<ad::Var> var_model = model.cast<ad::Var>();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  double sum_f = 0.0;
  double sum_fog = 0.0;
  double sum_zog = 0.0;
  ad::Tape tape;
  ad::TapeScope scope(tape);
  for (int i = 0; i < samples; ++i) {
    const double eta = noise(rng);
    tape.clear();
    const ad::Var d = tape.input(gap + eta);
    const ad::Var f = canonical_force(d, var_model, hard, scenario);
    const ad::Var inputs[] = {d};
    sum_f += f.value();
    sum_fog += tape.gradient(f, inputs)[0];
    sum_zog += f.value() * eta;
  }
  const double n = static_cast<double>(samples);
  return {sum_f / n, sum_fog / n, sum_zog / (n * sigma * sigma)};
}

}  // namespace dsim

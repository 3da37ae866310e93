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

// Subcommand implementations. Each returns a process exit code:
//   0 success, 1 check failure, 2 usage or config error, 3 runtime fault.
// Progress and errors go to `log`; artifacts go to files.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dsim/learn/agent.hpp"
#include "dsim/xcli/config.hpp"

namespace dsim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitFault = 3;

inline constexpr const char* kOutputRootEnv = "DSIM_OUTPUT_ROOT";

/// `dir` if absolute or no output root is set, else root / dir.
std::filesystem::path resolve_output_dir(const std::string& dir);

/// Agent sized for `cfg` with optimizer settings for cfg.algorithm.
Agent make_agent(const RunConfig& cfg, int obs_dim, int act_dim);

/// Sets the learning rates for agent.env_steps: SHAC decays linearly to
/// shac.final_lr over shac.lr_decay_steps (or train.max_env_steps), PPO is
/// constant.
void apply_lr_schedule(const RunConfig& cfg, Agent& agent);

// ---- train / eval ------------------------------------------------------

int cmd_train(const RunConfig& cfg, const std::filesystem::path& out_dir,
              int threads, std::ostream& log);

struct EvalOptions {
  std::string checkpoint;     // empty: freshly initialized agent
  int episodes = 20;
  std::uint64_t seed = 1000003;
};

int cmd_eval(const RunConfig& cfg, const EvalOptions& opt,
             const std::filesystem::path& out_dir, int threads,
             std::ostream& log);

// ---- simulate -----------------------------------------------------------

struct SimulateOptions {
  std::string checkpoint;        // empty: zero actions
  int steps = 100;               // policy steps
  bool passive = false;          // zero PD gains, hard-clamp saturation
  std::vector<double> q0;        // initial generalized coordinates
  std::vector<double> u0;        // initial generalized velocities
};

struct TrajectoryRow {
  int step = 0;      // policy step
  int substep = 0;
  double time = 0.0;  // at the end of the sub-step
  std::vector<double> q, u;
  std::vector<double> gap;          // per contact site, at the step midpoint
  std::vector<double> normal_impulse, tangential_impulse;
  std::vector<double> torque;
  double reward = 0.0;  // the policy step's reward, on its last sub-step
  int termination = 0;  // TerminationType on the last sub-step
};

struct Trajectory {
  std::vector<std::string> columns;
  std::vector<double> initial_q;
  std::vector<TrajectoryRow> rows;
};

/// Rolls one lane for `opt.steps` policy steps with episode resets
/// disabled. Throws ConfigError on checkpoint/environment mismatch.
Trajectory simulate(const RunConfig& cfg, const SimulateOptions& opt);

int cmd_simulate(const RunConfig& cfg, const SimulateOptions& opt,
                 const std::filesystem::path& out_csv, std::ostream& log);

/// Heights of the local maxima of generalized coordinate `coord`.
std::vector<double> apex_heights(const Trajectory& traj, int coord);

// ---- grad-check ---------------------------------------------------------

struct GradCheckOptions {
  std::string system = "bouncer1d";
  ContactKind contact = ContactKind::kSmooth;
  int steps = 8;                // policy steps, <= 32
  int trials = 10;
  std::uint64_t seed = 1;
  double eps = 1e-7;            // central-difference step with contact
  double free_eps = 1e-6;       // and for windows without contact
  double contact_tol = 1e-4;
  double free_tol = 1e-7;       // windows without any active contact
  bool airborne = false;        // start high enough that the window has no contact
};

struct GradCheckTrial {
  int trial = 0;
  int inputs = 0;            // differentiated quantities
  bool had_contact = false;  // any active contact in the window
  double objective = 0.0;
  double max_rel_error = 0.0;
  double threshold = 0.0;
  bool pass = false;
  // Hard contact inside the window: the gradient exists almost everywhere
  // but carries no information about the impact, so the trial is reported
  // as expected-fail whatever its error.
  bool expected_fail = false;
};

/// Gradient of the undiscounted window return w.r.t. the initial state and
/// every action, against central differences. The relative error of a
/// component is |g - g_fd| / max(1, |g_fd|).
std::vector<GradCheckTrial> grad_check(const EnvConfig& base, const GradCheckOptions& opt);

int cmd_grad_check(const EnvConfig& base, const GradCheckOptions& opt,
                   const std::filesystem::path& out_csv, std::ostream& log);

// ---- contact-sweep ------------------------------------------------------

struct ContactSweepOptions {
  double d_min = -0.02;
  double d_max = 0.02;
  int points = 161;
  double sigma = 0.0;      // <= 0: s * pi / sqrt(3)
  int samples = 100000;
  std::uint64_t seed = 1;
  double mass = 1.0;
  double dt = 1e-3;
  // Models to evaluate; the columns of the others are left empty.
  bool hard = true, soft = true, smooth = true, stochastic = true;
};

struct ContactSweepRow {
  double d;
  double f_hard, grad_hard;
  double f_soft, grad_soft;
  double f_smooth, grad_smooth;
  double f_stoch_mean, grad_stoch_fog_mean, grad_stoch_zog;
};

std::vector<ContactSweepRow> contact_sweep(const ContactModelConfig& cfg,
                                           const ContactSweepOptions& opt);

int cmd_contact_sweep(const ContactModelConfig& cfg, const ContactSweepOptions& opt,
                      const std::filesystem::path& out_csv, std::ostream& log);

// ---- stability ----------------------------------------------------------

struct StabilityOptions {
  std::vector<double> dts{1e-4, 1e-3, 5e-3};
  double mass = 10.0;
  double stiffness = 1e7;
  double damping = 100.0;
  double sharpness = 1e-4;
  double duration = 2.0;
};

struct StabilityResult {
  std::string model;
  double dt = 0.0;
  int steps = 0;
  double max_penetration = 0.0;
  double energy_initial = 0.0;
  double energy_max_growth = 0.0;  // max over time of E(t) - E(0)
  double kinetic_first_half = 0.0;  // mean kinetic energy
  double kinetic_second_half = 0.0;
  double max_abs_state = 0.0;
  bool diverged = false;
};

/// Energy reference for the divergence test: max(|E(0)|, m g * 1 mm).
std::vector<StabilityResult> stability(const StabilityOptions& opt);

int cmd_stability(const StabilityOptions& opt, const std::filesystem::path& out_csv,
                  std::ostream& log);

}  // namespace dsim

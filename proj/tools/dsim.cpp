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
// dsim: train, evaluate and analyse policies on the planar simulator.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dsim/learn/checkpoint.hpp"
#include "dsim/xcli/commands.hpp"

namespace {

using namespace dsim;

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;
  int threads = 1;

  void attach(CLI::App* app, bool with_threads = true) {
    app->add_option("-c,--config", path, "Run configuration (JSON)");
    app->add_option("--set", overrides, "Override a config value, key.path=value")
        ->take_all();
    if (with_threads) {
      app->add_option("--threads", threads, "Worker threads (results do not depend on it)")
          ->check(CLI::Range(1, 1024));
    }
  }
  RunConfig load() const { return load_config(path, overrides); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentiable planar rigid-body simulator and policy learning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dsim 1.0");

  ConfigArgs common;
  std::string out;

  CLI::App* train = app.add_subcommand("train", "Train a policy (SHAC or PPO)");
  common.attach(train);
  train->add_option("-o,--out", out, "Output directory (default: config output_dir)");

  EvalOptions eval_opt;
  std::string eval_contact;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint with the mean action");
  common.attach(eval);
  eval->add_option("--checkpoint", eval_opt.checkpoint, "Checkpoint file");
  eval->add_option("--episodes", eval_opt.episodes, "Evaluation episodes")
      ->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_opt.seed, "Evaluation seed");
  eval->add_option("--contact", eval_contact, "Contact model override")
      ->check(CLI::IsMember({"hard", "soft", "smooth"}));
  eval->add_option("-o,--out", out, "Output directory (default: config output_dir/eval)");

  SimulateOptions sim_opt;
  CLI::App* sim = app.add_subcommand("simulate", "Roll one lane and write its trajectory");
  common.attach(sim, false);
  sim->add_option("--checkpoint", sim_opt.checkpoint, "Policy checkpoint (default: zero actions)");
  sim->add_option("--steps", sim_opt.steps, "Policy steps")->check(CLI::NonNegativeNumber);
  sim->add_flag("--passive", sim_opt.passive, "Zero PD gains and hard-clamped torques");
  sim->add_option("--q0", sim_opt.q0, "Initial generalized coordinates")->delimiter(',');
  sim->add_option("--u0", sim_opt.u0, "Initial generalized velocities")->delimiter(',');
  sim->add_option("-o,--out", out, "Trajectory CSV (default: trajectory.csv)");

  GradCheckOptions gc_opt;
  std::string gc_contact = "smooth";
  CLI::App* gc = app.add_subcommand("grad-check", "Analytic vs finite-difference gradients");
  common.attach(gc, false);
  gc->add_option("--system", gc_opt.system, "System")
      ->check(CLI::IsMember({"bouncer1d", "pendulum", "hopper2d", "quadruped2d"}));
  gc->add_option("--contact", gc_contact, "Contact model")
      ->check(CLI::IsMember({"hard", "soft", "smooth"}));
  gc->add_option("--steps", gc_opt.steps, "Policy steps per window")->check(CLI::Range(1, 32));
  gc->add_option("--trials", gc_opt.trials, "Random trials")->check(CLI::NonNegativeNumber);
  gc->add_option("--seed", gc_opt.seed, "Trial seed");
  gc->add_option("--eps", gc_opt.eps, "Central-difference step for windows with contact")
      ->check(CLI::PositiveNumber);
  gc->add_option("--free-eps", gc_opt.free_eps, "Central-difference step without contact")
      ->check(CLI::PositiveNumber);
  gc->add_flag("--airborne", gc_opt.airborne, "Start every window in the air");
  gc->add_option("-o,--out", out, "Report CSV (default: grad_check.csv)");

  ContactSweepOptions cs_opt;
  std::vector<std::string> cs_models;
  CLI::App* cs = app.add_subcommand("contact-sweep", "Force and gradient versus gap");
  common.attach(cs, false);
  cs->add_option("--models", cs_models, "Subset of hard,soft,smooth,stochastic")
      ->delimiter(',')
      ->check(CLI::IsMember({"hard", "soft", "smooth", "stochastic"}));
  cs->add_option("--d-min", cs_opt.d_min, "Smallest gap (m)");
  cs->add_option("--d-max", cs_opt.d_max, "Largest gap (m)");
  cs->add_option("--points", cs_opt.points, "Number of gaps")->check(CLI::Range(2, 1000000));
  cs->add_option("--sigma", cs_opt.sigma, "Gap noise std (default: s pi / sqrt 3)");
  cs->add_option("--samples", cs_opt.samples, "Monte-Carlo samples per gap")
      ->check(CLI::PositiveNumber);
  cs->add_option("--seed", cs_opt.seed, "Monte-Carlo seed");
  cs->add_option("--mass", cs_opt.mass, "Scenario mass (kg)")->check(CLI::PositiveNumber);
  cs->add_option("--dt", cs_opt.dt, "Scenario time step (s)")->check(CLI::PositiveNumber);
  cs->add_option("-o,--out", out, "CSV path (default: contact_sweep.csv)");

  StabilityOptions st_opt;
  CLI::App* st = app.add_subcommand("stability", "Resting-mass stability, soft vs smooth");
  st->add_option("--dt", st_opt.dts, "Time steps")->delimiter(',');
  st->add_option("--stiffness", st_opt.stiffness, "Soft-model k_n (N/m)")
      ->check(CLI::PositiveNumber);
  st->add_option("--damping", st_opt.damping, "Soft-model c_n (N s/m)");
  st->add_option("--sharpness", st_opt.sharpness, "Smooth-model s (m)")
      ->check(CLI::PositiveNumber);
  st->add_option("--mass", st_opt.mass, "Mass (kg)")->check(CLI::PositiveNumber);
  st->add_option("--duration", st_opt.duration, "Simulated time (s)")
      ->check(CLI::PositiveNumber);
  st->add_option("-o,--out", out, "CSV path (default: stability.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto out_or = [&](const std::string& fallback) {
    return resolve_output_dir(out.empty() ? fallback : out);
  };
  try {
    if (train->parsed()) {
      RunConfig cfg = common.load();
      if (!out.empty()) cfg.output_dir = out;
      return cmd_train(cfg, resolve_output_dir(cfg.output_dir), common.threads, std::cout);
    }
    if (eval->parsed()) {
      if (!eval_contact.empty()) common.overrides.push_back("contact.kind=" + eval_contact);
      const RunConfig cfg = common.load();
      const auto dir = out.empty() ? resolve_output_dir(cfg.output_dir) / "eval"
                                   : resolve_output_dir(out);
      return cmd_eval(cfg, eval_opt, dir, common.threads, std::cout);
    }
    if (sim->parsed()) {
      return cmd_simulate(common.load(), sim_opt, out_or("trajectory.csv"), std::cout);
    }
    if (gc->parsed()) {
      common.overrides.insert(common.overrides.begin(), "env.system=" + gc_opt.system);
      gc_opt.contact = contact_kind_from_string(gc_contact);
      return cmd_grad_check(common.load().env, gc_opt, out_or("grad_check.csv"), std::cout);
    }
    if (cs->parsed()) {
      if (!cs_models.empty()) {
        auto has = [&](const char* m) {
          return std::find(cs_models.begin(), cs_models.end(), m) != cs_models.end();
        };
        cs_opt.hard = has("hard");
        cs_opt.soft = has("soft");
        cs_opt.smooth = has("smooth");
        cs_opt.stochastic = has("stochastic");
      }
      return cmd_contact_sweep(common.load().env.contact, cs_opt, out_or("contact_sweep.csv"),
                               std::cout);
    }
    if (st->parsed()) return cmd_stability(st_opt, out_or("stability.csv"), std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFault;
  }
  return kExitUsage;
}

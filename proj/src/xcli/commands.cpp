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
#include "dsim/xcli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "dsim/ad/finite_difference.hpp"
#include "dsim/ad/tape.hpp"
#include "dsim/contact/force_curve.hpp"
#include "dsim/envs/parallel.hpp"
#include "dsim/envs/seeding.hpp"
#include "dsim/learn/checkpoint.hpp"
#include "dsim/learn/evaluate.hpp"
#include "dsim/learn/ppo.hpp"
#include "dsim/learn/shac.hpp"

namespace dsim {
namespace fs = std::filesystem;

namespace {

// Shortest text that round-trips; NaN is an empty field.
std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const fs::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  void comment(const std::string& text) { out_ << "# " << text << '\n'; }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << text;
}

Agent load_agent_for(const std::string& path, const LocomotionEnv& env) {
  LoadedCheckpoint ck;
  try {
    ck = load_checkpoint(path);
  } catch (const CheckpointError& e) {
    throw ConfigError(e.what());
  }
  if (ck.agent.obs_dim() != env.observation_dim() || ck.agent.act_dim() != env.action_dim()) {
    std::ostringstream msg;
    msg << "checkpoint '" << path << "' has observation/action dims " << ck.agent.obs_dim()
        << "/" << ck.agent.act_dim() << " but " << env.config().system << " needs "
        << env.observation_dim() << "/" << env.action_dim();
    throw ConfigError(msg.str());
  }
  return std::move(ck.agent);
}

}  // namespace

fs::path resolve_output_dir(const std::string& dir) {
  const fs::path p(dir);
  const char* root = std::getenv(kOutputRootEnv);
  if (p.is_absolute() || root == nullptr || *root == '\0') return p;
  return fs::path(root) / p;
}

Agent make_agent(const RunConfig& cfg, int obs_dim, int act_dim) {
  AdamConfig actor, critic;
  if (cfg.algorithm == "shac") {
    actor = {cfg.shac.actor_lr, cfg.shac.adam_beta1, cfg.shac.adam_beta2, 1e-8};
    critic = {cfg.shac.critic_lr, cfg.shac.adam_beta1, cfg.shac.adam_beta2, 1e-8};
  } else {
    actor = critic = {cfg.ppo.lr, 0.9, 0.999, 1e-8};
  }
  return Agent::create(obs_dim, act_dim, cfg.net, cfg.seed, actor, critic);
}

void apply_lr_schedule(const RunConfig& cfg, Agent& agent) {
  if (cfg.algorithm != "shac" || !cfg.shac.linear_lr_decay) return;
  const std::int64_t horizon =
      cfg.shac.lr_decay_steps > 0 ? cfg.shac.lr_decay_steps : cfg.train.max_env_steps;
  const double f =
      horizon > 0 ? std::min(1.0, static_cast<double>(agent.env_steps) / horizon) : 1.0;
  agent.actor_opt.config().lr = cfg.shac.actor_lr + (cfg.shac.final_lr - cfg.shac.actor_lr) * f;
  agent.critic_opt.config().lr =
      cfg.shac.critic_lr + (cfg.shac.final_lr - cfg.shac.critic_lr) * f;
}

// ---- train ----------------------------------------------------------------

int cmd_train(const RunConfig& cfg, const fs::path& out_dir, int threads, std::ostream& log) {
  fs::create_directories(out_dir / "checkpoints");
  const std::string hash = config_hash(cfg);
  write_text(out_dir / "config.resolved", resolved_text(cfg));

  const LocomotionEnv env(cfg.env);
  WorkerPool pool(threads);
  Agent agent = make_agent(cfg, env.observation_dim(), env.action_dim());
  std::optional<ShacTrainer> shac;
  std::optional<PpoTrainer> ppo;
  if (cfg.algorithm == "shac") {
    shac.emplace(env, cfg.shac, cfg.seed, &pool);
  } else {
    ppo.emplace(env, cfg.ppo, cfg.seed, &pool);
  }
  const CheckpointMeta meta{cfg.algorithm, hash};

  CsvWriter metrics(out_dir / "metrics.csv");
  metrics.comment("dsim metrics v1");
  metrics.comment("config_hash " + hash);
  metrics.row({"iteration", "env_steps", "mean_reward", "episode_return", "episode_length",
               "actor_loss", "critic_loss", "grad_norm", "faults", "unconverged", "clamped",
               "eval_return", "eval_length", "eval_velocity"});
  CsvWriter timing(out_dir / "timing.csv");
  timing.comment("dsim timing v1");
  timing.comment("config_hash " + hash);
  timing.row({"iteration", "env_steps", "iteration_seconds", "wall_seconds"});

  const TrainSettings& t = cfg.train;
  auto budget_left = [&] {
    return agent.env_steps < t.max_env_steps &&
           (t.max_iterations < 0 || agent.iteration < t.max_iterations);
  };

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  std::int64_t next_eval = t.eval_interval;
  int faults = 0;
  while (budget_left()) {
    const auto t0 = Clock::now();
    apply_lr_schedule(cfg, agent);
    const IterationMetrics m = shac ? shac->iterate(agent) : ppo->iterate(agent);
    faults += m.faults;
    const bool last = !budget_left();

    double eval_return = std::nan(""), eval_length = std::nan(""), eval_velocity = std::nan("");
    if (t.eval_interval > 0 && (agent.env_steps >= next_eval || last)) {
      const EvalMetrics e = evaluate(agent, env, t.eval_episodes, t.eval_seed, &pool);
      eval_return = e.mean_return;
      eval_length = e.mean_episode_length;
      eval_velocity = e.mean_forward_velocity;
      while (next_eval <= agent.env_steps) next_eval += t.eval_interval;
    }
    metrics.row({std::to_string(m.iteration), std::to_string(m.env_steps), num(m.mean_reward),
                 num(m.episode_return), num(m.episode_length), num(m.actor_loss),
                 num(m.critic_loss), num(m.grad_norm), std::to_string(m.faults),
                 std::to_string(m.unconverged), std::to_string(m.clamped), num(eval_return),
                 num(eval_length), num(eval_velocity)});
    const auto t1 = Clock::now();
    timing.row({std::to_string(m.iteration), std::to_string(m.env_steps),
                num(std::chrono::duration<double>(t1 - t0).count()),
                num(std::chrono::duration<double>(t1 - start).count())});

    if (!std::isnan(eval_return)) {
      log << "iteration " << m.iteration << " env_steps " << m.env_steps << " eval_return "
          << eval_return << " eval_length " << eval_length << " eval_velocity "
          << eval_velocity << '\n';
    }
    if (faults > t.fault_budget) {
      log << "error: " << faults << " faults exceed the fault budget of " << t.fault_budget
          << '\n';
      return kExitFault;
    }
    if (eval_return >= t.stop_return) {
      log << "eval_return reached stop_return " << t.stop_return << '\n';
      break;
    }
    if (t.checkpoint_interval > 0 && agent.iteration % t.checkpoint_interval == 0) {
      char name[40];
      std::snprintf(name, sizeof(name), "iter_%08lld.ckpt",
                    static_cast<long long>(agent.iteration));
      save_checkpoint((out_dir / "checkpoints" / name).string(), agent, meta);
    }
  }
  save_checkpoint((out_dir / "checkpoints" / "final.ckpt").string(), agent, meta);
  log << "done: " << agent.iteration << " iterations, " << agent.env_steps << " env steps, "
      << faults << " faults\n";
  return kExitOk;
}

// ---- eval -----------------------------------------------------------------

int cmd_eval(const RunConfig& cfg, const EvalOptions& opt, const fs::path& out_dir,
             int threads, std::ostream& log) {
  const LocomotionEnv env(cfg.env);
  Agent agent = opt.checkpoint.empty()
                    ? make_agent(cfg, env.observation_dim(), env.action_dim())
                    : load_agent_for(opt.checkpoint, env);
  fs::create_directories(out_dir);
  const std::string hash = config_hash(cfg);
  write_text(out_dir / "config.resolved", resolved_text(cfg));

  WorkerPool pool(threads);
  const EvalMetrics e = evaluate(agent, env, opt.episodes, opt.seed, &pool);

  CsvWriter metrics(out_dir / "metrics.csv");
  metrics.comment("dsim eval v1");
  metrics.comment("config_hash " + hash);
  metrics.comment("contact " + to_string(cfg.env.contact.kind) + " seed " +
                  std::to_string(opt.seed));
  metrics.row({"episodes", "mean_return", "mean_episode_length", "mean_forward_velocity",
               "mean_command", "velocity_error", "falls", "unconverged", "faults"});
  metrics.row({std::to_string(opt.episodes), num(e.mean_return), num(e.mean_episode_length),
               num(e.mean_forward_velocity), num(e.mean_command), num(e.velocity_error),
               std::to_string(e.falls), std::to_string(e.unconverged), std::to_string(e.faults)});
  log << "mean_return " << e.mean_return << " mean_episode_length " << e.mean_episode_length
      << " mean_forward_velocity " << e.mean_forward_velocity << " mean_command "
      << e.mean_command << " falls " << e.falls << '\n';
  return kExitOk;
}

// ---- simulate -------------------------------------------------------------

Trajectory simulate(const RunConfig& cfg, const SimulateOptions& opt) {
  if (opt.steps < 0) throw ConfigError("steps must be >= 0");
  EnvConfig ec = cfg.env;
  ec.episode_length = std::max(ec.episode_length, opt.steps + 1);
  if (opt.passive) {
    ec.actuator.kp = 0.0;
    ec.actuator.kd = 0.0;
    ec.actuator.mode = SaturationMode::kHardClamp;
  }
  const LocomotionEnv env(ec);
  std::optional<Agent> agent;
  if (!opt.checkpoint.empty()) agent = load_agent_for(opt.checkpoint, env);

  const SystemModel& model = env.model();
  const int n = model.dof();
  const int sites = static_cast<int>(model.contact_sites.size());
  const int na = env.action_dim();

  Trajectory traj;
  traj.columns = {"step", "substep", "time"};
  for (int i = 0; i < n; ++i) traj.columns.push_back("q" + std::to_string(i));
  for (int i = 0; i < n; ++i) traj.columns.push_back("u" + std::to_string(i));
  for (int i = 0; i < sites; ++i) traj.columns.push_back("gap" + std::to_string(i));
  for (int i = 0; i < sites; ++i) traj.columns.push_back("pn" + std::to_string(i));
  for (int i = 0; i < sites; ++i) traj.columns.push_back("pt" + std::to_string(i));
  for (int j = 0; j < na; ++j) traj.columns.push_back("tau" + std::to_string(j));
  traj.columns.push_back("reward");
  traj.columns.push_back("termination");

  LaneState<double> lane;
  env.reset_lane(lane, cfg.seed, 0);
  auto set_coords = [&](const std::vector<double>& v, DofVector<double>& dst, const char* what) {
    if (v.empty()) return;
    if (static_cast<int>(v.size()) != n) {
      throw ConfigError(std::string(what) + " needs " + std::to_string(n) + " values for " +
                        ec.system);
    }
    for (int i = 0; i < n; ++i) dst[i] = v[i];
  };
  set_coords(opt.q0, lane.state.q, "q0");
  set_coords(opt.u0, lane.state.u, "u0");
  traj.initial_q.assign(lane.state.q.begin(), lane.state.q.end());

  int step = 0;
  auto observer = [&](int k, const StepResult<double>& r, const std::vector<double>& torque) {
    TrajectoryRow row;
    row.step = step;
    row.substep = k;
    row.time = (static_cast<double>(step) * ec.decimation + k + 1) * ec.dt;
    row.q.assign(r.state.q.begin(), r.state.q.end());
    row.u.assign(r.state.u.begin(), r.state.u.end());
    for (int i = 0; i < sites; ++i) {
      row.gap.push_back(r.contacts.site_gap[i]);
      row.normal_impulse.push_back(r.site_normal_impulse[i]);
      row.tangential_impulse.push_back(r.site_tangential_impulse[i]);
    }
    row.torque = torque;
    row.reward = std::nan("");
    traj.rows.push_back(std::move(row));
  };
  std::vector<double> action(na, 0.0);
  for (; step < opt.steps; ++step) {
    if (agent) action = agent->act(env.observe(lane));
    const LaneStep<double> s = env.step_lane<double>(lane, action, cfg.seed, 0, observer);
    traj.rows.back().reward = s.reward;
    traj.rows.back().termination = static_cast<int>(s.termination);
    if (s.done) break;
  }
  return traj;
}

int cmd_simulate(const RunConfig& cfg, const SimulateOptions& opt, const fs::path& out_csv,
                 std::ostream& log) {
  const Trajectory traj = simulate(cfg, opt);
  if (out_csv.has_parent_path()) fs::create_directories(out_csv.parent_path());
  CsvWriter csv(out_csv);
  csv.comment("dsim trajectory v1");
  csv.comment("config_hash " + config_hash(cfg));
  csv.comment("system " + cfg.env.system + " contact " + to_string(cfg.env.contact.kind) +
              " dt " + num(cfg.env.dt) + " decimation " + std::to_string(cfg.env.decimation) +
              (opt.passive ? " passive" : ""));
  csv.row(traj.columns);
  for (const TrajectoryRow& r : traj.rows) {
    std::vector<std::string> f{std::to_string(r.step), std::to_string(r.substep), num(r.time)};
    for (const auto* v : {&r.q, &r.u, &r.gap, &r.normal_impulse, &r.tangential_impulse,
                          &r.torque}) {
      for (double x : *v) f.push_back(num(x));
    }
    f.push_back(num(r.reward));
    f.push_back(r.reward == r.reward ? std::to_string(r.termination) : "");
    csv.row(f);
  }
  log << "wrote " << traj.rows.size() << " rows to " << out_csv.string() << '\n';
  return kExitOk;
}

std::vector<double> apex_heights(const Trajectory& traj, int coord) {
  std::vector<double> q;
  if (coord < static_cast<int>(traj.initial_q.size())) q.push_back(traj.initial_q[coord]);
  for (const TrajectoryRow& r : traj.rows) q.push_back(r.q.at(coord));
  std::vector<double> apexes;
  for (std::size_t i = 0; i + 1 < q.size(); ++i) {
    const bool rising = i == 0 || q[i] >= q[i - 1];
    if (rising && q[i] > q[i + 1]) apexes.push_back(q[i]);
  }
  return apexes;
}

// ---- grad-check -----------------------------------------------------------

namespace {

// Undiscounted return of `steps` policy steps; x = [q0, u0, actions].
template <class T>
T window_return(const LocomotionEnv& env, const LaneState<double>& start,
                std::span<const T> x, int steps, bool* contact) {
  const int n = env.model().dof();
  const int na = env.action_dim();
  LaneState<T> lane = start.cast<T>();
  for (int i = 0; i < n; ++i) {
    lane.state.q[i] = x[i];
    lane.state.u[i] = x[n + i];
  }
  SubstepObserver<T> observer;
  if (contact != nullptr) {
    observer = [contact](int, const StepResult<T>& r, const std::vector<T>&) {
      if (r.contacts.count > 0) *contact = true;
    };
  }
  T ret(0.0);
  for (int t = 0; t < steps; ++t) {
    const auto s = env.step_lane<T>(lane, x.subspan(2 * n + t * na, na), 0, 0, observer);
    ret = ret + s.reward;
  }
  return ret;
}

}  // namespace

std::vector<GradCheckTrial> grad_check(const EnvConfig& base, const GradCheckOptions& opt) {
  if (opt.steps < 1 || opt.steps > 32) throw ConfigError("grad-check steps must be in [1, 32]");
  if (opt.trials < 0) throw ConfigError("grad-check trials must be >= 0");
  EnvConfig ec = base;
  ec.system = opt.system;
  ec.contact.kind = opt.contact;
  // Every solve runs exactly gs_iters sweeps (a zero change still stops it,
  // but then further sweeps are no-ops), so the probed function does not
  // switch sweep counts between finite-difference evaluations.
  ec.contact.gs_tol = 1e-300;
  ec.accept_unconverged = true;
  ec.termination.min_base_height = -std::numeric_limits<double>::infinity();
  ec.termination.max_pitch = std::numeric_limits<double>::infinity();
  ec.episode_length = opt.steps + 1;
  ec.randomization.level = 1.0;
  const LocomotionEnv env(ec);
  const SystemModel& model = env.model();
  const int n = model.dof();
  const int na = env.action_dim();
  const int iz = model.base_index(BaseCoordinate::kZ);

  std::vector<GradCheckTrial> out;
  for (int trial = 0; trial < opt.trials; ++trial) {
    std::mt19937_64 rng(stream_seed(opt.seed, static_cast<std::uint64_t>(trial), 1));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    LaneState<double> start;
    env.reset_lane(start, opt.seed, trial);
    if (opt.airborne) {
      // Lifted by 1-2 m; the bouncer's own actuator can still bring it down
      // within a long window.
      const int h = iz >= 0 ? iz : 0;
      start.state.q[h] += 1.0 + unit(rng);
      start.state.u[h] = unit(rng);
    } else if (opt.system == "bouncer1d") {
      start.state.q[0] = 0.005 + 0.025 * unit(rng);
      start.state.u[0] = -1.0 - 1.0 * unit(rng);
    } else if (opt.system == "pendulum") {
      start.state.q[0] = 2.0 * unit(rng) - 1.0;
      start.state.u[0] = 2.0 * unit(rng) - 1.0;
    } else if (iz >= 0) {
      start.state.q[iz] += 0.03 * unit(rng);  // drop onto the ground
    }
    std::vector<double> x;
    for (int i = 0; i < n; ++i) x.push_back(start.state.q[i]);
    for (int i = 0; i < n; ++i) x.push_back(start.state.u[i]);
    for (int i = 0; i < opt.steps * na; ++i) x.push_back(unit(rng) - 0.5);

    GradCheckTrial r;
    r.trial = trial;
    r.inputs = static_cast<int>(x.size());
    std::vector<double> grad;
    {
      ad::Tape tape;
      ad::TapeScope scope(tape);
      std::vector<ad::Var> xv;
      for (double v : x) xv.push_back(tape.input(v));
      const ad::Var ret = window_return<ad::Var>(env, start, xv, opt.steps, &r.had_contact);
      r.objective = ret.value();
      grad = tape.gradient(ret, xv);
    }
    const auto fd = ad::finite_difference(
        [&](std::span<const double> p) {
          return window_return<double>(env, start, p, opt.steps, nullptr);
        },
        x, r.had_contact ? opt.eps : opt.free_eps);
    for (std::size_t i = 0; i < x.size(); ++i) {
      r.max_rel_error = std::max(r.max_rel_error, ad::relative_error(grad[i], fd[i]));
    }
    r.threshold = r.had_contact ? opt.contact_tol : opt.free_tol;
    r.pass = r.max_rel_error < r.threshold;
    r.expected_fail = opt.contact == ContactKind::kHard && r.had_contact;
    out.push_back(r);
  }
  return out;
}

int cmd_grad_check(const EnvConfig& base, const GradCheckOptions& opt, const fs::path& out_csv,
                   std::ostream& log) {
  const std::vector<GradCheckTrial> trials = grad_check(base, opt);
  if (out_csv.has_parent_path()) fs::create_directories(out_csv.parent_path());
  CsvWriter csv(out_csv);
  csv.comment("dsim grad-check v1");
  csv.comment("system " + opt.system + " contact " + to_string(opt.contact) + " steps " +
              std::to_string(opt.steps) + " seed " + std::to_string(opt.seed) + " eps " +
              num(opt.eps) + " free_eps " + num(opt.free_eps) +
              (opt.airborne ? " airborne" : ""));
  csv.row({"trial", "inputs", "contact", "objective", "max_rel_error", "threshold", "status"});
  int failed = 0, xfail = 0, passed = 0;
  for (const GradCheckTrial& t : trials) {
    std::string status = t.pass ? "pass" : "fail";
    if (t.expected_fail) status = "expected-fail";
    if (status == "fail") ++failed;
    if (status == "expected-fail") ++xfail;
    if (status == "pass") ++passed;
    csv.row({std::to_string(t.trial), std::to_string(t.inputs), t.had_contact ? "1" : "0",
             num(t.objective), num(t.max_rel_error), num(t.threshold), status});
  }
  log << opt.system << " " << to_string(opt.contact) << ": " << passed << " pass, " << failed
      << " fail, " << xfail << " expected-fail of " << trials.size() << '\n';
  return failed == 0 ? kExitOk : kExitCheckFailed;
}

// ---- contact-sweep --------------------------------------------------------

std::vector<ContactSweepRow> contact_sweep(const ContactModelConfig& cfg,
                                           const ContactSweepOptions& opt) {
  if (!(opt.d_min < 0.0 && opt.d_max > 0.0)) {
    throw ConfigError("contact-sweep range must straddle d = 0");
  }
  if (opt.points < 2) throw ConfigError("contact-sweep needs at least 2 points");
  const CanonicalScenario scenario{opt.mass, 9.81, opt.dt};
  const double sigma =
      opt.sigma > 0.0 ? opt.sigma : cfg.sharpness * 3.14159265358979323846 / std::sqrt(3.0);
  ContactModelConfig hard = cfg, soft = cfg, smooth = cfg;
  hard.kind = ContactKind::kHard;
  soft.kind = ContactKind::kSoft;
  smooth.kind = ContactKind::kSmooth;
  std::vector<ContactSweepRow> rows;
  for (int i = 0; i < opt.points; ++i) {
    const double d = opt.d_min + (opt.d_max - opt.d_min) * i / (opt.points - 1);
    const double nan = std::nan("");
    const ForcePoint none{nan, nan};
    const ForcePoint h = opt.hard ? force_curve(d, hard, scenario) : none;
    const ForcePoint so = opt.soft ? force_curve(d, soft, scenario) : none;
    const ForcePoint sm = opt.smooth ? force_curve(d, smooth, scenario) : none;
    const StochasticForcePoint st =
        opt.stochastic ? stochastic_force_curve(d, sigma, opt.samples, opt.seed, cfg, scenario)
                       : StochasticForcePoint{nan, nan, nan};
    rows.push_back({d, h.force, h.gradient, so.force, so.gradient, sm.force, sm.gradient,
                    st.mean_force, st.mean_fog, st.zog_gradient});
  }
  return rows;
}

int cmd_contact_sweep(const ContactModelConfig& cfg, const ContactSweepOptions& opt,
                      const fs::path& out_csv, std::ostream& log) {
  const auto rows = contact_sweep(cfg, opt);
  const double sigma =
      opt.sigma > 0.0 ? opt.sigma : cfg.sharpness * 3.14159265358979323846 / std::sqrt(3.0);
  if (out_csv.has_parent_path()) fs::create_directories(out_csv.parent_path());
  CsvWriter csv(out_csv);
  csv.comment("dsim contact-sweep v1");
  csv.comment("scenario: point mass " + num(opt.mass) + " kg at rest on a vertical rail, g 9.81, "
              "one step of dt " + num(opt.dt) + " s, F = normal impulse / dt, support force " +
              num(opt.mass * 9.81) + " N");
  csv.comment("sharpness " + num(cfg.sharpness) + " stiffness " + num(cfg.stiffness) +
              " damping " + num(cfg.damping) + " sigma " + num(sigma) + " samples " +
              std::to_string(opt.samples) + " seed " + std::to_string(opt.seed));
  csv.row({"d", "F_hard", "grad_hard", "F_soft", "grad_soft", "F_smooth", "grad_smooth",
           "F_stoch_mean", "grad_stoch_fog_mean", "grad_stoch_zog"});
  for (const ContactSweepRow& r : rows) {
    csv.row({num(r.d), num(r.f_hard), num(r.grad_hard), num(r.f_soft), num(r.grad_soft),
             num(r.f_smooth), num(r.grad_smooth), num(r.f_stoch_mean),
             num(r.grad_stoch_fog_mean), num(r.grad_stoch_zog)});
  }
  log << "wrote " << rows.size() << " rows to " << out_csv.string() << '\n';
  return kExitOk;
}

// ---- stability ------------------------------------------------------------

std::vector<StabilityResult> stability(const StabilityOptions& opt) {
  if (opt.duration <= 0.0) throw ConfigError("stability duration must be > 0");
  const SystemModel model = make_bouncer1d(opt.mass);
  const double e_floor = opt.mass * model.gravity * 1e-3;
  std::vector<StabilityResult> out;
  for (ContactKind kind : {ContactKind::kSoft, ContactKind::kSmooth}) {
    for (double dt : opt.dts) {
      if (!(dt > 0.0)) throw ConfigError("stability time steps must be > 0");
      StepConfig sc;
      sc.dt = dt;
      sc.contact.kind = kind;
      sc.contact.stiffness = opt.stiffness;
      sc.contact.damping = opt.damping;
      sc.contact.sharpness = opt.sharpness;
      sc.accept_unconverged = true;

      auto energy = [&](const GeneralizedState<double>& s) {
        double e = mechanical_energy(model, s);
        if (kind == ContactKind::kSoft && s.q[0] < 0.0) {
          e += 0.5 * opt.stiffness * s.q[0] * s.q[0];
        }
        return e;
      };
      StabilityResult r;
      r.model = to_string(kind);
      r.dt = dt;
      r.steps = static_cast<int>(std::llround(opt.duration / dt));
      GeneralizedState<double> s{DofVector<double>(1), DofVector<double>(1)};
      r.energy_initial = energy(s);
      const double e_ref = std::max(std::abs(r.energy_initial), e_floor);
      const std::vector<double> torque{0.0};
      double ke_first = 0.0, ke_second = 0.0;
      int n_first = 0, n_second = 0;
      for (int k = 0; k < r.steps; ++k) {
        try {
          s = moreau_step<double>(model, s, torque, sc).state;
        } catch (const StepFault&) {
          r.diverged = true;
          break;
        }
        r.max_abs_state = std::max({r.max_abs_state, std::abs(s.q[0]), std::abs(s.u[0])});
        r.max_penetration = std::max(r.max_penetration, -s.q[0]);
        r.energy_max_growth = std::max(r.energy_max_growth, energy(s) - r.energy_initial);
        const double ke = 0.5 * opt.mass * s.u[0] * s.u[0];
        if (2 * k < r.steps) {
          ke_first += ke;
          ++n_first;
        } else {
          ke_second += ke;
          ++n_second;
        }
        if (r.max_abs_state > 1e3 || r.energy_max_growth > 10.0 * e_ref) {
          r.diverged = true;
          break;
        }
      }
      r.kinetic_first_half = n_first > 0 ? ke_first / n_first : 0.0;
      r.kinetic_second_half = n_second > 0 ? ke_second / n_second : std::nan("");
      out.push_back(r);
    }
  }
  return out;
}

int cmd_stability(const StabilityOptions& opt, const fs::path& out_csv, std::ostream& log) {
  const auto results = stability(opt);
  if (out_csv.has_parent_path()) fs::create_directories(out_csv.parent_path());
  CsvWriter csv(out_csv);
  csv.comment("dsim stability v1");
  csv.comment("resting mass " + num(opt.mass) + " kg on a vertical rail, stiffness " +
              num(opt.stiffness) + " damping " + num(opt.damping) + " sharpness " +
              num(opt.sharpness) + " duration " + num(opt.duration) + " s");
  csv.comment("diverged: energy growth > 10 max(|E0|, m g 1mm) or |q|, |u| > 1e3");
  csv.row({"model", "dt", "steps", "max_penetration", "energy_initial", "energy_max_growth",
           "kinetic_first_half", "kinetic_second_half", "max_abs_state", "diverged"});
  for (const StabilityResult& r : results) {
    csv.row({r.model, num(r.dt), std::to_string(r.steps), num(r.max_penetration),
             num(r.energy_initial), num(r.energy_max_growth), num(r.kinetic_first_half),
             num(r.kinetic_second_half), num(r.max_abs_state), r.diverged ? "1" : "0"});
    log << r.model << " dt " << r.dt << ": max penetration " << r.max_penetration
        << " m, energy growth " << r.energy_max_growth << " J, "
        << (r.diverged ? "DIVERGED" : "bounded") << '\n';
  }
  return kExitOk;
}

}  // namespace dsim

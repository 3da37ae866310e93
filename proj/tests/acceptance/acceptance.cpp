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
// Acceptance checks. Each selected criterion prints one line:
//
//   CRITERION <n> PASS|FAIL <summary>
//
// followed by indented detail lines. A criterion is made of named
// sub-checks. The exit status is 0 when every failing sub-check is listed
// with --known-gap, so a documented gap keeps its FAIL line without breaking
// the test run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dsim/learn/evaluate.hpp"
#include "dsim/xcli/commands.hpp"

namespace fs = std::filesystem;
using namespace dsim;

namespace {

struct Check {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct Outcome {
  std::string summary;
  std::vector<Check> checks;
  std::vector<std::string> notes;

  void add(const std::string& name, bool ok, const std::string& detail) {
    checks.push_back({name, ok, detail});
  }
  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.ok; });
  }
};

struct Context {
  fs::path configs;
  fs::path work;
  int threads = 1;
};

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void runtime_check(Outcome& out, double elapsed, double limit) {
  out.add("runtime", elapsed < limit, fmt(elapsed, 4) + " s (limit " + fmt(limit) + " s)");
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Columns of a metrics.csv, keyed by header name; empty fields are NaN.
std::map<std::string, std::vector<double>> read_metrics(const fs::path& p) {
  std::ifstream f(p);
  std::vector<std::string> header;
  std::map<std::string, std::vector<double>> cols;
  for (std::string line; std::getline(f, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string x; std::getline(ss, x, ',');) fields.push_back(x);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (header.empty()) {
      header = fields;
      continue;
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
      const std::string& x = i < fields.size() ? fields[i] : std::string();
      cols[header[i]].push_back(x.empty() ? std::nan("") : std::stod(x));
    }
  }
  return cols;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------

Outcome gradient_exactness(const Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  int total_pass = 0, total = 0;
  for (const std::string system : {"bouncer1d", "hopper2d", "quadruped2d"}) {
    GradCheckOptions opt;
    opt.system = system;
    opt.contact = ContactKind::kSmooth;
    opt.steps = 16;
    opt.trials = 100;
    opt.seed = 1;
    const auto trials = grad_check(default_env_config(system), opt);
    int passed = 0, with_contact = 0;
    double worst_contact = 0.0, worst_free = 0.0;
    for (const GradCheckTrial& t : trials) {
      passed += t.pass ? 1 : 0;
      with_contact += t.had_contact ? 1 : 0;
      (t.had_contact ? worst_contact : worst_free) =
          std::max(t.had_contact ? worst_contact : worst_free, t.max_rel_error);
    }
    total_pass += passed;
    total += static_cast<int>(trials.size());
    out.add(system, passed == 100,
            std::to_string(passed) + "/100 pass, " + std::to_string(with_contact) +
                " with contact, worst " + fmt(worst_contact, 3) + " (contact) " +
                fmt(worst_free, 3) + " (contact-free)");
  }
  // Windows that start in the air and stay there. Reported only: in flight
  // the legs reach the kinks of the torque-speed envelope, which central
  // differences straddle.
  for (const std::string system : {"bouncer1d", "hopper2d", "quadruped2d"}) {
    GradCheckOptions opt;
    opt.system = system;
    opt.steps = 16;
    opt.trials = 20;
    opt.airborne = true;
    int passed = 0, free = 0;
    double worst = 0.0;
    for (const GradCheckTrial& t : grad_check(default_env_config(system), opt)) {
      passed += t.pass && !t.had_contact ? 1 : 0;
      free += t.had_contact ? 0 : 1;
      worst = std::max(worst, t.max_rel_error);
    }
    out.notes.push_back(system + " airborne windows: " + std::to_string(passed) + "/" +
                        std::to_string(opt.trials) + " within 1e-7, " + std::to_string(free) +
                        " contact-free, worst " + fmt(worst, 3));
  }
  runtime_check(out, seconds_since(t0), 300.0);
  out.summary = std::to_string(total_pass) + "/" + std::to_string(total) +
                " grad-check trials within 1e-4 (contact) / 1e-7 (contact-free)";
  return out;
}

Outcome force_curves(const Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  ContactModelConfig cfg;
  cfg.sharpness = 5e-3;
  ContactSweepOptions opt;  // [-0.02, 0.02], 161 points, 1e5 samples, matched variance
  std::ostringstream log;
  cmd_contact_sweep(cfg, opt, ctx.work / "contact_sweep.csv", log);
  // The checks read the CSV back, so they cover what the command wrote.
  const auto cols = read_metrics(ctx.work / "contact_sweep.csv");
  std::vector<ContactSweepRow> rows(cols.at("d").size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i] = {cols.at("d")[i],           cols.at("F_hard")[i],
               cols.at("grad_hard")[i],   cols.at("F_soft")[i],
               cols.at("grad_soft")[i],   cols.at("F_smooth")[i],
               cols.at("grad_smooth")[i], cols.at("F_stoch_mean")[i],
               cols.at("grad_stoch_fog_mean")[i], cols.at("grad_stoch_zog")[i]};
  }
  const double s = cfg.sharpness;
  const double support = opt.mass * 9.81;

  bool hard_ok = true;
  for (const auto& r : rows) {
    if (r.d > 0.0 && (r.f_hard != 0.0 || r.grad_hard != 0.0)) hard_ok = false;
  }
  out.add("hard_zero_off_contact", hard_ok, "F_hard = grad_hard = 0 for every d > 0");

  double soft_worst = 0.0;
  const ContactSweepRow* prev = nullptr;
  for (const auto& r : rows) {
    if (!(r.d < 0.0)) continue;
    // Gradients are with respect to d, i.e. minus the penetration depth.
    soft_worst = std::max(soft_worst, std::abs(-r.grad_soft - cfg.stiffness) / cfg.stiffness);
    if (prev != nullptr) {
      const double slope = (r.f_soft - prev->f_soft) / (prev->d - r.d);
      soft_worst = std::max(soft_worst, std::abs(slope - cfg.stiffness) / cfg.stiffness);
    }
    prev = &r;
  }
  out.add("soft_affine", soft_worst < 1e-6,
          "max relative slope deviation from k_n " + fmt(soft_worst, 3) + " (limit 1e-6)");

  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].f_smooth < rows[i - 1].f_smooth)) monotone = false;
  }
  out.add("smooth_monotone", monotone, "F_smooth strictly decreasing in d");

  const auto at_zero = std::min_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::abs(a.d) < std::abs(b.d);
  });
  const double mid_err = std::abs(at_zero->f_smooth - 0.5 * support);
  out.add("smooth_half_support", mid_err <= 1e-9,
          "|F_smooth(" + fmt(at_zero->d, 3) + ") - F_support/2| = " + fmt(mid_err, 3));

  bool informative = true;
  for (const auto& r : rows) {
    if (std::abs(r.d) < 3.0 * s && r.grad_smooth == 0.0) informative = false;
  }
  out.add("smooth_gradient_nonzero", informative, "grad_smooth != 0 on |d| < 3s");

  double shape = 0.0, fog = 0.0;
  for (const auto& r : rows) {
    shape = std::max(shape, std::abs(r.f_stoch_mean - r.f_smooth) / support);
    fog = std::max(fog, std::abs(r.grad_stoch_fog_mean));
  }
  out.add("stochastic_shape", shape < 0.02,
          "max |F_stoch - F_smooth| / F_support = " + fmt(shape, 4) + " (limit 0.02)");
  out.add("stochastic_fog_zero", fog < 1e-6 * support / s,
          "max |mean per-sample FoG| = " + fmt(fog, 3) + " (limit " +
              fmt(1e-6 * support / s, 3) + ")");
  runtime_check(out, seconds_since(t0), 120.0);
  out.summary = "force-curve properties over " + std::to_string(rows.size()) + " gaps, s = " +
                fmt(s) + " m";
  return out;
}

Outcome hard_limit(const Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  auto apexes = [](ContactKind kind, double sharpness) {
    RunConfig cfg = resolve_config(nullptr, {"env.system=bouncer1d", "env.dt=0.001",
                                             "env.decimation=1", "contact.restitution=0.5"});
    cfg.env.contact.kind = kind;
    cfg.env.contact.sharpness = sharpness;
    SimulateOptions opt;
    opt.steps = 3000;
    opt.passive = true;
    opt.q0 = {1.0};
    std::vector<double> a = apex_heights(simulate(cfg, opt), 0);
    a.erase(a.begin());  // the release height
    a.resize(3, 0.0);    // a bounce that never happens has apex 0
    return a;
  };
  const std::vector<double> hard = apexes(ContactKind::kHard, 5e-3);
  out.notes.push_back("hard apexes " + fmt(hard[0]) + " " + fmt(hard[1]) + " " + fmt(hard[2]));

  std::vector<double> errors;
  for (const double s : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const std::vector<double> a = apexes(ContactKind::kSmooth, s);
    double mean_err = 0.0, worst = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double e = std::abs(a[i] - hard[i]) / hard[i];
      mean_err += e / 3.0;
      worst = std::max(worst, e);
    }
    errors.push_back(mean_err);
    out.notes.push_back("s " + fmt(s) + ": apexes " + fmt(a[0]) + " " + fmt(a[1]) + " " +
                        fmt(a[2]) + ", mean relative error " + fmt(mean_err, 4));
    if (s == 1e-5) {
      out.add("sharp_matches_hard", worst < 0.01,
              "worst apex error at s = 1e-5: " + fmt(worst, 3) + " (limit 0.01)");
    }
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < errors.size(); ++i) decreasing &= errors[i] < errors[i - 1];
  out.add("monotone_in_s", decreasing, "mean apex error strictly decreases as s shrinks");
  runtime_check(out, seconds_since(t0), 60.0);
  out.summary = "bouncer1d drop from 1 m, restitution 0.5, dt 1e-3";
  return out;
}

Outcome large_step_stability(const Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  StabilityOptions opt;
  opt.dts = {5e-3};
  opt.mass = 10.0;
  opt.stiffness = 1e7;
  opt.duration = 2.0;
  std::ostringstream log;
  cmd_stability(opt, ctx.work / "stability.csv", log);
  for (const StabilityResult& r : stability(opt)) {
    const std::string d = "max penetration " + fmt(r.max_penetration, 3) +
                          " m, max energy growth " + fmt(r.energy_max_growth, 3) + " J";
    if (r.model == "soft") out.add("soft_diverges", r.diverged, d);
    if (r.model == "smooth") {
      out.add("smooth_bounded", !r.diverged && r.max_penetration < 1e-3, d);
      out.add("smooth_no_energy_growth", r.energy_max_growth <= 1e-9, d);
    }
  }
  runtime_check(out, seconds_since(t0), 60.0);
  out.summary = "m 10 kg, k_n 1e7 N/m, dt 5e-3 s, 2 s simulated";
  return out;
}

// First env-step count at which an evaluation reached `target`, or +inf.
double steps_to_return(const fs::path& metrics, double target) {
  const auto cols = read_metrics(metrics);
  const auto& steps = cols.at("env_steps");
  const auto& ret = cols.at("eval_return");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (ret[i] >= target) return steps[i];
  }
  return std::numeric_limits<double>::infinity();
}

Outcome sample_efficiency(const Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  const nlohmann::json ref =
      nlohmann::json::parse(slurp(ctx.configs / "hopper2d_reference.json"));
  const double r_star = ref.at("r_star").get<double>();
  const auto shac_cap = ref.at("shac_step_cap").get<std::int64_t>();
  out.notes.push_back("R* " + fmt(r_star) + " = 0.8 x asymptote " +
                      fmt(ref.at("asymptote").get<double>()));

  std::vector<double> shac_steps, ppo_steps;
  for (int seed = 1; seed <= 3; ++seed) {
    RunConfig cfg = load_config((ctx.configs / "hopper2d_shac.json").string(),
                                {"seed=" + std::to_string(seed)});
    cfg.train.stop_return = r_star;
    cfg.train.max_env_steps = shac_cap;
    cfg.train.checkpoint_interval = 0;
    const fs::path dir = ctx.work / ("shac_seed" + std::to_string(seed));
    std::ostringstream log;
    cmd_train(cfg, dir, ctx.threads, log);
    shac_steps.push_back(steps_to_return(dir / "metrics.csv", r_star));
    out.notes.push_back("shac seed " + std::to_string(seed) + ": " + fmt(shac_steps.back()) +
                        " env steps");
  }
  const double shac_median = median(shac_steps);
  out.add("shac_reaches_threshold", std::isfinite(shac_median),
          "SHAC median " + fmt(shac_median) + " env steps");

  // PPO only has to be followed up to 5x the SHAC median.
  const std::int64_t ppo_cap =
      std::isfinite(shac_median) ? static_cast<std::int64_t>(5.0 * shac_median) : 0;
  for (int seed = 1; seed <= 3 && ppo_cap > 0; ++seed) {
    RunConfig cfg = load_config((ctx.configs / "hopper2d_ppo.json").string(),
                                {"seed=" + std::to_string(seed)});
    cfg.train.stop_return = r_star;
    cfg.train.max_env_steps = ppo_cap;
    cfg.train.checkpoint_interval = 0;
    const fs::path dir = ctx.work / ("ppo_seed" + std::to_string(seed));
    std::ostringstream log;
    cmd_train(cfg, dir, ctx.threads, log);
    const double s = steps_to_return(dir / "metrics.csv", r_star);
    ppo_steps.push_back(s);
    const auto cols = read_metrics(dir / "metrics.csv");
    double best = -std::numeric_limits<double>::infinity();
    for (double r : cols.at("eval_return")) {
      if (!std::isnan(r)) best = std::max(best, r);
    }
    out.notes.push_back("ppo seed " + std::to_string(seed) + ": " +
                        (std::isfinite(s) ? fmt(s) + " env steps"
                                          : "not reached in " + std::to_string(ppo_cap) +
                                                " env steps") +
                        ", best eval return " + fmt(best));
  }
  const double ppo_median =
      ppo_steps.empty() ? std::nan("") : median(ppo_steps);
  out.add("ppo_needs_5x", ppo_median >= 5.0 * shac_median,
          "PPO median " + (std::isfinite(ppo_median) ? fmt(ppo_median)
                                                      : std::string("> cap " +
                                                                    std::to_string(ppo_cap))) +
              " vs 5 x SHAC median " + fmt(5.0 * shac_median));
  runtime_check(out, seconds_since(t0), 45.0 * 60.0);
  out.summary = "hopper2d steps to R*: SHAC median " + fmt(shac_median) + ", PPO median " +
                (std::isfinite(ppo_median) ? fmt(ppo_median) : "> " + std::to_string(ppo_cap));
  return out;
}

Outcome locomotion(const Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  RunConfig cfg = load_config((ctx.configs / "quadruped2d_shac.json").string(), {});
  const fs::path dir = ctx.work / "quadruped2d_shac";
  std::ostringstream log;
  const int code = cmd_train(cfg, dir, ctx.threads, log);
  out.add("training_completes", code == kExitOk, "train exit code " + std::to_string(code));
  const double timeout = cfg.env.episode_length;

  EvalOptions opt;
  opt.checkpoint = (dir / "checkpoints" / "final.ckpt").string();
  opt.episodes = 20;
  cmd_eval(cfg, opt, dir / "eval_smooth", ctx.threads, log);
  const auto smooth = read_metrics(dir / "eval_smooth" / "metrics.csv");
  const double len = smooth.at("mean_episode_length")[0];
  const double v = smooth.at("mean_forward_velocity")[0];
  const double cmd = smooth.at("mean_command")[0];
  const double falls = smooth.at("falls")[0];
  out.add("smooth_no_falls", len == timeout && falls == 0.0,
          "mean episode length " + fmt(len) + " of " + fmt(timeout) + ", falls " + fmt(falls));
  const double verr = std::abs(v - cmd) / cmd;
  out.add("smooth_velocity", verr < 0.15,
          "mean forward velocity " + fmt(v, 4) + " vs command " + fmt(cmd, 4) + " (" +
              fmt(100.0 * verr, 3) + "%, limit 15%; per-episode mean error " +
              fmt(100.0 * smooth.at("velocity_error")[0], 3) + "%)");

  RunConfig hard = cfg;
  hard.env.contact.kind = ContactKind::kHard;
  cmd_eval(hard, opt, dir / "eval_hard", ctx.threads, log);
  const auto h = read_metrics(dir / "eval_hard" / "metrics.csv");
  const double hlen = h.at("mean_episode_length")[0];
  out.add("hard_transfer", hlen >= 0.9 * timeout,
          "hard contact mean episode length " + fmt(hlen) + " of " + fmt(timeout) +
              ", falls " + fmt(h.at("falls")[0]) + ", velocity " +
              fmt(h.at("mean_forward_velocity")[0], 4));
  runtime_check(out, seconds_since(t0), 60.0 * 60.0);
  out.summary = "quadruped2d SHAC, 20 evaluation episodes under smooth and hard contact";
  return out;
}

Outcome determinism(const Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  const std::vector<std::string> short_run = {"train.max_env_steps=4000",
                                              "train.eval_interval=1000",
                                              "train.eval_episodes=3",
                                              "env.episode_length=100"};
  struct Case {
    std::string name, file;
  };
  for (const Case& c : {Case{"shac_hopper2d", "hopper2d_shac.json"},
                        Case{"ppo_hopper2d", "hopper2d_ppo.json"},
                        Case{"shac_quadruped2d", "quadruped2d_shac.json"}}) {
    const RunConfig cfg = load_config((ctx.configs / c.file).string(), short_run);
    std::string first_train, first_eval;
    bool same = true;
    for (const int threads : {1, 8}) {
      const fs::path dir = ctx.work / (c.name + "_t" + std::to_string(threads));
      std::ostringstream log;
      cmd_train(cfg, dir, threads, log);
      EvalOptions opt;
      opt.checkpoint = (dir / "checkpoints" / "final.ckpt").string();
      opt.episodes = 8;
      cmd_eval(cfg, opt, dir / "eval", threads, log);
      const std::string train = slurp(dir / "metrics.csv");
      const std::string eval = slurp(dir / "eval" / "metrics.csv");
      if (threads == 1) {
        first_train = train;
        first_eval = eval;
      } else {
        same = train == first_train && eval == first_eval && !train.empty();
      }
    }
    out.add(c.name, same, "train and eval metrics.csv identical at 1 and 8 threads");
  }
  // A rerun at the same thread count must not depend on leftovers either.
  const RunConfig cfg = load_config((ctx.configs / "hopper2d_shac.json").string(), short_run);
  std::ostringstream log;
  cmd_train(cfg, ctx.work / "rerun", 8, log);
  out.add("rerun", slurp(ctx.work / "rerun" / "metrics.csv") ==
                       slurp(ctx.work / "shac_hopper2d_t8" / "metrics.csv"),
          "repeated 8-thread SHAC run identical");
  out.notes.push_back("elapsed " + fmt(seconds_since(t0), 4) + " s");
  out.summary = "byte-identical metrics.csv across reruns and thread counts";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dsim acceptance checks"};
  std::vector<int> selected;
  std::vector<std::string> known_gaps;
  Context ctx;
  std::string configs = "configs", work = "acceptance_work";
  app.add_option("-n,--criterion", selected, "criteria to run (default: all)")
      ->check(CLI::Range(1, 7));
  app.add_option("--configs", configs, "directory with the shipped configs");
  app.add_option("--work", work, "scratch directory for runs");
  app.add_option("--threads", ctx.threads, "worker threads for training")
      ->check(CLI::Range(1, 256));
  app.add_option("--known-gap", known_gaps,
                 "sub-check <criterion>.<name> whose failure does not fail the exit status");
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7};
  ctx.configs = configs;
  const std::set<std::string> gaps(known_gaps.begin(), known_gaps.end());

  using Fn = Outcome (*)(const Context&);
  const std::map<int, Fn> criteria = {{1, gradient_exactness}, {2, force_curves},
                                      {3, hard_limit},         {4, large_step_stability},
                                      {5, sample_efficiency},  {6, locomotion},
                                      {7, determinism}};
  int status = 0;
  for (const int n : selected) {
    ctx.work = fs::path(work) / ("criterion" + std::to_string(n));
    fs::remove_all(ctx.work);
    fs::create_directories(ctx.work);
    Outcome o;
    try {
      o = criteria.at(n)(ctx);
    } catch (const std::exception& e) {
      o.summary = "error";
      o.add("ran", false, e.what());
    }
    std::cout << "CRITERION " << n << ' ' << (o.pass() ? "PASS" : "FAIL") << ' ' << o.summary
              << '\n';
    for (const Check& c : o.checks) {
      const std::string key = std::to_string(n) + "." + c.name;
      const bool gap = !c.ok && gaps.count(key) > 0;
      std::cout << "    " << (c.ok ? "ok   " : gap ? "gap  " : "FAIL ") << c.name << ": "
                << c.detail << '\n';
      if (!c.ok && !gap) status = 1;
    }
    for (const std::string& note : o.notes) std::cout << "    note " << note << '\n';
    std::cout.flush();
  }
  return status;
}

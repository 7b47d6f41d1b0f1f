#pragma once
// Closed-loop evaluation: success@episodes over a list of seeds, optional
// grounding-noise injection, basic/generalization splits, and report
// aggregation with sample statistics.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "abil/gridworld.hpp"
#include "abil/kb.hpp"
#include "abil/perception.hpp"
#include "abil/policy.hpp"
#include "abil/rng.hpp"
#include "abil/symbolic.hpp"

namespace abil {

// Flip each atom's truth independently with probability p.
inline std::map<GroundAtom, bool> inject_grounding_noise(std::map<GroundAtom, bool> truth,
                                                         double p, Rng& rng) {
  if (p <= 0.0) return truth;
  for (auto& [atom, value] : truth)
    if (rng.bernoulli(p)) value = !value;
  return truth;
}

enum class AgentKind { Abil, Bc };

inline const char* agent_name(AgentKind a) { return a == AgentKind::Abil ? "abil" : "bc"; }

struct EpisodeOpts {
  double noise_p = 0.0;
  FallbackMode fallback = FallbackMode::FirstOperator;
};

struct EpisodeOutcome {
  bool success = false;
  int steps = 0;
  int fallback_steps = 0;
  std::vector<Action> actions;
};

// Perceive → select operator → act → step, until the goal holds or the
// horizon runs out (timeout counts as failure).
inline EpisodeOutcome run_episode(const TaskInstance& instance, const StateMachine& machine,
                                  const PerceptionModel& percep, const PolicyEnsemble& ensemble,
                                  const EpisodeOpts& opts, Rng& noise_rng) {
  StateMachine bound = bind_roles(machine, instance.binding);
  PlanSkeleton skel = plan_skeleton(bound);
  SymbolicState tracked = tracked_atoms(bound);

  EpisodeOutcome out;
  EnvState s = instance.state;
  GroundAtom last_op = skel.steps.front().op;
  while (!goal_satisfied(s) && s.step_count < s.horizon) {
    Grounding g = percep.ground_state(s, tracked);
    std::map<GroundAtom, bool> truth =
        inject_grounding_noise(std::move(g.truth), opts.noise_p, noise_rng);
    Selection sel = select_operator(truth, bound, skel);
    GroundAtom op = sel.op;
    if (sel.fallback) {
      ++out.fallback_steps;
      if (opts.fallback == FallbackMode::RepeatLast) op = last_op;
    }
    last_op = op;
    // evaluate() throws before a null model can reach these references, but
    // GCC's call-site specialization for bc-only callers flags the call.
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wnonnull"
    Action a = ensemble.act(s, op);
#pragma GCC diagnostic pop
    s = step(s, a);
    out.actions.push_back(a);
  }
  out.success = goal_satisfied(s);
  out.steps = s.step_count;
  return out;
}

inline EpisodeOutcome run_episode_bc(const TaskInstance& instance, const BcBaseline& bc) {
  EpisodeOutcome out;
  EnvState s = instance.state;
  while (!goal_satisfied(s) && s.step_count < s.horizon) {
    Action a = bc.act(s);
    s = step(s, a);
    out.actions.push_back(a);
  }
  out.success = goal_satisfied(s);
  out.steps = s.step_count;
  return out;
}

struct EvalConfig {
  Task task = Task::Pickup;
  Split split = Split::Basic;
  int episodes = 100;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  AgentKind agent = AgentKind::Abil;
  double noise_p = 0.0;
  FallbackMode fallback = FallbackMode::FirstOperator;
};

struct SeedResult {
  std::uint64_t seed = 0;
  double success = 0.0;
  double wallclock_ms_per_eval = 0.0;
  int fallback_steps = 0;
};

struct Report {
  std::string task;
  std::string mode;    // basic | generalization
  std::string agent;   // abil | bc
  int episodes = 0;
  std::vector<SeedResult> per_seed;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation over seeds
};

inline const char* split_name(Split s) { return s == Split::Basic ? "basic" : "generalization"; }

// Success@episodes for each seed; episode instances are drawn from a seed
// stream disjoint from training seeds (which count up from small integers).
inline Report evaluate(const EvalConfig& cfg, const StateMachine& machine,
                       const PerceptionModel* percep, const PolicyEnsemble* ensemble,
                       const BcBaseline* bc) {
  Report report;
  report.task = task_name(cfg.task);
  report.mode = split_name(cfg.split);
  report.agent = agent_name(cfg.agent);
  report.episodes = cfg.episodes;

  TaskConfig task_cfg = task_config(cfg.task, cfg.split);
  for (std::uint64_t seed : cfg.seeds) {
    SeedResult sr;
    sr.seed = seed;
    int wins = 0;
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < cfg.episodes; ++i) {
      std::uint64_t inst_seed = mix_seed(seed, 0xe7a1 + static_cast<std::uint64_t>(i));
      TaskInstance inst = make_instance(task_cfg, inst_seed);
      EpisodeOutcome out;
      if (cfg.agent == AgentKind::Abil) {
        if (percep == nullptr || ensemble == nullptr)
          throw std::invalid_argument("abil evaluation needs a perception model and an ensemble");
        Rng noise_rng(mix_seed(inst_seed, 0x015e));
        EpisodeOpts opts;
        opts.noise_p = cfg.noise_p;
        opts.fallback = cfg.fallback;
        out = run_episode(inst, machine, *percep, *ensemble, opts, noise_rng);
      } else {
        if (bc == nullptr) throw std::invalid_argument("bc evaluation needs a baseline");
        out = run_episode_bc(inst, *bc);
      }
      wins += out.success ? 1 : 0;
      sr.fallback_steps += out.fallback_steps;
    }
    auto t1 = std::chrono::steady_clock::now();
    sr.success = static_cast<double>(wins) / cfg.episodes;
    sr.wallclock_ms_per_eval =
        std::chrono::duration<double, std::milli>(t1 - t0).count() / cfg.episodes;
    report.per_seed.push_back(sr);
  }

  double mean = 0.0;
  for (const SeedResult& sr : report.per_seed) mean += sr.success;
  mean /= static_cast<double>(report.per_seed.size());
  double var = 0.0;
  for (const SeedResult& sr : report.per_seed) var += (sr.success - mean) * (sr.success - mean);
  report.mean = mean;
  report.stddev = report.per_seed.size() > 1
                      ? std::sqrt(var / static_cast<double>(report.per_seed.size() - 1))
                      : 0.0;
  return report;
}

}  // namespace abil

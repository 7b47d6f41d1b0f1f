#pragma once
// Behavior side: one action policy per symbolic operator, selected at
// runtime by entailment against the plan skeleton (deepest entailed node
// wins), plus the monolithic goal-conditioned baseline.

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "abil/features.hpp"
#include "abil/gridworld.hpp"
#include "abil/kb.hpp"
#include "abil/mlp.hpp"
#include "abil/perception.hpp"
#include "abil/rng.hpp"
#include "abil/symbolic.hpp"

namespace abil {

using OperatorKey = std::pair<std::string, int>;  // operator name, arity

struct UnknownOperatorError : std::runtime_error {
  explicit UnknownOperatorError(const std::string& op)
      : std::runtime_error("ensemble has no policy for operator " + op) {}
};

// What to do when the grounding entails no skeleton node.
enum class FallbackMode { FirstOperator, RepeatLast };

struct Selection {
  int node_index = 0;      // index into skeleton.steps
  GroundAtom op;           // bound operator to execute
  bool fallback = false;   // nothing was entailed
};

// Deepest skeleton node entailed by the truth map; its outgoing operator is
// the one to run. Falls back to the first step when nothing matches (the
// caller may override via FallbackMode::RepeatLast).
inline Selection select_operator(const std::map<GroundAtom, bool>& grounded,
                                 const StateMachine& bound, const PlanSkeleton& skel) {
  for (int k = static_cast<int>(skel.steps.size()) - 1; k >= 0; --k) {
    const PlanSkeleton::Step& st = skel.steps[static_cast<std::size_t>(k)];
    if (entails(grounded, bound.nodes.at(st.node))) return {k, st.op, false};
  }
  return {0, skel.steps.front().op, true};
}

struct PolicyEnsemble {
  std::map<OperatorKey, Mlp> policies;

  Action act(const EnvState& s, const GroundAtom& op) const {
    auto it = policies.find({op.pred, static_cast<int>(op.args.size())});
    if (it == policies.end()) throw UnknownOperatorError(op.pred);
    std::vector<double> x = policy_features(s, op.args);
    return static_cast<Action>(argmax(it->second.logits(x)));
  }

  bool operator==(const PolicyEnsemble&) const = default;
};

struct PolicyTrainConfig {
  int epochs = 500;  // plateau for both the ensemble and the flat baseline
  double lr = 0.05;
  int batch = 64;
  int hidden = 64;
  std::uint64_t seed = 0;
};

struct RoutingTelemetry {
  std::map<OperatorKey, int> bucket_sizes;
  int fallback_steps = 0;
  std::vector<OperatorKey> empty_buckets;  // operators that received no steps
};

namespace policydetail {

struct Example {
  std::vector<double> x;
  int label;
};

inline void fit_ce(Mlp& net, const std::vector<Example>& examples, const PolicyTrainConfig& cfg,
                   std::uint64_t shuffle_salt) {
  MlpGrads grads(net);
  Rng shuffler(mix_seed(cfg.seed, shuffle_salt));
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffler.shuffle(order);
    std::size_t at = 0;
    while (at < order.size()) {
      std::size_t take =
          std::min<std::size_t>(static_cast<std::size_t>(cfg.batch), order.size() - at);
      grads.reset();
      for (std::size_t j = 0; j < take; ++j) {
        const Example& e = examples[order[at + j]];
        ce_backward(net, e.x.data(), e.label, grads);
      }
      sgd_step(net, grads, cfg.lr, 1.0 / static_cast<double>(take));
      at += take;
    }
  }

  std::vector<bool> witnessed(static_cast<std::size_t>(net.n_in), false);
  for (const Example& e : examples)
    for (std::size_t i = 0; i < e.x.size(); ++i)
      if (e.x[i] != 0.0) witnessed[i] = true;
  zero_unwitnessed_inputs(net, witnessed);
}

}  // namespace policydetail

// Route every demonstration step through select_operator on the perception
// grounding, then fit one cross-entropy policy per operator bucket.
// Fallback-routed steps are trained like any others.
inline std::pair<PolicyEnsemble, RoutingTelemetry> train_ensemble(
    const Dataset& data, const PerceptionModel& percep,
    const std::map<std::string, StateMachine>& machines, const PolicyTrainConfig& cfg) {
  if (data.trajectories.empty()) throw std::invalid_argument("empty dataset");

  std::map<OperatorKey, std::vector<policydetail::Example>> buckets;
  RoutingTelemetry telemetry;

  // every operator of every supplied machine gets a policy slot
  std::map<OperatorKey, int> op_dims;
  for (const auto& [task, machine] : machines)
    for (const Edge& e : machine.edges)
      op_dims[{e.op.pred, static_cast<int>(e.op.args.size())}] =
          policy_dim(static_cast<int>(e.op.args.size()));

  for (const Trajectory& traj : data.trajectories) {
    auto mit = machines.find(traj.task);
    if (mit == machines.end()) throw std::invalid_argument("no machine for task " + traj.task);
    StateMachine bound = bind_roles(mit->second, traj.binding);
    PlanSkeleton skel = plan_skeleton(bound);
    SymbolicState tracked = tracked_atoms(bound);

    for (std::size_t t = 0; t < traj.actions.size(); ++t) {
      Grounding g = percep.ground_state(traj.states[t], tracked);
      Selection sel = select_operator(g.truth, bound, skel);
      if (sel.fallback) ++telemetry.fallback_steps;
      OperatorKey key{sel.op.pred, static_cast<int>(sel.op.args.size())};
      buckets[key].push_back({policy_features(traj.states[t], sel.op.args),
                              static_cast<int>(traj.actions[t])});
    }
  }

  PolicyEnsemble ensemble;
  int idx = 0;
  for (const auto& [key, dim] : op_dims) {
    Rng rng(mix_seed(cfg.seed, 0x70 + static_cast<std::uint64_t>(idx)));
    Mlp net = Mlp::init(dim, cfg.hidden, kNumActions, rng);
    auto bit = buckets.find(key);
    if (bit == buckets.end() || bit->second.empty()) {
      telemetry.empty_buckets.push_back(key);
    } else {
      telemetry.bucket_sizes[key] = static_cast<int>(bit->second.size());
      policydetail::fit_ce(net, bit->second, cfg,
                           0x901 + static_cast<std::uint64_t>(idx));
    }
    ensemble.policies.emplace(key, std::move(net));
    ++idx;
  }
  return {std::move(ensemble), std::move(telemetry)};
}

struct BcBaseline {
  Mlp net;

  Action act(const EnvState& s) const { return static_cast<Action>(argmax(net.logits(bc_features(s)))); }

  bool operator==(const BcBaseline&) const = default;
};

// Monolithic goal-conditioned baseline over all (state, action) pairs.
inline BcBaseline train_bc(const Dataset& data, const PolicyTrainConfig& cfg) {
  if (data.trajectories.empty()) throw std::invalid_argument("empty dataset");
  std::vector<policydetail::Example> examples;
  for (const Trajectory& traj : data.trajectories)
    for (std::size_t t = 0; t < traj.actions.size(); ++t)
      examples.push_back({bc_features(traj.states[t]), static_cast<int>(traj.actions[t])});

  Rng rng(mix_seed(cfg.seed, 0xbc));
  BcBaseline bc{Mlp::init(kBcDim, cfg.hidden, kNumActions, rng)};
  policydetail::fit_ce(bc.net, examples, cfg, 0xbc5);
  return bc;
}

}  // namespace abil

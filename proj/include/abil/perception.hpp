#pragma once
// Predicate grounding. One binary scorer per (predicate, arity), trained on
// pseudo-labels abduced from unannotated demonstrations: each round scores
// every tracked atom on every state (round 0 uses uniform 0.5), abduces the
// cheapest machine-consistent labeling per trajectory, and fits the scorers
// to the resulting closed-world labels by mini-batch gradient descent.

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "abil/abduction.hpp"
#include "abil/expert.hpp"
#include "abil/features.hpp"
#include "abil/gridworld.hpp"
#include "abil/kb.hpp"
#include "abil/mlp.hpp"
#include "abil/rng.hpp"
#include "abil/symbolic.hpp"

namespace abil {

using ScorerKey = std::pair<std::string, int>;  // predicate name, arity

struct MissingScorerError : std::runtime_error {
  explicit MissingScorerError(const std::string& pred)
      : std::runtime_error("model has no scorer for predicate " + pred) {}
};

struct Grounding {
  std::map<GroundAtom, bool> truth;
  std::map<GroundAtom, double> scores;
};

struct PerceptionModel {
  double threshold = 0.5;
  std::map<ScorerKey, Mlp> scorers;

  double score(const EnvState& s, const GroundAtom& atom) const {
    auto it = scorers.find({atom.pred, static_cast<int>(atom.args.size())});
    if (it == scorers.end()) throw MissingScorerError(atom.pred);
    std::vector<double> x = perception_features(s, atom.args);
    return sigmoid(it->second.logits(x)[0]);
  }

  Grounding ground_state(const EnvState& s, const SymbolicState& atoms) const {
    Grounding g;
    for (const GroundAtom& a : atoms.atoms) {
      double p = score(s, a);
      g.scores[a] = p;
      g.truth[a] = p >= threshold;
    }
    return g;
  }

  bool operator==(const PerceptionModel&) const = default;
};

struct PerceptionTrainConfig {
  int rounds = 5;       // abduction/update alternations
  int epochs = 16;      // gradient epochs per round
  double lr = 0.05;
  int batch = 64;
  int hidden = 32;
  std::uint64_t seed = 0;
  // Latest-transition ties keep pre-goal nodes pinned to the trajectory tail,
  // where experts first satisfy them; earliest ties let the goal block swallow
  // everything after its first feasible step and round 0 never recovers.
  TieBreak tie_break = TieBreak::Latest;
  double threshold = 0.5;
  // Also fit atoms the abduction leaves unconstrained (those over tracked
  // predicates but other objects), labeled by the model's own thresholded
  // scores. Off by default; kept for comparison.
  bool self_training = false;
};

struct PerceptionTelemetry {
  std::vector<double> round_costs;  // summed abduction cost entering each round
  std::vector<int> infeasible;      // trajectories skipped per round
};

namespace perceptdetail {

struct TrajData {
  StateMachine bound;
  std::vector<GroundAtom> tracked;
  // features[t][atom index]
  std::vector<std::vector<std::vector<double>>> features;
  const Trajectory* traj = nullptr;
  // unconstrained atoms for the self-training variant, with features
  std::vector<GroundAtom> extra_atoms;
  std::vector<std::vector<std::vector<double>>> extra_features;  // [t][extra index]
};

// All groundings of the tracked predicates over the state's objects that are
// not already tracked atoms.
inline std::vector<GroundAtom> unconstrained_atoms(const TrajData& td) {
  std::vector<GroundAtom> out;
  const EnvState& s = td.traj->states.front();
  SymbolicState tracked_set(td.tracked);
  std::map<ScorerKey, bool> preds;
  for (const GroundAtom& a : td.tracked)
    preds[{a.pred, static_cast<int>(a.args.size())}] = true;
  for (const auto& [key, _] : preds) {
    const auto& [pred, arity] = key;
    if (arity == 1) {
      for (const GridObject& o : s.objects) {
        GroundAtom a{pred, {obj(o.id)}};
        if (!tracked_set.contains(a)) out.push_back(a);
      }
    } else {
      for (const GridObject& a_obj : s.objects) {
        for (const GridObject& b_obj : s.objects) {
          if (a_obj.id == b_obj.id) continue;
          GroundAtom a{pred, {obj(a_obj.id), obj(b_obj.id)}};
          if (!tracked_set.contains(a)) out.push_back(a);
        }
      }
    }
  }
  return out;
}

}  // namespace perceptdetail

// Train scorers from demonstrations of possibly mixed tasks; machines maps
// each trajectory's task name to its (unbound) machine.
inline std::pair<PerceptionModel, PerceptionTelemetry> train_perception(
    const Dataset& data, const std::map<std::string, StateMachine>& machines,
    const PerceptionTrainConfig& cfg) {
  if (data.trajectories.empty()) throw std::invalid_argument("empty dataset");

  // Bind machines and cache features once; scoring dominates training time.
  std::vector<perceptdetail::TrajData> prep;
  prep.reserve(data.trajectories.size());
  std::map<ScorerKey, int> scorer_dims;
  for (const Trajectory& traj : data.trajectories) {
    auto mit = machines.find(traj.task);
    if (mit == machines.end())
      throw std::invalid_argument("no machine for task " + traj.task);
    perceptdetail::TrajData td;
    td.bound = bind_roles(mit->second, traj.binding);
    td.tracked = tracked_atoms(td.bound).atoms;
    td.traj = &traj;
    td.features.resize(traj.states.size());
    for (std::size_t t = 0; t < traj.states.size(); ++t) {
      td.features[t].reserve(td.tracked.size());
      for (const GroundAtom& a : td.tracked)
        td.features[t].push_back(perception_features(traj.states[t], a.args));
    }
    for (const GroundAtom& a : td.tracked) {
      ScorerKey key{a.pred, static_cast<int>(a.args.size())};
      scorer_dims[key] = perception_dim(static_cast<int>(a.args.size()));
    }
    if (cfg.self_training) {
      td.extra_atoms = perceptdetail::unconstrained_atoms(td);
      td.extra_features.resize(traj.states.size());
      for (std::size_t t = 0; t < traj.states.size(); ++t)
        for (const GroundAtom& a : td.extra_atoms)
          td.extra_features[t].push_back(perception_features(traj.states[t], a.args));
    }
    prep.push_back(std::move(td));
  }

  PerceptionModel model;
  model.threshold = cfg.threshold;
  {
    int idx = 0;
    for (const auto& [key, dim] : scorer_dims) {
      Rng rng(mix_seed(cfg.seed, 0x5c0 + static_cast<std::uint64_t>(idx++)));
      model.scorers.emplace(key, Mlp::init(dim, cfg.hidden, 1, rng));
    }
  }

  PerceptionTelemetry telemetry;

  struct Example {
    const std::vector<double>* x;
    double y;
  };

  for (int round = 0; round < cfg.rounds; ++round) {
    std::map<ScorerKey, std::vector<Example>> buckets;
    double round_cost = 0.0;
    int infeasible = 0;

    for (perceptdetail::TrajData& td : prep) {
      ScoreTrack track;
      track.atoms = td.tracked;
      track.scores.resize(td.traj->states.size());
      for (std::size_t t = 0; t < td.traj->states.size(); ++t) {
        track.scores[t].resize(td.tracked.size());
        for (std::size_t i = 0; i < td.tracked.size(); ++i) {
          if (round == 0) {
            track.scores[t][i] = 0.5;
          } else {
            const Mlp& net = model.scorers.at(
                {td.tracked[i].pred, static_cast<int>(td.tracked[i].args.size())});
            track.scores[t][i] = sigmoid(net.logits(td.features[t][i])[0]);
          }
        }
      }

      Labeling lab;
      try {
        lab = abduce(track, td.bound, cfg.tie_break);
      } catch (const InfeasibleError&) {
        ++infeasible;
        continue;
      }
      round_cost += lab.cost;

      for (const Labeling::Pseudo& p : lab.pseudo) {
        std::size_t i = 0;
        while (!(td.tracked[i] == p.atom)) ++i;
        ScorerKey key{p.atom.pred, static_cast<int>(p.atom.args.size())};
        buckets[key].push_back(
            {&td.features[static_cast<std::size_t>(p.step)][i], p.label ? 1.0 : 0.0});
      }
      if (cfg.self_training) {
        for (std::size_t t = 0; t < td.traj->states.size(); ++t) {
          for (std::size_t i = 0; i < td.extra_atoms.size(); ++i) {
            const GroundAtom& a = td.extra_atoms[i];
            ScorerKey key{a.pred, static_cast<int>(a.args.size())};
            double p = round == 0 ? 0.5
                                  : sigmoid(model.scorers.at(key).logits(
                                        td.extra_features[t][i])[0]);
            buckets[key].push_back({&td.extra_features[t][i], p >= cfg.threshold ? 1.0 : 0.0});
          }
        }
      }
    }

    telemetry.round_costs.push_back(round_cost);
    telemetry.infeasible.push_back(infeasible);

    int pred_idx = 0;
    for (auto& [key, examples] : buckets) {
      Mlp& net = model.scorers.at(key);
      MlpGrads grads(net);
      Rng shuffler(mix_seed(cfg.seed, 0xe90c + static_cast<std::uint64_t>(round) * 131 +
                                          static_cast<std::uint64_t>(pred_idx++)));
      std::vector<std::size_t> order(examples.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffler.shuffle(order);
        std::size_t at = 0;
        while (at < order.size()) {
          std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch),
                                                   order.size() - at);
          grads.reset();
          for (std::size_t j = 0; j < take; ++j) {
            const Example& e = examples[order[at + j]];
            bce_backward(net, e.x->data(), e.y, grads);
          }
          sgd_step(net, grads, cfg.lr, 1.0 / static_cast<double>(take));
          at += take;
        }
      }
      if (round == cfg.rounds - 1) {
        std::vector<bool> witnessed(static_cast<std::size_t>(net.n_in), false);
        for (const Example& e : examples)
          for (std::size_t i = 0; i < e.x->size(); ++i)
            if ((*e.x)[i] != 0.0) witnessed[i] = true;
        zero_unwitnessed_inputs(net, witnessed);
      }
    }
  }

  return {std::move(model), std::move(telemetry)};
}

// Single-task convenience wrapper.
inline std::pair<PerceptionModel, PerceptionTelemetry> train_perception(
    const Dataset& data, const StateMachine& machine, const PerceptionTrainConfig& cfg) {
  if (data.trajectories.empty()) throw std::invalid_argument("empty dataset");
  std::map<std::string, StateMachine> machines;
  for (const Trajectory& t : data.trajectories) machines.emplace(t.task, machine);
  return train_perception(data, machines, cfg);
}

struct GroundingReport {
  int correct = 0;
  int total = 0;
  std::map<std::string, std::pair<int, int>> per_pred;  // correct, total

  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
};

// Agreement between thresholded scores and the oracle over (state, atom set)
// pairs, micro-averaged and per predicate.
inline GroundingReport grounding_accuracy(
    const PerceptionModel& model,
    const std::vector<std::pair<EnvState, SymbolicState>>& sample) {
  GroundingReport report;
  for (const auto& [state, atoms] : sample) {
    Grounding g = model.ground_state(state, atoms);
    for (const GroundAtom& a : atoms.atoms) {
      bool hit = g.truth.at(a) == oracle_atom(state, a);
      report.correct += hit ? 1 : 0;
      report.total += 1;
      auto& [c, n] = report.per_pred[a.pred];
      c += hit ? 1 : 0;
      n += 1;
    }
  }
  return report;
}

// Flatten held-out demonstrations into (state, tracked atoms) pairs —
// the sampling distribution used for accuracy reports.
inline std::vector<std::pair<EnvState, SymbolicState>> grounding_sample(
    const Dataset& data, const std::map<std::string, StateMachine>& machines,
    std::size_t limit) {
  std::vector<std::pair<EnvState, SymbolicState>> out;
  for (const Trajectory& traj : data.trajectories) {
    SymbolicState tracked = tracked_atoms(bind_roles(machines.at(traj.task), traj.binding));
    for (const EnvState& s : traj.states) {
      if (out.size() >= limit) return out;
      out.emplace_back(s, tracked);
    }
  }
  return out;
}

}  // namespace abil

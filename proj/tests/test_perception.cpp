#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <string>
#include <vector>

#include "abil/expert.hpp"
#include "abil/gridworld.hpp"
#include "abil/kb.hpp"
#include "abil/perception.hpp"

using namespace abil;

namespace {

StateMachine load_machine(Task task) {
  return parse_kb_file(std::string(ABIL_KB_DIR) + "/" + task_kb_name(task) + ".kb");
}

// goto+pickup demos and their machines; enough signal for smoke-level
// accuracy without acceptance-scale runtime.
std::pair<Dataset, std::map<std::string, StateMachine>> small_corpus(int per_task,
                                                                     std::uint64_t seed) {
  Dataset data;
  std::map<std::string, StateMachine> machines;
  for (Task task : {Task::Goto, Task::Pickup}) {
    StateMachine m = load_machine(task);
    Dataset d = generate_dataset(task_config(task, Split::Basic), m, per_task, seed);
    for (Trajectory& t : d.trajectories) data.trajectories.push_back(std::move(t));
    machines.emplace(task_name(task), std::move(m));
  }
  return {std::move(data), std::move(machines)};
}

}  // namespace

TEST_CASE("training rejects unusable input") {
  StateMachine m = load_machine(Task::Pickup);
  PerceptionTrainConfig cfg;
  CHECK_THROWS_AS(train_perception(Dataset{}, m, cfg), std::invalid_argument);

  Dataset data = generate_dataset(task_config(Task::Pickup, Split::Basic), m, 2, 0);
  std::map<std::string, StateMachine> wrong;
  wrong.emplace("open", load_machine(Task::Open));
  CHECK_THROWS_AS(train_perception(data, wrong, cfg), std::invalid_argument);
}

TEST_CASE("expert demonstrations are always feasible and costs shrink") {
  auto [data, machines] = small_corpus(30, 5);
  PerceptionTrainConfig cfg;
  cfg.seed = 3;
  auto [model, telemetry] = train_perception(data, machines, cfg);

  REQUIRE(telemetry.round_costs.size() == static_cast<std::size_t>(cfg.rounds));
  REQUIRE(telemetry.infeasible.size() == static_cast<std::size_t>(cfg.rounds));
  for (int skipped : telemetry.infeasible) CHECK(skipped == 0);

  // round 0 scores are pinned at 0.5, so its cost is 0.25 per (state, atom)
  double atom_steps = 0.0;
  for (const Trajectory& t : data.trajectories) {
    StateMachine bound = bind_roles(machines.at(t.task), t.binding);
    atom_steps += static_cast<double>(t.states.size()) *
                  static_cast<double>(tracked_atoms(bound).atoms.size());
  }
  CHECK(telemetry.round_costs.front() == 0.25 * atom_steps);

  // relabeling against trained scorers beats the uniform bootstrap
  CHECK(telemetry.round_costs.back() < 0.5 * telemetry.round_costs.front());

  // one scorer per (predicate, arity) over the tracked universe
  REQUIRE(model.scorers.size() == 2);
  CHECK(model.scorers.count({"facing", 1}) == 1);
  CHECK(model.scorers.count({"holding", 1}) == 1);
}

TEST_CASE("training is bit-reproducible under a fixed seed") {
  auto [data, machines] = small_corpus(12, 9);
  PerceptionTrainConfig cfg;
  cfg.rounds = 3;
  cfg.seed = 21;

  PerceptionModel a = train_perception(data, machines, cfg).first;
  PerceptionModel b = train_perception(data, machines, cfg).first;
  CHECK(a == b);  // exact weight equality, not a tolerance

  cfg.seed = 22;
  PerceptionModel c = train_perception(data, machines, cfg).first;
  CHECK_FALSE(a == c);
}

TEST_CASE("trained scorers ground held-out states accurately") {
  auto [data, machines] = small_corpus(50, 11);
  PerceptionTrainConfig cfg;
  cfg.seed = 4;
  PerceptionModel model = train_perception(data, machines, cfg).first;

  auto [held, held_machines] = small_corpus(20, 1u << 21);
  auto sample = grounding_sample(held, held_machines, 200);
  REQUIRE(sample.size() == 200);
  GroundingReport rep = grounding_accuracy(model, sample);
  CHECK(rep.accuracy() >= 0.8);
  CHECK(rep.per_pred.count("facing") == 1);
  CHECK(rep.per_pred.count("holding") == 1);
}

TEST_CASE("ground_state thresholds its own scores") {
  auto [data, machines] = small_corpus(8, 2);
  PerceptionTrainConfig cfg;
  cfg.rounds = 2;
  PerceptionModel model = train_perception(data, machines, cfg).first;

  const Trajectory& traj = data.trajectories.front();
  StateMachine bound = bind_roles(machines.at(traj.task), traj.binding);
  SymbolicState tracked = tracked_atoms(bound);
  Grounding g = model.ground_state(traj.states.front(), tracked);
  REQUIRE(g.truth.size() == tracked.atoms.size());
  for (const GroundAtom& a : tracked.atoms) {
    CHECK(g.scores.at(a) > 0.0);
    CHECK(g.scores.at(a) < 1.0);
    CHECK(g.truth.at(a) == (g.scores.at(a) >= model.threshold));
  }

  CHECK_THROWS_AS(model.score(traj.states.front(), GroundAtom{"is-open", {obj(0)}}),
                  MissingScorerError);
}

TEST_CASE("threshold placement decides borderline atoms") {
  // zero-weight scorer pins every score at exactly 0.5
  PerceptionModel model;
  Rng rng(0);
  Mlp z = Mlp::init(perception_dim(1), 4, 1, rng);
  std::fill(z.w1.begin(), z.w1.end(), 0.0);
  std::fill(z.w2.begin(), z.w2.end(), 0.0);
  model.scorers.emplace(ScorerKey{"facing", 1}, z);

  EnvState s;
  s.width = 4;
  s.height = 4;
  s.wall.assign(16, 0);
  s.objects = {{0, Kind::Ball, Color::Red, 2, 2, DoorState::Closed, false}};
  s.agent_x = 1;
  s.agent_y = 1;
  s.agent_dir = Dir::East;
  s.horizon = 8;

  GroundAtom atom{"facing", {obj(0)}};
  CHECK(model.score(s, atom) == 0.5);
  CHECK(model.ground_state(s, SymbolicState{{atom}}).truth.at(atom));  // >= threshold

  model.threshold = 0.6;
  CHECK_FALSE(model.ground_state(s, SymbolicState{{atom}}).truth.at(atom));
}

TEST_CASE("self-training variant runs and keeps the scorer set") {
  auto [data, machines] = small_corpus(10, 6);
  PerceptionTrainConfig cfg;
  cfg.rounds = 3;
  cfg.seed = 13;
  cfg.self_training = true;
  auto [model, telemetry] = train_perception(data, machines, cfg);
  CHECK(model.scorers.size() == 2);
  for (int skipped : telemetry.infeasible) CHECK(skipped == 0);

  cfg.self_training = false;
  PerceptionModel plain = train_perception(data, machines, cfg).first;
  // the extra pseudo-labels actually alter the fit
  CHECK_FALSE(model == plain);
}

TEST_CASE("grounding_sample respects its cap and traversal order") {
  auto [data, machines] = small_corpus(10, 8);
  auto full = grounding_sample(data, machines, 1u << 20);
  std::size_t states = 0;
  for (const Trajectory& t : data.trajectories) states += t.states.size();
  CHECK(full.size() == states);

  auto capped = grounding_sample(data, machines, 17);
  REQUIRE(capped.size() == 17);
  for (std::size_t i = 0; i < capped.size(); ++i) {
    CHECK(capped[i].first.agent_x == full[i].first.agent_x);
    CHECK(capped[i].second.atoms == full[i].second.atoms);
  }
}

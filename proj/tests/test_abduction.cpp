#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <string>
#include <vector>

#include "abil/abduction.hpp"
#include "abil/expert.hpp"
#include "abil/gridworld.hpp"
#include "abil/kb.hpp"
#include "abil/rng.hpp"
#include "abil/symbolic.hpp"
#include "machines.hpp"

using namespace abil;
using abil::testing::ratom;

namespace {

// Track whose truth targets live on the machine's tracked universe. Columns
// follow the sorted atom order that check_track expects.
ScoreTrack uniform_track(const StateMachine& m, std::size_t steps, double value = 0.5) {
  ScoreTrack track;
  track.atoms = tracked_atoms(m).atoms;
  track.scores.assign(steps, std::vector<double>(track.atoms.size(), value));
  return track;
}

ScoreTrack random_track(const StateMachine& m, std::size_t steps, Rng& rng) {
  ScoreTrack track = uniform_track(m, steps);
  for (auto& row : track.scores)
    for (double& s : row) s = rng.uniform01();
  return track;
}

double score_at(const ScoreTrack& track, std::size_t t, const GroundAtom& a) {
  auto it = std::find(track.atoms.begin(), track.atoms.end(), a);
  REQUIRE(it != track.atoms.end());
  return track.scores[t][static_cast<std::size_t>(it - track.atoms.begin())];
}

void check_block_shape(const Labeling& lab, std::size_t steps) {
  REQUIRE(lab.assignment.size() == steps);
  CHECK(lab.assignment.front() == 0);
  CHECK(lab.assignment.back() == static_cast<int>(lab.path.size()) - 1);
  std::vector<int> seen(lab.path.size(), 0);
  for (std::size_t t = 0; t < steps; ++t) {
    int k = lab.assignment[t];
    REQUIRE(k >= 0);
    REQUIRE(k < static_cast<int>(lab.path.size()));
    if (t > 0) {
      CHECK(k >= lab.assignment[t - 1]);      // monotone along the path
      CHECK(k - lab.assignment[t - 1] <= 1);  // contiguous blocks
    }
    ++seen[static_cast<std::size_t>(k)];
  }
  for (int count : seen) CHECK(count > 0);  // every path node gets a block
}

}  // namespace

TEST_CASE("uniform scores on a chain resolve by transition tie-break") {
  StateMachine m = testing::chain3();
  ScoreTrack track = uniform_track(m, 6);  // T = 5

  // all labelings cost the same; the tie-break alone decides
  Labeling earliest = abduce(track, m, TieBreak::Earliest);
  CHECK(earliest.path == std::vector<std::string>{"v0", "v1", "goal"});
  CHECK(earliest.assignment == std::vector<int>{0, 1, 2, 2, 2, 2});

  Labeling latest = abduce(track, m, TieBreak::Latest);
  CHECK(latest.assignment == std::vector<int>{0, 0, 0, 0, 1, 2});

  for (TieBreak tb : {TieBreak::Earliest, TieBreak::Latest}) {
    Labeling dp = abduce(track, m, tb);
    Labeling bf = abduce_bruteforce(track, m, tb);
    CHECK(dp == bf);
  }
}

TEST_CASE("too few steps for any path is infeasible") {
  StateMachine m = testing::chain3();
  // one state total (T = 0), but every initial->goal path needs 3 blocks
  ScoreTrack track = uniform_track(m, 1);
  CHECK_THROWS_AS(abduce(track, m), InfeasibleError);
  CHECK_THROWS_AS(abduce_bruteforce(track, m), InfeasibleError);
}

TEST_CASE("infeasible paths are skipped, not fatal") {
  // or_uneven has a direct edge and a 3-node detour; with T = 1 only the
  // direct path fits
  StateMachine m = testing::or_uneven();
  ScoreTrack track = uniform_track(m, 2);
  Labeling lab = abduce(track, m);
  CHECK(lab.path == std::vector<std::string>{"v0", "goal"});
  CHECK(lab.assignment == std::vector<int>{0, 1});
}

TEST_CASE("scores steer the path taken through an OR branch") {
  StateMachine m = testing::or_branch();
  ScoreTrack track = uniform_track(m, 5, 0.1);
  GroundAtom pa = ratom("pa", {"x"});
  GroundAtom pc = ratom("pc", {"x"});
  auto col = [&](const GroundAtom& a) {
    return static_cast<std::size_t>(
        std::find(track.atoms.begin(), track.atoms.end(), a) - track.atoms.begin());
  };
  // branch-a atoms score high mid-trajectory, goal atom at the end
  for (std::size_t t = 1; t <= 3; ++t) track.scores[t][col(pa)] = 0.9;
  track.scores[4][col(pc)] = 0.9;

  for (TieBreak tb : {TieBreak::Earliest, TieBreak::Latest}) {
    Labeling lab = abduce(track, m, tb);
    CHECK(lab.path == std::vector<std::string>{"v0", "v1", "goal"});
    CHECK(lab.assignment == std::vector<int>{0, 1, 1, 1, 2});
    CHECK(lab == abduce_bruteforce(track, m, tb));
  }
}

TEST_CASE("symmetric scores on an AND diamond fall to path order") {
  StateMachine m = testing::and_diamond();
  ScoreTrack track = uniform_track(m, 6);
  // pa and pb are exchanged by the two orderings, so both paths cost the
  // same; enumeration order (lexicographic node ids) breaks the tie
  Labeling lab = abduce(track, m);
  CHECK(lab.path == std::vector<std::string>{"v0", "a", "ab", "goal"});
  CHECK(lab == abduce_bruteforce(track, m));
}

TEST_CASE("random chain tracks agree with the oracle") {
  StateMachine m = testing::chain3();
  Rng rng(41);
  for (int iter = 0; iter < 30; ++iter) {
    ScoreTrack track = random_track(m, 7, rng);  // T = 6
    for (TieBreak tb : {TieBreak::Earliest, TieBreak::Latest}) {
      Labeling dp = abduce(track, m, tb);
      Labeling bf = abduce_bruteforce(track, m, tb);
      CHECK(dp.cost == bf.cost);  // exact: same fold order
      CHECK(dp == bf);
    }
  }
}

TEST_CASE("dp equals brute force on random machines and tracks") {
  Rng rng(1234);
  int infeasible_seen = 0;
  for (int iter = 0; iter < 200; ++iter) {
    StateMachine m = testing::random_machine(rng);
    std::size_t steps = static_cast<std::size_t>(rng.uniform_int(1, 11));
    ScoreTrack track = random_track(m, steps, rng);
    TieBreak tb = rng.bernoulli(0.5) ? TieBreak::Earliest : TieBreak::Latest;
    CAPTURE(iter, m.name, steps, tb == TieBreak::Earliest);

    bool dp_infeasible = false, bf_infeasible = false;
    Labeling dp, bf;
    try {
      dp = abduce(track, m, tb);
    } catch (const InfeasibleError&) {
      dp_infeasible = true;
    }
    try {
      bf = abduce_bruteforce(track, m, tb);
    } catch (const InfeasibleError&) {
      bf_infeasible = true;
    }
    REQUIRE(dp_infeasible == bf_infeasible);
    if (dp_infeasible) {
      ++infeasible_seen;
      continue;
    }
    CHECK(dp.cost == bf.cost);
    CHECK(dp == bf);
    check_block_shape(dp, steps);
  }
  // the draw range includes single-step tracks, so both sides of the
  // feasibility agreement actually ran
  CHECK(infeasible_seen > 0);
  CHECK(infeasible_seen < 100);
}

TEST_CASE("affine score rescaling preserves the argmin") {
  // shrinking every score toward 0.5 scales all cost differences by the same
  // factor, so the chosen labeling cannot move
  Rng rng(99);
  for (int iter = 0; iter < 50; ++iter) {
    StateMachine m = testing::random_machine(rng);
    std::size_t steps = static_cast<std::size_t>(rng.uniform_int(4, 9));
    ScoreTrack track = random_track(m, steps, rng);
    ScoreTrack shrunk = track;
    for (auto& row : shrunk.scores)
      for (double& s : row) s = 0.5 + 0.3 * (s - 0.5);

    for (TieBreak tb : {TieBreak::Earliest, TieBreak::Latest}) {
      Labeling a = abduce(track, m, tb);
      Labeling b = abduce(shrunk, m, tb);
      CHECK(a.path == b.path);
      CHECK(a.assignment == b.assignment);
    }
  }
}

TEST_CASE("track validation rejects malformed input") {
  StateMachine m = testing::chain3();
  ScoreTrack empty;
  empty.atoms = tracked_atoms(m).atoms;
  CHECK_THROWS_AS(abduce(empty, m), std::invalid_argument);

  ScoreTrack ragged = uniform_track(m, 3);
  ragged.scores[1].pop_back();
  CHECK_THROWS_AS(abduce(ragged, m), std::invalid_argument);

  ScoreTrack wrong_atoms = uniform_track(m, 3);
  wrong_atoms.atoms[0].pred = "no-such-pred";
  CHECK_THROWS_AS(abduce(wrong_atoms, m), std::invalid_argument);
}

TEST_CASE("brute force enforces its size caps") {
  StateMachine m = testing::chain3();
  CHECK_THROWS_AS(abduce_bruteforce(uniform_track(m, 12), m), std::invalid_argument);
  // the dp handles the same track fine
  CHECK_NOTHROW(abduce(uniform_track(m, 12), m));
}

TEST_CASE("pseudo labels emit the closed world of every step") {
  StateMachine m = parse_kb_file(std::string(ABIL_KB_DIR) + "/unlock.kb");
  StateMachine bound = bind_roles(m, {{"key", {3, "key"}}, {"door", {7, "door"}}});
  SymbolicState tracked = tracked_atoms(bound);
  REQUIRE(tracked.atoms.size() == 4);  // facing+holding key, facing+is-open door

  ScoreTrack track = uniform_track(bound, 5);
  Labeling lab = abduce(track, bound, TieBreak::Latest);
  // latest ties on 5 steps pin one step per node: v0..goal in order
  CHECK(lab.assignment == std::vector<int>{0, 1, 2, 3, 4});

  auto labels_at = [&](int step) {
    std::vector<Labeling::Pseudo> out;
    for (const auto& p : lab.pseudo)
      if (p.step == step) out.push_back(p);
    return out;
  };

  // initial node is empty: everything false
  for (const auto& p : labels_at(0)) CHECK_FALSE(p.label);

  // holding-only node: one positive, three negatives
  GroundAtom holding_key{"holding", {obj(3)}};
  int positives = 0;
  for (const auto& p : labels_at(2)) {
    if (p.label) {
      ++positives;
      CHECK(p.atom == holding_key);
    }
  }
  CHECK(positives == 1);

  // goal step entails the opened door
  GroundAtom open_door{"is-open", {obj(7)}};
  bool goal_open = false;
  for (const auto& p : labels_at(4))
    if (p.atom == open_door) goal_open = p.label;
  CHECK(goal_open);

  // closed world: every (step, tracked atom) pair appears exactly once
  CHECK(lab.pseudo.size() == 5 * tracked.atoms.size());
}

TEST_CASE("oracle scores from expert unlock runs abduce at cost zero") {
  StateMachine m = parse_kb_file(std::string(ABIL_KB_DIR) + "/unlock.kb");
  Dataset data = generate_dataset(task_config(Task::Unlock, Split::Basic), m, 50, 0);
  for (const Trajectory& traj : data.trajectories) {
    CAPTURE(traj.seed);
    StateMachine bound = bind_roles(m, traj.binding);

    ScoreTrack track;
    track.atoms = tracked_atoms(bound).atoms;
    for (const EnvState& s : traj.states) {
      std::vector<double> row;
      for (const GroundAtom& a : track.atoms) row.push_back(oracle_atom(s, a) ? 1.0 : 0.0);
      track.scores.push_back(std::move(row));
    }

    Labeling lab = abduce(track, bound, TieBreak::Latest);
    CHECK(lab.cost == 0.0);
    check_block_shape(lab, track.scores.size());

    // transitions land exactly where the oracle truth vector changes
    for (std::size_t t = 1; t < track.scores.size(); ++t) {
      bool truth_changed = track.scores[t] != track.scores[t - 1];
      bool block_changed = lab.assignment[t] != lab.assignment[t - 1];
      CHECK(truth_changed == block_changed);
    }
    // and the assigned node matches the oracle at every step
    for (std::size_t t = 0; t < track.scores.size(); ++t) {
      const SymbolicState& node = lab.path_nodes[static_cast<std::size_t>(lab.assignment[t])];
      for (const GroundAtom& a : track.atoms)
        CHECK(node.contains(a) == (score_at(track, t, a) == 1.0));
    }

    if (track.scores.size() <= 11) {
      Labeling bf = abduce_bruteforce(track, bound, TieBreak::Latest);
      CHECK(lab == bf);
    }
  }
}

#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "abil/kb.hpp"
#include "abil/rng.hpp"
#include "abil/symbolic.hpp"
#include "machines.hpp"

using namespace abil;
using abil::testing::ratom;

namespace {
GroundAtom batom(const std::string& pred, std::vector<int> ids) {
  GroundAtom a;
  a.pred = pred;
  for (int id : ids) a.args.push_back(obj(id));
  return a;
}
}  // namespace

TEST_CASE("entails checks every atom of the condition") {
  GroundAtom holding = batom("holding", {1});
  GroundAtom facing = batom("facing", {2});

  std::map<GroundAtom, bool> a{{holding, true}};
  CHECK(entails(a, SymbolicState{{holding}}));

  std::map<GroundAtom, bool> b{{holding, true}, {facing, false}};
  CHECK_FALSE(entails(b, SymbolicState{{holding, facing}}));

  std::map<GroundAtom, double> scores{{batom("is-open", {3}), 0.73}};
  CHECK(entails(scores, 0.5, SymbolicState{{batom("is-open", {3})}}));
  CHECK_FALSE(entails(scores, 0.8, SymbolicState{{batom("is-open", {3})}}));
}

TEST_CASE("entails raises on atoms outside the assignment domain") {
  std::map<GroundAtom, bool> a{{batom("holding", {1}), true}};
  CHECK_THROWS_AS(entails(a, SymbolicState{{batom("facing", {2})}}), MissingAtomError);
  // even when an earlier atom already decides the answer
  std::map<GroundAtom, bool> b{{batom("holding", {1}), false}};
  CHECK_THROWS_AS(entails(b, SymbolicState{{batom("holding", {1}), batom("facing", {2})}}),
                  MissingAtomError);
}

TEST_CASE("entails monotonicity under enlarged true sets") {
  Rng rng(7);
  std::vector<GroundAtom> universe;
  for (int p = 0; p < 4; ++p)
    for (int o = 0; o < 3; ++o) universe.push_back(batom("p" + std::to_string(p), {o}));

  for (int iter = 0; iter < 200; ++iter) {
    std::map<GroundAtom, bool> small, big;
    std::vector<GroundAtom> cond_atoms;
    for (const auto& atom : universe) {
      bool truth = rng.bernoulli(0.5);
      small[atom] = truth;
      big[atom] = truth || rng.bernoulli(0.3);  // big |= everything small does
      if (rng.bernoulli(0.25)) cond_atoms.push_back(atom);
    }
    SymbolicState cond{cond_atoms};
    if (entails(small, cond)) CHECK(entails(big, cond));
  }
}

TEST_CASE("apply_edge implements the effect law") {
  GroundAtom facing_key = batom("facing", {3});
  GroundAtom holding_key = batom("holding", {3});

  Edge pick;
  pick.add = SymbolicState{{holding_key}};
  pick.del = SymbolicState{{facing_key}};
  CHECK(apply_edge(SymbolicState{{facing_key}}, pick) == SymbolicState{{holding_key}});

  Edge noop;
  CHECK(apply_edge(SymbolicState{{holding_key}}, noop) == SymbolicState{{holding_key}});

  Edge add_only;
  add_only.add = SymbolicState{{batom("facing", {5})}};
  CHECK(apply_edge(SymbolicState{}, add_only) == SymbolicState{{batom("facing", {5})}});
}

TEST_CASE("obj_of returns arguments in declaration order") {
  auto put = ratom("put", {"rag", "bucket"});
  auto args = obj_of(put);
  REQUIRE(args.size() == 2);
  CHECK(args[0].role == "rag");
  CHECK(args[1].role == "bucket");

  CHECK(obj_of(ratom("goto", {"key"})).size() == 1);

  auto clean = obj_of(ratom("clean", {"car", "rag", "soap"}));
  REQUIRE(clean.size() == 3);
  CHECK(clean[2].role == "soap");
}

TEST_CASE("validate_machine accepts the shipped machines") {
  for (const char* name : {"goto", "pickup", "open", "put", "unlock"}) {
    StateMachine m = parse_kb_file(std::string(ABIL_KB_DIR) + "/" + name + ".kb");
    CAPTURE(name);
    CHECK(validate_machine(m).empty());
  }
}

TEST_CASE("validate_machine flags broken machines") {
  SECTION("effect law violation") {
    StateMachine m = testing::chain3();
    m.edges[0].add = SymbolicState{};  // claims v1 = v0, but v1 has pa(x)
    auto v = validate_machine(m);
    REQUIRE_FALSE(v.empty());
    CHECK(v[0].code == "effect-law");
  }
  SECTION("unreachable goal") {
    StateMachine m = testing::chain3();
    m.edges.pop_back();  // v1 -> goal gone; goal now has no incoming edge
    auto v = validate_machine(m);
    bool unreachable = false;
    for (const auto& viol : v) unreachable = unreachable || viol.code == "unreachable-goal";
    CHECK(unreachable);
  }
  SECTION("vocabulary must resolve") {
    StateMachine m = testing::chain3();
    m.predicates.pop_back();  // pb now undeclared
    auto v = validate_machine(m);
    REQUIRE_FALSE(v.empty());
    CHECK(v[0].code == "unknown-predicate");
  }
  SECTION("add and del must not overlap") {
    StateMachine m = testing::single_edge();
    m.edges[0].del = m.edges[0].add;
    auto v = validate_machine(m);
    bool overlap = false;
    for (const auto& viol : v) overlap = overlap || viol.code == "add-del-overlap";
    CHECK(overlap);
  }
}

TEST_CASE("enumerate_paths lists simple paths in lexicographic order") {
  CHECK(enumerate_paths(testing::chain3()) ==
        std::vector<std::vector<std::string>>{{"v0", "v1", "goal"}});

  CHECK(enumerate_paths(testing::or_branch()) ==
        std::vector<std::vector<std::string>>{{"v0", "v1", "goal"}, {"v0", "v2", "goal"}});

  CHECK(enumerate_paths(testing::and_diamond()) ==
        std::vector<std::vector<std::string>>{{"v0", "a", "ab", "goal"},
                                              {"v0", "b", "ab", "goal"}});
}

TEST_CASE("enumerate_paths raises past the path cap") {
  // 7 two-node layers: 128 simple paths, over the default cap of 64.
  StateMachine m;
  m.name = "wide";
  m.predicates = {{"p", 1}};
  m.operators = {{"op", 1}};
  m.roles = {{"x", "thing"}};
  m.initial = "v0";
  m.goal = "goal";
  m.nodes["v0"] = SymbolicState{};
  m.nodes["goal"] = SymbolicState{};
  auto layer_node = [&](int layer, int side) {
    return "l" + std::to_string(layer) + (side ? "b" : "a");
  };
  for (int layer = 0; layer < 7; ++layer)
    for (int side = 0; side < 2; ++side) m.nodes[layer_node(layer, side)] = SymbolicState{};
  auto connect = [&](const std::string& a, const std::string& b) {
    Edge e;
    e.src = a;
    e.dst = b;
    e.op = ratom("op", {"x"});
    m.edges.push_back(e);
  };
  for (int side = 0; side < 2; ++side) connect("v0", layer_node(0, side));
  for (int layer = 0; layer + 1 < 7; ++layer)
    for (int s1 = 0; s1 < 2; ++s1)
      for (int s2 = 0; s2 < 2; ++s2) connect(layer_node(layer, s1), layer_node(layer + 1, s2));
  for (int side = 0; side < 2; ++side) connect(layer_node(6, side), "goal");

  CHECK_THROWS_AS(enumerate_paths(m), PathExplosionError);
  CHECK(enumerate_paths(m, 128).size() == 128);
}

TEST_CASE("plan_skeleton walks the unlock chain") {
  StateMachine m = parse_kb_file(std::string(ABIL_KB_DIR) + "/unlock.kb");
  PlanSkeleton plan = plan_skeleton(m);
  REQUIRE(plan.steps.size() == 4);
  CHECK(plan.steps[0] == PlanSkeleton::Step{"v0", ratom("goto", {"key"})});
  CHECK(plan.steps[1] == PlanSkeleton::Step{"v1", ratom("pick", {"key"})});
  CHECK(plan.steps[2] == PlanSkeleton::Step{"v2", ratom("goto", {"door"})});
  CHECK(plan.steps[3] == PlanSkeleton::Step{"v3", ratom("open", {"door"})});
  CHECK(plan.goal == "goal");
}

TEST_CASE("plan_skeleton prefers the shorter branch and is deterministic") {
  StateMachine m = testing::or_uneven();
  PlanSkeleton plan = plan_skeleton(m);
  REQUIRE(plan.steps.size() == 1);
  CHECK(plan.steps[0].node == "v0");
  CHECK(plan.steps[0].op == ratom("opc", {"x"}));

  // exhaustive comparison: no enumerated path is shorter
  for (const auto& path : enumerate_paths(m))
    CHECK(path.size() >= plan.steps.size() + 1);

  CHECK(plan_skeleton(m) == plan);
  CHECK(plan_skeleton(testing::and_diamond()) == plan_skeleton(testing::and_diamond()));

  PlanSkeleton single = plan_skeleton(testing::single_edge());
  REQUIRE(single.steps.size() == 1);
  CHECK(single.steps[0].op == ratom("opa", {"x"}));
}

TEST_CASE("paths folded through apply_edge end entailing the goal") {
  Rng rng(11);
  std::vector<StateMachine> machines = {testing::single_edge(), testing::chain3(),
                                        testing::or_branch(), testing::or_uneven(),
                                        testing::and_diamond()};
  for (const char* name : {"goto", "pickup", "open", "put", "unlock"})
    machines.push_back(parse_kb_file(std::string(ABIL_KB_DIR) + "/" + name + ".kb"));
  for (int i = 0; i < 50; ++i) machines.push_back(testing::random_machine(rng));

  for (const StateMachine& m : machines) {
    CAPTURE(m.name);
    REQUIRE(validate_machine(m).empty());
    for (const auto& path : enumerate_paths(m)) {
      SymbolicState state = m.nodes.at(m.initial);
      for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const Edge* found = nullptr;
        for (const Edge& e : m.edges)
          if (e.src == path[i] && e.dst == path[i + 1]) found = &e;
        REQUIRE(found != nullptr);
        state = apply_edge(state, *found);
      }
      CHECK(atom_difference(m.nodes.at(m.goal), state).empty());
    }
  }
}

TEST_CASE("effect-law round trip on every shipped edge") {
  for (const char* name : {"goto", "pickup", "open", "put", "unlock"}) {
    StateMachine m = parse_kb_file(std::string(ABIL_KB_DIR) + "/" + name + ".kb");
    for (const Edge& e : m.edges) {
      CAPTURE(m.name, e.src, e.dst);
      CHECK(apply_edge(m.nodes.at(e.src), e) == m.nodes.at(e.dst));
    }
  }
}

TEST_CASE("tracked_atoms unions all node conditions") {
  StateMachine m = parse_kb_file(std::string(ABIL_KB_DIR) + "/unlock.kb");
  SymbolicState tracked = tracked_atoms(m);
  CHECK(tracked.size() == 4);
  CHECK(tracked.contains(ratom("facing", {"key"})));
  CHECK(tracked.contains(ratom("facing", {"door"})));
  CHECK(tracked.contains(ratom("holding", {"key"})));
  CHECK(tracked.contains(ratom("is-open", {"door"})));
}

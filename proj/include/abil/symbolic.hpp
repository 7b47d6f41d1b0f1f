#pragma once
// Symbolic layer: ground atoms, node conditions, and the task state machine
// with its effect algebra. Everything here is an immutable value after
// construction and every function is pure, so the types are safe to share
// across threads.

#include <algorithm>
#include <compare>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace abil {

// Concrete episode object (id >= 0) or an unbound role placeholder from a
// knowledge base (id < 0, role carries the placeholder name).
struct ObjectRef {
  int id = -1;
  std::string role;

  bool bound() const { return id >= 0; }
  auto operator<=>(const ObjectRef&) const = default;
};

inline ObjectRef obj(int id) { return ObjectRef{id, {}}; }
inline ObjectRef role_ref(std::string name) { return ObjectRef{-1, std::move(name)}; }

struct PredicateSymbol {
  std::string name;
  int arity = 1;
  auto operator<=>(const PredicateSymbol&) const = default;
};

// Same shape as a predicate symbol but kept in a separate vocabulary table;
// validate_machine enforces that the two name sets stay disjoint.
using OperatorSymbol = PredicateSymbol;

struct GroundAtom {
  std::string pred;
  std::vector<ObjectRef> args;
  auto operator<=>(const GroundAtom&) const = default;
};

inline std::string to_string(const ObjectRef& r) {
  return r.bound() ? std::to_string(r.id) : r.role;
}

// "holding(3)" once bound, "holding(key)" at the template level.
inline std::string to_string(const GroundAtom& a) {
  std::string out = a.pred + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += ",";
    out += to_string(a.args[i]);
  }
  return out + ")";
}

// Sorted duplicate-free set of positive atoms. Doubles as a node condition,
// a goal, and an edge's add/del set; negatives are implied closed-world over
// whatever atom universe the caller tracks.
struct SymbolicState {
  std::vector<GroundAtom> atoms;

  SymbolicState() = default;
  explicit SymbolicState(std::vector<GroundAtom> list) : atoms(std::move(list)) {
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  }

  bool contains(const GroundAtom& a) const {
    return std::binary_search(atoms.begin(), atoms.end(), a);
  }
  bool empty() const { return atoms.empty(); }
  std::size_t size() const { return atoms.size(); }
  auto operator<=>(const SymbolicState&) const = default;
};

inline SymbolicState atom_union(const SymbolicState& a, const SymbolicState& b) {
  std::vector<GroundAtom> out;
  std::set_union(a.atoms.begin(), a.atoms.end(), b.atoms.begin(), b.atoms.end(),
                 std::back_inserter(out));
  return SymbolicState{std::move(out)};
}

inline SymbolicState atom_difference(const SymbolicState& a, const SymbolicState& b) {
  std::vector<GroundAtom> out;
  std::set_difference(a.atoms.begin(), a.atoms.end(), b.atoms.begin(), b.atoms.end(),
                      std::back_inserter(out));
  return SymbolicState{std::move(out)};
}

struct Edge {
  std::string src;
  std::string dst;
  GroundAtom op;       // operator labeling the transition
  SymbolicState add;   // effects gained
  SymbolicState del;   // effects lost
  auto operator<=>(const Edge&) const = default;
};

struct StateMachine {
  std::string name;
  std::vector<PredicateSymbol> predicates;
  std::vector<OperatorSymbol> operators;
  std::vector<std::pair<std::string, std::string>> roles;  // name -> kind
  std::map<std::string, SymbolicState> nodes;
  std::vector<Edge> edges;
  std::string initial;
  std::string goal;
  bool operator==(const StateMachine&) const = default;
};

struct PlanSkeleton {
  struct Step {
    std::string node;  // condition node the agent is at
    GroundAtom op;     // operator taken to leave it
    bool operator==(const Step&) const = default;
  };
  std::vector<Step> steps;  // non-terminal nodes in path order
  std::string goal;         // terminal node id
  bool operator==(const PlanSkeleton&) const = default;
};

struct Violation {
  std::string code;    // "effect-law", "unreachable-goal", "unknown-node", ...
  std::string where;   // offending node/edge in source terms
  std::string detail;
};

struct MissingAtomError : std::runtime_error {
  explicit MissingAtomError(const GroundAtom& a)
      : std::runtime_error("atom not in assignment domain: " + to_string(a)) {}
};

struct PathExplosionError : std::runtime_error {
  explicit PathExplosionError(std::size_t cap)
      : std::runtime_error("machine exceeds path cap of " + std::to_string(cap)) {}
};

struct NoPlanError : std::runtime_error {
  NoPlanError() : std::runtime_error("goal node unreachable from initial") {}
};

// s |= P: every atom of the condition is true. Atoms outside the assignment
// domain are a caller error, not "false".
inline bool entails(const std::map<GroundAtom, bool>& assignment,
                    const SymbolicState& condition) {
  bool all = true;
  for (const GroundAtom& a : condition.atoms) {
    auto it = assignment.find(a);
    if (it == assignment.end()) throw MissingAtomError(a);
    all = all && it->second;
  }
  return all;
}

inline bool entails(const std::map<GroundAtom, double>& scores, double threshold,
                    const SymbolicState& condition) {
  bool all = true;
  for (const GroundAtom& a : condition.atoms) {
    auto it = scores.find(a);
    if (it == scores.end()) throw MissingAtomError(a);
    all = all && (it->second >= threshold);
  }
  return all;
}

// The effect law: v = (u - EFF-) + EFF+. Total on any inputs.
inline SymbolicState apply_edge(const SymbolicState& node, const Edge& edge) {
  return atom_union(atom_difference(node, edge.del), edge.add);
}

inline std::vector<ObjectRef> obj_of(const GroundAtom& atom) { return atom.args; }

// Union of all node conditions: the machine's tracked-atom universe, i.e. the
// closed world that abduction scores and labels.
inline SymbolicState tracked_atoms(const StateMachine& m) {
  SymbolicState all;
  for (const auto& [id, cond] : m.nodes) all = atom_union(all, cond);
  return all;
}

namespace detail {

inline bool vocab_has(const std::vector<PredicateSymbol>& table, const std::string& name,
                      int arity) {
  for (const auto& s : table)
    if (s.name == name && s.arity == arity) return true;
  return false;
}

inline void check_atoms(const StateMachine& m, const SymbolicState& set,
                        const std::string& where, bool operators,
                        std::vector<Violation>& out) {
  for (const GroundAtom& a : set.atoms) {
    const auto& table = operators ? m.operators : m.predicates;
    if (!vocab_has(table, a.pred, static_cast<int>(a.args.size()))) {
      out.push_back({operators ? "unknown-operator" : "unknown-predicate", where,
                     to_string(a)});
      continue;
    }
    for (const ObjectRef& r : a.args) {
      if (r.bound()) continue;  // bound machines carry concrete ids
      bool declared = false;
      for (const auto& [role, kind] : m.roles) declared = declared || role == r.role;
      if (!declared) out.push_back({"unknown-role", where, r.role});
    }
  }
}

}  // namespace detail

// Structural well-formedness: resolvable vocabulary, one entry node, a
// reachable goal, disjoint add/del, and the effect law on every edge.
inline std::vector<Violation> validate_machine(const StateMachine& m) {
  std::vector<Violation> out;

  std::set<std::pair<std::string, int>> seen;
  for (const auto& p : m.predicates)
    if (!seen.insert({p.name, p.arity}).second)
      out.push_back({"duplicate-symbol", "predicates", p.name});
  std::set<std::string> pred_names;
  for (const auto& p : m.predicates) pred_names.insert(p.name);
  seen.clear();
  for (const auto& o : m.operators) {
    if (!seen.insert({o.name, o.arity}).second)
      out.push_back({"duplicate-symbol", "operators", o.name});
    if (pred_names.count(o.name))
      out.push_back({"symbol-clash", "operators", o.name});
  }
  std::set<std::string> role_names;
  for (const auto& [role, kind] : m.roles)
    if (!role_names.insert(role).second)
      out.push_back({"duplicate-role", "objects", role});

  if (!m.nodes.count(m.initial))
    out.push_back({"unknown-node", "initial", m.initial});
  if (!m.nodes.count(m.goal)) out.push_back({"unknown-node", "goal", m.goal});

  for (const auto& [id, cond] : m.nodes)
    detail::check_atoms(m, cond, "node " + id, false, out);

  std::set<std::string> has_incoming;
  for (const Edge& e : m.edges) {
    std::string where = "edge " + e.src + " -> " + e.dst;
    auto src = m.nodes.find(e.src);
    auto dst = m.nodes.find(e.dst);
    if (src == m.nodes.end()) out.push_back({"unknown-node", where, e.src});
    if (dst == m.nodes.end()) out.push_back({"unknown-node", where, e.dst});
    detail::check_atoms(m, SymbolicState{{e.op}}, where, true, out);
    detail::check_atoms(m, e.add, where, false, out);
    detail::check_atoms(m, e.del, where, false, out);
    std::vector<GroundAtom> overlap;
    std::set_intersection(e.add.atoms.begin(), e.add.atoms.end(), e.del.atoms.begin(),
                          e.del.atoms.end(), std::back_inserter(overlap));
    if (!overlap.empty()) out.push_back({"add-del-overlap", where, to_string(overlap[0])});
    if (src != m.nodes.end() && dst != m.nodes.end()) {
      if (apply_edge(src->second, e) != dst->second)
        out.push_back({"effect-law", where, "dst != (src - del) + add"});
    }
    has_incoming.insert(e.dst);
  }

  std::vector<std::string> entry_nodes;
  for (const auto& [id, cond] : m.nodes)
    if (!has_incoming.count(id)) entry_nodes.push_back(id);
  if (entry_nodes.size() != 1 ||
      (m.nodes.count(m.initial) && entry_nodes[0] != m.initial))
    out.push_back({"initial", "machine", "expected exactly one entry node, the initial"});

  // Goal reachability by BFS over edges.
  if (m.nodes.count(m.initial) && m.nodes.count(m.goal)) {
    std::set<std::string> visited{m.initial};
    std::vector<std::string> frontier{m.initial};
    while (!frontier.empty()) {
      std::string cur = frontier.back();
      frontier.pop_back();
      for (const Edge& e : m.edges)
        if (e.src == cur && visited.insert(e.dst).second) frontier.push_back(e.dst);
    }
    if (!visited.count(m.goal))
      out.push_back({"unreachable-goal", "machine", m.goal});
  }
  return out;
}

// All simple initial->goal paths in lexicographic order of their node-id
// sequences. The AND-any-order structure is a cycle between sibling nodes;
// simple paths linearize it into the two orderings.
inline std::vector<std::vector<std::string>> enumerate_paths(const StateMachine& m,
                                                             std::size_t cap = 64) {
  std::vector<std::vector<std::string>> paths;
  std::vector<std::string> stack{m.initial};
  std::set<std::string> on_path{m.initial};

  auto successors = [&](const std::string& id) {
    std::set<std::string> next;
    for (const Edge& e : m.edges)
      if (e.src == id) next.insert(e.dst);
    return next;
  };

  std::function<void(const std::string&)> dfs = [&](const std::string& cur) {
    if (cur == m.goal) {
      if (paths.size() == cap) throw PathExplosionError(cap);
      paths.push_back(stack);
      return;
    }
    for (const std::string& next : successors(cur)) {
      if (on_path.count(next)) continue;
      stack.push_back(next);
      on_path.insert(next);
      dfs(next);
      on_path.erase(next);
      stack.pop_back();
    }
  };
  dfs(m.initial);
  return paths;
}

// Shortest initial->goal path (unit costs, lexicographic tie-break on the
// node-id sequence) rendered as (node, outgoing operator) steps.
inline PlanSkeleton plan_skeleton(const StateMachine& m) {
  auto paths = enumerate_paths(m);
  if (paths.empty()) throw NoPlanError();
  const std::vector<std::string>* best = &paths[0];
  for (const auto& p : paths) {
    if (p.size() < best->size() || (p.size() == best->size() && p < *best)) best = &p;
  }
  PlanSkeleton plan;
  for (std::size_t i = 0; i + 1 < best->size(); ++i) {
    const GroundAtom* op = nullptr;
    for (const Edge& e : m.edges) {
      if (e.src == (*best)[i] && e.dst == (*best)[i + 1]) {
        if (!op || e.op < *op) op = &e.op;  // parallel edges: smallest op wins
      }
    }
    plan.steps.push_back({(*best)[i], *op});
  }
  plan.goal = best->back();
  return plan;
}

}  // namespace abil

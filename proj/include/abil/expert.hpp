#pragma once
// Scripted expert. Executes a machine's plan skeleton with A* navigation
// over (cell, direction) states. Along each leg the ground truth of the
// machine's tracked atoms must match the current node exactly (closed
// world), so recorded demonstrations induce zero-cost abductions; navigation
// therefore treats any state that flips a tracked atom early as forbidden,
// and terminal stances are validated one interaction ahead.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "abil/gridworld.hpp"
#include "abil/kb.hpp"
#include "abil/symbolic.hpp"

namespace abil {

struct NoExpertPlanError : std::runtime_error {
  explicit NoExpertPlanError(const std::string& why)
      : std::runtime_error("expert found no plan: " + why) {}
};

struct Trajectory {
  std::string task;
  std::uint64_t seed = 0;
  RoleBinding binding;
  SymbolicState goal;
  std::vector<EnvState> states;  // length = actions + 1
  std::vector<Action> actions;
  bool operator==(const Trajectory&) const = default;
};

struct Dataset {
  std::vector<Trajectory> trajectories;
  bool operator==(const Dataset&) const = default;
};

namespace expertdetail {

inline std::vector<bool> truth_vector(const EnvState& s, const std::vector<GroundAtom>& atoms) {
  std::vector<bool> v;
  v.reserve(atoms.size());
  for (const GroundAtom& a : atoms) v.push_back(oracle_atom(s, a));
  return v;
}

inline std::vector<bool> node_vector(const SymbolicState& node,
                                     const std::vector<GroundAtom>& atoms) {
  std::vector<bool> v;
  v.reserve(atoms.size());
  for (const GroundAtom& a : atoms) v.push_back(node.contains(a));
  return v;
}

struct NavQuery {
  const std::vector<GroundAtom>* tracked = nullptr;
  std::vector<bool> during;       // required truth vector while en route
  std::vector<bool> at_terminal;  // required truth vector at the last state
  int goal_x = 0;                 // heuristic anchor
  int goal_y = 0;
  int slack = 1;  // stand next to the anchor (1) or one cell out (2)
  std::optional<Action> post;     // interaction applied at the terminal
  std::vector<bool> after_post;   // required truth vector after it
};

// Geometric terminal test supplied per operator.
using TerminalPred = bool (*)(const EnvState&, int tx, int ty);

inline bool facing_cell(const EnvState& s, int tx, int ty) {
  auto [fx, fy] = s.front_cell();
  return fx == tx && fy == ty;
}

inline bool drop_stance(const EnvState& s, int bx, int by) {
  auto [fx, fy] = s.front_cell();
  if (!s.free_floor(fx, fy)) return false;
  return std::abs(fx - bx) + std::abs(fy - by) == 1;
}

// Uniform-cost A* over (x, y, dir). Returns the action sequence reaching an
// accepted terminal, leaving ties to (f, insertion order) so plans are
// reproducible run to run.
inline std::optional<std::vector<Action>> navigate(const EnvState& start, const NavQuery& q,
                                                   TerminalPred terminal) {
  const int W = start.width, H = start.height;
  const int n_states = W * H * 4;
  auto index = [&](int x, int y, int d) { return (y * W + x) * 4 + d; };

  EnvState scratch = start;
  auto pose_state = [&](int x, int y, int d) -> const EnvState& {
    scratch.agent_x = x;
    scratch.agent_y = y;
    scratch.agent_dir = static_cast<Dir>(d);
    if (scratch.carrying >= 0) {
      GridObject& held = scratch.objects[static_cast<std::size_t>(scratch.carrying)];
      held.x = x;
      held.y = y;
    }
    return scratch;
  };

  auto accepted = [&](const EnvState& s) {
    if (!terminal(s, q.goal_x, q.goal_y)) return false;
    if (truth_vector(s, *q.tracked) != q.at_terminal) return false;
    if (q.post) {
      EnvState after = step(s, *q.post);
      if (truth_vector(after, *q.tracked) != q.after_post) return false;
    }
    return true;
  };

  auto heuristic = [&](int x, int y) {
    int d = std::abs(x - q.goal_x) + std::abs(y - q.goal_y) - q.slack;
    return d > 0 ? d : 0;
  };

  std::vector<int> dist(static_cast<std::size_t>(n_states), -1);
  std::vector<int> parent(static_cast<std::size_t>(n_states), -1);
  std::vector<Action> arrival(static_cast<std::size_t>(n_states), Action::Forward);

  struct QEntry {
    int f;
    long seq;
    int g;
    int state;
    bool operator>(const QEntry& o) const {
      return f != o.f ? f > o.f : seq > o.seq;
    }
  };
  std::priority_queue<QEntry, std::vector<QEntry>, std::greater<QEntry>> queue;
  long seq = 0;

  int start_idx = index(start.agent_x, start.agent_y, static_cast<int>(start.agent_dir));
  dist[static_cast<std::size_t>(start_idx)] = 0;
  queue.push({heuristic(start.agent_x, start.agent_y), seq++, 0, start_idx});

  while (!queue.empty()) {
    QEntry e = queue.top();
    queue.pop();
    int x = e.state / 4 % W, y = e.state / 4 / W, d = e.state % 4;
    if (e.g != dist[static_cast<std::size_t>(e.state)]) continue;  // stale entry

    const EnvState& here = pose_state(x, y, d);
    if (accepted(here)) {
      std::vector<Action> actions;
      for (int at = e.state; at != start_idx; at = parent[static_cast<std::size_t>(at)])
        actions.push_back(arrival[static_cast<std::size_t>(at)]);
      std::reverse(actions.begin(), actions.end());
      return actions;
    }
    // States off the current node's truth vector are unusable waypoints.
    if (e.state != start_idx && truth_vector(here, *q.tracked) != q.during) continue;

    for (Action a : {Action::TurnLeft, Action::TurnRight, Action::Forward}) {
      int nx = x, ny = y, nd = d;
      if (a == Action::TurnLeft) {
        nd = (d + 3) % 4;
      } else if (a == Action::TurnRight) {
        nd = (d + 1) % 4;
      } else {
        nx = x + kDx[d];
        ny = y + kDy[d];
        if (!here.passable(nx, ny)) continue;
      }
      int ni = index(nx, ny, nd);
      int ng = e.g + 1;
      if (dist[static_cast<std::size_t>(ni)] >= 0 && dist[static_cast<std::size_t>(ni)] <= ng)
        continue;
      dist[static_cast<std::size_t>(ni)] = ng;
      parent[static_cast<std::size_t>(ni)] = e.state;
      arrival[static_cast<std::size_t>(ni)] = a;
      queue.push({ng + heuristic(nx, ny), seq++, ng, ni});
    }
  }
  return std::nullopt;
}

}  // namespace expertdetail

// Plan a full action sequence for the instance using the task's (unbound)
// machine. Supported operators: goto, pick, open, put. An already satisfied
// goal yields an empty plan.
inline std::vector<Action> solve(const TaskInstance& instance, const StateMachine& machine) {
  using namespace expertdetail;
  if (goal_satisfied(instance.state)) return {};

  StateMachine bound = bind_roles(machine, instance.binding);
  PlanSkeleton skel = plan_skeleton(bound);
  SymbolicState tracked_set = tracked_atoms(bound);
  const std::vector<GroundAtom>& tracked = tracked_set.atoms;

  auto node_vec = [&](const std::string& id) {
    return node_vector(bound.nodes.at(id), tracked);
  };
  auto next_node = [&](std::size_t k) {
    return k + 1 < skel.steps.size() ? skel.steps[k + 1].node : skel.goal;
  };

  EnvState sim = instance.state;
  std::vector<Action> plan;

  auto run_action = [&](Action a, const std::vector<bool>& want, const char* what) {
    sim = step(sim, a);
    plan.push_back(a);
    if (truth_vector(sim, tracked) != want)
      throw NoExpertPlanError(std::string(what) + " left unexpected symbolic state");
  };

  for (std::size_t k = 0; k < skel.steps.size(); ++k) {
    const PlanSkeleton::Step& st = skel.steps[k];
    const std::string& op = st.op.pred;
    auto arg_obj = [&](std::size_t i) -> const GridObject& {
      return sim.objects[static_cast<std::size_t>(st.op.args.at(i).id)];
    };

    if (op == "goto") {
      const GridObject& target = arg_obj(0);
      NavQuery q;
      q.tracked = &tracked;
      q.during = node_vec(st.node);
      q.at_terminal = node_vec(next_node(k));
      q.goal_x = target.x;
      q.goal_y = target.y;
      q.slack = 1;
      // Validate the stance through the following interaction, so e.g. a
      // pick spot that would flip a relation one step later is rejected.
      if (k + 1 < skel.steps.size()) {
        const std::string& after = skel.steps[k + 1].op.pred;
        if (after == "pick" || after == "open") {
          q.post = after == "pick" ? Action::Pickup : Action::Toggle;
          q.after_post = node_vec(next_node(k + 1));
        }
      }
      auto nav = navigate(sim, q, facing_cell);
      if (!nav) throw NoExpertPlanError("goto " + to_string(st.op.args[0]));
      for (Action a : *nav) {
        sim = step(sim, a);
        plan.push_back(a);
      }
      if (truth_vector(sim, tracked) != q.at_terminal)
        throw NoExpertPlanError("goto terminal off its node");
    } else if (op == "pick") {
      run_action(Action::Pickup, node_vec(next_node(k)), "pick");
    } else if (op == "open") {
      run_action(Action::Toggle, node_vec(next_node(k)), "open");
    } else if (op == "put") {
      const GridObject& box = arg_obj(1);
      NavQuery q;
      q.tracked = &tracked;
      q.during = node_vec(st.node);
      q.at_terminal = node_vec(st.node);  // still carrying at the stance
      q.goal_x = box.x;
      q.goal_y = box.y;
      q.slack = 2;
      q.post = Action::Drop;
      q.after_post = node_vec(next_node(k));
      auto nav = navigate(sim, q, drop_stance);
      if (!nav) throw NoExpertPlanError("put stance near " + to_string(st.op.args[1]));
      for (Action a : *nav) {
        sim = step(sim, a);
        plan.push_back(a);
      }
      run_action(Action::Drop, node_vec(next_node(k)), "put");
    } else {
      throw NoExpertPlanError("unsupported operator " + op);
    }
  }

  if (!goal_satisfied(sim)) throw NoExpertPlanError("plan finished off goal");
  if (static_cast<int>(plan.size()) > instance.state.horizon)
    throw NoExpertPlanError("plan exceeds horizon");
  return plan;
}

// Demonstrations for seeds base_seed .. base_seed + n - 1.
inline Dataset generate_dataset(const TaskConfig& cfg, const StateMachine& machine, int n,
                                std::uint64_t base_seed) {
  Dataset out;
  out.trajectories.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
    TaskInstance inst = make_instance(cfg, seed);
    std::vector<Action> actions = solve(inst, machine);
    Trajectory traj;
    traj.task = task_name(cfg.task);
    traj.seed = seed;
    traj.binding = inst.binding;
    traj.goal = inst.state.goal;
    traj.states.reserve(actions.size() + 1);
    traj.states.push_back(inst.state);
    for (Action a : actions) traj.states.push_back(step(traj.states.back(), a));
    traj.actions = std::move(actions);
    out.trajectories.push_back(std::move(traj));
  }
  return out;
}

}  // namespace abil

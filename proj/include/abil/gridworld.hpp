#pragma once
// Deterministic gridworld benchmark. Cells are (x, y) with y growing downward
// and a ring of border walls; door tasks add a dividing wall whose doors are
// the only openings. All transition and oracle logic is pure: step() returns
// a fresh state and never mutates its input.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "abil/kb.hpp"
#include "abil/rng.hpp"
#include "abil/symbolic.hpp"

namespace abil {

enum class Action { TurnLeft = 0, TurnRight = 1, Forward = 2, Pickup = 3, Drop = 4, Toggle = 5 };
constexpr int kNumActions = 6;

enum class Dir { North = 0, East = 1, South = 2, West = 3 };
constexpr int kDx[4] = {0, 1, 0, -1};
constexpr int kDy[4] = {-1, 0, 1, 0};

enum class Kind { Key = 0, Ball = 1, Box = 2, Door = 3 };
enum class Color { Red = 0, Green = 1, Blue = 2, Purple = 3, Yellow = 4, Grey = 5 };
enum class DoorState { Open = 0, Closed = 1, Locked = 2 };

constexpr int kNumKinds = 4;
constexpr int kNumColors = 6;

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Key: return "key";
    case Kind::Ball: return "ball";
    case Kind::Box: return "box";
    default: return "door";
  }
}

inline const char* color_name(Color c) {
  switch (c) {
    case Color::Red: return "red";
    case Color::Green: return "green";
    case Color::Blue: return "blue";
    case Color::Purple: return "purple";
    case Color::Yellow: return "yellow";
    default: return "grey";
  }
}

struct GridObject {
  int id = -1;
  Kind kind = Kind::Key;
  Color color = Color::Red;
  int x = 0;
  int y = 0;
  DoorState door = DoorState::Closed;  // doors only
  bool carried = false;
  bool operator==(const GridObject&) const = default;
};

struct HorizonError : std::runtime_error {
  HorizonError() : std::runtime_error("episode stepped past its horizon") {}
};

struct UnknownPredicateError : std::runtime_error {
  explicit UnknownPredicateError(const std::string& what)
      : std::runtime_error("oracle has no predicate " + what) {}
};

struct PlacementError : std::runtime_error {
  explicit PlacementError(const std::string& why)
      : std::runtime_error("generator could not place episode: " + why) {}
};

struct EnvState {
  int width = 8;
  int height = 8;
  std::vector<unsigned char> wall;  // width*height mask; doors sit on wall cells
  std::vector<GridObject> objects;  // index == object id
  int agent_x = 1;
  int agent_y = 1;
  Dir agent_dir = Dir::East;
  int carrying = -1;  // object id or -1
  SymbolicState goal;
  int step_count = 0;
  int horizon = 64;
  bool operator==(const EnvState&) const = default;

  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  bool is_wall(int x, int y) const { return wall[static_cast<std::size_t>(y) * width + x] != 0; }

  // Non-carried object occupying the cell, or -1. Carried objects share the
  // agent's cell and never block anything.
  int object_at(int x, int y) const {
    for (const GridObject& o : objects)
      if (!o.carried && o.x == x && o.y == y) return o.id;
    return -1;
  }

  int door_at(int x, int y) const {
    int id = object_at(x, y);
    return id >= 0 && objects[static_cast<std::size_t>(id)].kind == Kind::Door ? id : -1;
  }

  std::pair<int, int> front_cell() const {
    int d = static_cast<int>(agent_dir);
    return {agent_x + kDx[d], agent_y + kDy[d]};
  }

  // Cell an agent (or a carried object being dropped) can occupy.
  bool free_floor(int x, int y) const {
    return in_bounds(x, y) && !is_wall(x, y) && object_at(x, y) < 0;
  }

  // Cell the agent may move into: open doors make their wall cell passable.
  bool passable(int x, int y) const {
    if (!in_bounds(x, y)) return false;
    int door = door_at(x, y);
    if (door >= 0) return objects[static_cast<std::size_t>(door)].door == DoorState::Open;
    return !is_wall(x, y) && object_at(x, y) < 0;
  }
};

// One environment tick. Blocked moves and inapplicable interactions are
// no-ops that still consume a step.
inline EnvState step(const EnvState& state, Action action) {
  if (state.step_count >= state.horizon) throw HorizonError();
  EnvState s = state;
  s.step_count += 1;
  auto [fx, fy] = s.front_cell();

  switch (action) {
    case Action::TurnLeft:
      s.agent_dir = static_cast<Dir>((static_cast<int>(s.agent_dir) + 3) % 4);
      break;
    case Action::TurnRight:
      s.agent_dir = static_cast<Dir>((static_cast<int>(s.agent_dir) + 1) % 4);
      break;
    case Action::Forward:
      if (s.passable(fx, fy)) {
        s.agent_x = fx;
        s.agent_y = fy;
        if (s.carrying >= 0) {
          s.objects[static_cast<std::size_t>(s.carrying)].x = fx;
          s.objects[static_cast<std::size_t>(s.carrying)].y = fy;
        }
      }
      break;
    case Action::Pickup: {
      int id = s.object_at(fx, fy);
      if (s.carrying < 0 && id >= 0 && s.objects[static_cast<std::size_t>(id)].kind != Kind::Door) {
        GridObject& o = s.objects[static_cast<std::size_t>(id)];
        o.carried = true;
        o.x = s.agent_x;
        o.y = s.agent_y;
        s.carrying = id;
      }
      break;
    }
    case Action::Drop:
      if (s.carrying >= 0 && s.free_floor(fx, fy)) {
        GridObject& o = s.objects[static_cast<std::size_t>(s.carrying)];
        o.carried = false;
        o.x = fx;
        o.y = fy;
        s.carrying = -1;
      }
      break;
    case Action::Toggle: {
      int id = s.door_at(fx, fy);
      if (id < 0) break;
      GridObject& door = s.objects[static_cast<std::size_t>(id)];
      if (door.door == DoorState::Open) {
        door.door = DoorState::Closed;
      } else if (door.door == DoorState::Closed) {
        door.door = DoorState::Open;
      } else if (s.carrying >= 0) {
        const GridObject& held = s.objects[static_cast<std::size_t>(s.carrying)];
        if (held.kind == Kind::Key && held.color == door.color) door.door = DoorState::Open;
      }
      break;
    }
  }
  return s;
}

namespace griddetail {

inline bool color_pred(const std::string& name, Color* out) {
  for (int c = 0; c < kNumColors; ++c) {
    if (name == std::string("is-") + color_name(static_cast<Color>(c))) {
      *out = static_cast<Color>(c);
      return true;
    }
  }
  return false;
}

inline bool kind_pred(const std::string& name, Kind* out) {
  for (int k = 0; k < kNumKinds; ++k) {
    if (name == std::string("is-") + kind_name(static_cast<Kind>(k))) {
      *out = static_cast<Kind>(k);
      return true;
    }
  }
  return false;
}

}  // namespace griddetail

// Ground truth for one atom. Unary: facing, holding, is-open, is-locked and
// the is-<color>/is-<kind> family; binary: next-to (unit Manhattan distance,
// carried objects measured at the agent's cell).
inline bool oracle_atom(const EnvState& s, const GroundAtom& atom) {
  auto object_of = [&](const ObjectRef& r) -> const GridObject& {
    if (!r.bound() || r.id >= static_cast<int>(s.objects.size()))
      throw UnknownPredicateError("argument " + to_string(r) + " of " + to_string(atom));
    return s.objects[static_cast<std::size_t>(r.id)];
  };

  if (atom.pred == "next-to") {
    if (atom.args.size() != 2) throw UnknownPredicateError(to_string(atom));
    const GridObject& a = object_of(atom.args[0]);
    const GridObject& b = object_of(atom.args[1]);
    int dist = std::abs(a.x - b.x) + std::abs(a.y - b.y);
    return dist == 1;
  }
  if (atom.args.size() != 1) throw UnknownPredicateError(to_string(atom));
  const GridObject& o = object_of(atom.args[0]);
  if (atom.pred == "facing") {
    auto [fx, fy] = s.front_cell();
    return !o.carried && o.x == fx && o.y == fy;
  }
  if (atom.pred == "holding") return s.carrying == o.id;
  if (atom.pred == "is-open") return o.kind == Kind::Door && o.door == DoorState::Open;
  if (atom.pred == "is-locked") return o.kind == Kind::Door && o.door == DoorState::Locked;
  Color c;
  if (griddetail::color_pred(atom.pred, &c)) return o.color == c;
  Kind k;
  if (griddetail::kind_pred(atom.pred, &k)) return o.kind == k;
  throw UnknownPredicateError(atom.pred);
}

// Truth map restricted to the given atoms.
inline std::map<GroundAtom, bool> oracle_truth(const EnvState& s, const SymbolicState& atoms) {
  std::map<GroundAtom, bool> out;
  for (const GroundAtom& a : atoms.atoms) out[a] = oracle_atom(s, a);
  return out;
}

// Full vocabulary grounded over every object (and ordered pair for next-to).
inline std::map<GroundAtom, bool> oracle_atoms(const EnvState& s) {
  std::map<GroundAtom, bool> out;
  std::vector<std::string> unary = {"facing", "holding", "is-open", "is-locked"};
  for (int c = 0; c < kNumColors; ++c)
    unary.push_back(std::string("is-") + color_name(static_cast<Color>(c)));
  for (int k = 0; k < kNumKinds; ++k)
    unary.push_back(std::string("is-") + kind_name(static_cast<Kind>(k)));
  for (const GridObject& o : s.objects) {
    for (const std::string& pred : unary) {
      GroundAtom a{pred, {obj(o.id)}};
      out[a] = oracle_atom(s, a);
    }
    for (const GridObject& other : s.objects) {
      if (o.id == other.id) continue;
      GroundAtom a{"next-to", {obj(o.id), obj(other.id)}};
      out[a] = oracle_atom(s, a);
    }
  }
  return out;
}

inline bool goal_satisfied(const EnvState& s) {
  for (const GroundAtom& a : s.goal.atoms)
    if (!oracle_atom(s, a)) return false;
  return true;
}

enum class Task { Goto = 0, GotoSingle, Pickup, Open, Put, Unlock };
enum class Split { Basic = 0, Gen };

inline const char* task_name(Task t) {
  switch (t) {
    case Task::Goto: return "goto";
    case Task::GotoSingle: return "goto_single";
    case Task::Pickup: return "pickup";
    case Task::Open: return "open";
    case Task::Put: return "put";
    default: return "unlock";
  }
}

inline Task parse_task(const std::string& name) {
  for (Task t : {Task::Goto, Task::GotoSingle, Task::Pickup, Task::Open, Task::Put,
                 Task::Unlock})
    if (name == task_name(t)) return t;
  throw std::runtime_error("unknown task: " + name);
}

// goto_single shares the goto machine; every other task has its own file.
inline std::string task_kb_name(Task t) {
  return t == Task::GotoSingle ? "goto" : task_name(t);
}

struct TaskConfig {
  Task task = Task::Goto;
  Split split = Split::Basic;
  int width = 8;
  int height = 8;
  int n_objects = 4;  // total floor objects, targets included
  int n_doors = 0;
  int horizon = 64;
};

// Benchmark defaults: 4 objects or 4 doors in the basic split, 8 in the
// generalization split (whose distractors draw from held-out colors). The
// dividing wall grows for the 8-door split so every door fits.
inline TaskConfig task_config(Task task, Split split) {
  TaskConfig cfg;
  cfg.task = task;
  cfg.split = split;
  bool gen = split == Split::Gen;
  switch (task) {
    case Task::Goto:
    case Task::Pickup:
    case Task::Put:
      cfg.n_objects = gen ? 8 : 4;
      break;
    case Task::GotoSingle:
      cfg.n_objects = 1;
      break;
    case Task::Open:
      cfg.n_objects = 0;
      cfg.n_doors = gen ? 8 : 4;
      break;
    case Task::Unlock:
      cfg.n_objects = 1;  // the matching key
      cfg.n_doors = gen ? 8 : 4;
      break;
  }
  if (cfg.n_doors > 0) cfg.height = cfg.n_doors + 2 > 8 ? cfg.n_doors + 4 : 8;
  return cfg;
}

struct TaskInstance {
  EnvState state;
  RoleBinding binding;
  Task task = Task::Goto;
  Split split = Split::Basic;
};

namespace griddetail {

struct Placement {
  Kind kind;
  Color color;
};

// Distractors may never share (kind, color) with a target, otherwise the
// goal description would be ambiguous.
inline Placement draw_distractor(Rng& rng, Split split,
                                 const std::vector<Placement>& targets) {
  std::vector<Color> pool = split == Split::Gen
                                ? std::vector<Color>{Color::Yellow, Color::Grey}
                                : std::vector<Color>{Color::Red, Color::Green, Color::Blue,
                                                     Color::Purple};
  for (int tries = 0; tries < 64; ++tries) {
    Placement p{static_cast<Kind>(rng.uniform_int(0, 2)), rng.pick(pool)};
    bool clash = false;
    for (const Placement& t : targets)
      clash = clash || (t.kind == p.kind && t.color == p.color);
    if (!clash) return p;
  }
  throw PlacementError("distractor attribute draw exhausted");
}

inline Color draw_door_color(Rng& rng, Split split) {
  std::vector<Color> pool = split == Split::Gen
                                ? std::vector<Color>{Color::Yellow, Color::Grey}
                                : std::vector<Color>{Color::Green, Color::Blue, Color::Purple};
  return rng.pick(pool);
}

inline std::vector<std::pair<int, int>> reachable_cells(const EnvState& s) {
  std::vector<unsigned char> seen(static_cast<std::size_t>(s.width * s.height), 0);
  std::vector<std::pair<int, int>> frontier{{s.agent_x, s.agent_y}}, out;
  seen[static_cast<std::size_t>(s.agent_y) * s.width + s.agent_x] = 1;
  while (!frontier.empty()) {
    auto [x, y] = frontier.back();
    frontier.pop_back();
    out.emplace_back(x, y);
    for (int d = 0; d < 4; ++d) {
      int nx = x + kDx[d], ny = y + kDy[d];
      if (!s.in_bounds(nx, ny)) continue;
      std::size_t idx = static_cast<std::size_t>(ny) * s.width + nx;
      if (seen[idx]) continue;
      if (!s.passable(nx, ny)) continue;
      seen[idx] = 1;
      frontier.emplace_back(nx, ny);
    }
  }
  return out;
}

inline bool is_reachable(const std::vector<std::pair<int, int>>& cells, int x, int y) {
  for (auto [cx, cy] : cells)
    if (cx == x && cy == y) return true;
  return false;
}

// Some free cell adjacent to (x, y) is reachable, so the agent can stand
// there and face the object.
inline bool approachable(const EnvState& s, const std::vector<std::pair<int, int>>& reach,
                         int x, int y) {
  for (int d = 0; d < 4; ++d) {
    int nx = x + kDx[d], ny = y + kDy[d];
    if (s.free_floor(nx, ny) && is_reachable(reach, nx, ny)) return true;
  }
  return false;
}

}  // namespace griddetail

// Deterministic episode generator. The same (config, seed) always yields the
// same instance; internal retries consume the same seeded stream. Guarantees
// at reset: the goal is not yet satisfied, no tracked relation (facing the
// targets, holding, open, next-to targets) holds, and the task is solvable.
inline TaskInstance make_instance(const TaskConfig& cfg, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0xab11));

  for (int attempt = 0; attempt < 256; ++attempt) {
    EnvState s;
    s.width = cfg.width;
    s.height = cfg.height;
    s.horizon = cfg.horizon;
    s.wall.assign(static_cast<std::size_t>(s.width * s.height), 0);
    for (int x = 0; x < s.width; ++x) {
      s.wall[static_cast<std::size_t>(x)] = 1;
      s.wall[static_cast<std::size_t>(s.height - 1) * s.width + x] = 1;
    }
    for (int y = 0; y < s.height; ++y) {
      s.wall[static_cast<std::size_t>(y) * s.width] = 1;
      s.wall[static_cast<std::size_t>(y) * s.width + s.width - 1] = 1;
    }

    bool door_task = cfg.n_doors > 0;
    int wall_x = s.width / 2;
    if (door_task)
      for (int y = 1; y < s.height - 1; ++y)
        s.wall[static_cast<std::size_t>(y) * s.width + wall_x] = 1;

    auto add_object = [&](Kind kind, Color color, int x, int y, DoorState door) {
      GridObject o;
      o.id = static_cast<int>(s.objects.size());
      o.kind = kind;
      o.color = color;
      o.x = x;
      o.y = y;
      o.door = door;
      s.objects.push_back(o);
      return o.id;
    };

    int target_door = -1;
    if (door_task) {
      std::vector<int> ys;
      for (int y = 1; y < s.height - 1; ++y) ys.push_back(y);
      rng.shuffle(ys);
      int target_slot = rng.uniform_int(0, cfg.n_doors - 1);
      for (int i = 0; i < cfg.n_doors; ++i) {
        bool is_target = i == target_slot;
        Color color = is_target ? Color::Red : griddetail::draw_door_color(rng, cfg.split);
        DoorState st = DoorState::Closed;
        if (is_target && cfg.task == Task::Unlock) st = DoorState::Locked;
        int id = add_object(Kind::Door, color, wall_x, ys[static_cast<std::size_t>(i)], st);
        if (is_target) target_door = id;
      }
    }

    // Floor cells objects may occupy: the whole interior for single-room
    // tasks, the agent-side room minus every door's approach cell otherwise.
    std::vector<std::pair<int, int>> floor;
    for (int y = 1; y < s.height - 1; ++y) {
      for (int x = 1; x < (door_task ? wall_x : s.width - 1); ++x) {
        bool blocked = false;
        if (door_task && x == wall_x - 1)
          for (const GridObject& o : s.objects) blocked = blocked || o.y == y;
        if (!blocked) floor.emplace_back(x, y);
      }
    }

    auto take_cell = [&](const std::vector<std::pair<int, int>>& allowed) {
      std::vector<std::pair<int, int>> open;
      for (auto [x, y] : allowed)
        if (s.object_at(x, y) < 0) open.emplace_back(x, y);
      if (open.empty()) return std::pair<int, int>{-1, -1};
      return open[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(open.size()) - 1))];
    };

    std::vector<griddetail::Placement> targets;
    int target_a = -1, target_b = -1;  // task-specific principal objects
    bool failed = false;

    switch (cfg.task) {
      case Task::Goto:
      case Task::GotoSingle: {
        auto [x, y] = take_cell(floor);
        if (x < 0) { failed = true; break; }
        target_a = add_object(Kind::Box, Color::Red, x, y, DoorState::Closed);
        targets.push_back({Kind::Box, Color::Red});
        break;
      }
      case Task::Pickup: {
        auto [x, y] = take_cell(floor);
        if (x < 0) { failed = true; break; }
        target_a = add_object(Kind::Key, Color::Red, x, y, DoorState::Closed);
        targets.push_back({Kind::Key, Color::Red});
        break;
      }
      case Task::Put: {
        auto [bx, by] = take_cell(floor);
        if (bx < 0) { failed = true; break; }
        target_a = add_object(Kind::Ball, Color::Red, bx, by, DoorState::Closed);
        targets.push_back({Kind::Ball, Color::Red});
        std::vector<std::pair<int, int>> apart;
        for (auto [x, y] : floor)
          if (std::abs(x - bx) + std::abs(y - by) >= 2) apart.emplace_back(x, y);
        auto [cx, cy] = take_cell(apart);
        if (cx < 0) { failed = true; break; }
        target_b = add_object(Kind::Box, Color::Green, cx, cy, DoorState::Closed);
        targets.push_back({Kind::Box, Color::Green});
        break;
      }
      case Task::Unlock: {
        auto [x, y] = take_cell(floor);
        if (x < 0) { failed = true; break; }
        target_a = add_object(Kind::Key, Color::Red, x, y, DoorState::Closed);
        targets.push_back({Kind::Key, Color::Red});
        break;
      }
      case Task::Open:
        break;
    }
    if (failed) continue;

    int placed_targets = static_cast<int>(targets.size());
    for (int i = placed_targets; i < cfg.n_objects; ++i) {
      griddetail::Placement p = griddetail::draw_distractor(rng, cfg.split, targets);
      // keep every target's neighborhood open so it stays approachable
      std::vector<std::pair<int, int>> allowed;
      for (auto [x, y] : floor) {
        bool near_target = false;
        for (int id : {target_a, target_b}) {
          if (id < 0) continue;
          const GridObject& t = s.objects[static_cast<std::size_t>(id)];
          near_target = near_target || std::abs(x - t.x) + std::abs(y - t.y) <= 1;
        }
        if (!near_target) allowed.emplace_back(x, y);
      }
      auto [x, y] = take_cell(allowed);
      if (x < 0) { failed = true; break; }
      add_object(p.kind, p.color, x, y, DoorState::Closed);
    }
    if (failed) continue;

    // Agent spawn: free cell, never initially facing an object or a door.
    {
      std::vector<std::pair<int, int>> spawn_cells;
      for (auto [x, y] : floor)
        if (s.object_at(x, y) < 0) spawn_cells.emplace_back(x, y);
      rng.shuffle(spawn_cells);
      bool placed = false;
      for (auto [x, y] : spawn_cells) {
        std::vector<int> dirs = {0, 1, 2, 3};
        rng.shuffle(dirs);
        for (int d : dirs) {
          if (s.object_at(x + kDx[d], y + kDy[d]) < 0) {
            s.agent_x = x;
            s.agent_y = y;
            s.agent_dir = static_cast<Dir>(d);
            placed = true;
            break;
          }
        }
        if (placed) break;
      }
      if (!placed) continue;
    }

    // Solvability probe.
    auto reach = griddetail::reachable_cells(s);
    auto obj_ok = [&](int id) {
      const GridObject& o = s.objects[static_cast<std::size_t>(id)];
      return griddetail::approachable(s, reach, o.x, o.y);
    };
    bool ok = true;
    RoleBinding binding;
    SymbolicState goal;
    switch (cfg.task) {
      case Task::Goto:
      case Task::GotoSingle:
        ok = obj_ok(target_a);
        goal = SymbolicState{{GroundAtom{"facing", {obj(target_a)}}}};
        binding["target"] = {target_a, "box"};
        break;
      case Task::Pickup:
        ok = obj_ok(target_a);
        goal = SymbolicState{{GroundAtom{"holding", {obj(target_a)}}}};
        binding["key"] = {target_a, "key"};
        break;
      case Task::Put: {
        const GridObject& ball = s.objects[static_cast<std::size_t>(target_a)];
        const GridObject& box = s.objects[static_cast<std::size_t>(target_b)];
        // While carrying the ball the agent must avoid box-adjacent cells
        // (they would satisfy the goal early), so connectivity of the carry
        // leg is checked on the constrained graph: the ball's own cell is
        // free once carried, box neighbors are off limits.
        auto carry_free = [&](int x, int y) {
          if (std::abs(x - box.x) + std::abs(y - box.y) <= 1) return false;
          return s.free_floor(x, y) || (x == ball.x && y == ball.y);
        };
        // Multi-source BFS from every usable pick stance.
        std::vector<unsigned char> seen(static_cast<std::size_t>(s.width * s.height), 0);
        std::vector<std::pair<int, int>> frontier;
        for (int d = 0; d < 4; ++d) {
          int nx = ball.x + kDx[d], ny = ball.y + kDy[d];
          if (!s.free_floor(nx, ny) || !griddetail::is_reachable(reach, nx, ny)) continue;
          if (!carry_free(nx, ny)) continue;
          seen[static_cast<std::size_t>(ny) * s.width + nx] = 1;
          frontier.emplace_back(nx, ny);
        }
        bool pick_ok = !frontier.empty();
        while (!frontier.empty()) {
          auto [x, y] = frontier.back();
          frontier.pop_back();
          for (int d = 0; d < 4; ++d) {
            int nx = x + kDx[d], ny = y + kDy[d];
            if (!s.in_bounds(nx, ny) || !carry_free(nx, ny)) continue;
            std::size_t idx = static_cast<std::size_t>(ny) * s.width + nx;
            if (!seen[idx]) {
              seen[idx] = 1;
              frontier.emplace_back(nx, ny);
            }
          }
        }
        // Drop stance: carry-reachable cell whose front neighbor is a free
        // drop cell adjacent to the box.
        bool drop_ok = false;
        for (int d = 0; d < 4 && !drop_ok; ++d) {
          int cx = box.x + kDx[d], cy = box.y + kDy[d];
          bool cell_free = s.free_floor(cx, cy) ||
                           (cx == ball.x && cy == ball.y);  // frees up once carried
          if (!cell_free) continue;
          for (int e = 0; e < 4; ++e) {
            int sx = cx + kDx[e], sy = cy + kDy[e];
            if (sx == box.x && sy == box.y) continue;
            if (s.in_bounds(sx, sy) && seen[static_cast<std::size_t>(sy) * s.width + sx])
              drop_ok = true;
          }
        }
        ok = pick_ok && drop_ok;
        goal = SymbolicState{{GroundAtom{"next-to", {obj(target_a), obj(target_b)}}}};
        binding["ball"] = {target_a, "ball"};
        binding["box"] = {target_b, "box"};
        break;
      }
      case Task::Open: {
        const GridObject& door = s.objects[static_cast<std::size_t>(target_door)];
        ok = griddetail::is_reachable(reach, door.x - 1, door.y);
        goal = SymbolicState{{GroundAtom{"is-open", {obj(target_door)}}}};
        binding["door"] = {target_door, "door"};
        break;
      }
      case Task::Unlock: {
        const GridObject& door = s.objects[static_cast<std::size_t>(target_door)];
        ok = obj_ok(target_a) && griddetail::is_reachable(reach, door.x - 1, door.y);
        goal = SymbolicState{{GroundAtom{"is-open", {obj(target_door)}}}};
        binding["key"] = {target_a, "key"};
        binding["door"] = {target_door, "door"};
        break;
      }
    }
    if (!ok) continue;

    s.goal = goal;
    TaskInstance inst;
    inst.state = std::move(s);
    inst.binding = std::move(binding);
    inst.task = cfg.task;
    inst.split = cfg.split;
    return inst;
  }
  throw PlacementError(std::string(task_name(cfg.task)) + " seed " + std::to_string(seed));
}

inline EnvState reset(const TaskConfig& cfg, std::uint64_t seed) {
  return make_instance(cfg, seed).state;
}

}  // namespace abil

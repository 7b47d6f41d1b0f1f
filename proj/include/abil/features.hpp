#pragma once
// Feature encodings shared by the predicate scorers, the operator policies,
// and the monolithic baseline. Layouts are fixed contracts:
//   agent block (6)         [x/W, y/H, one-hot dir(4)]
//   object block (15)       [one-hot kind(4), one-hot color(6), x/W, y/H,
//                            door-open, door-locked, carried]
//   relative block (2/arg)  [Δx/W, Δy/H]
//   status block (7)        [carrying, one-hot front {floor,wall,object,door},
//                            front-door-open, front-door-locked]
// Predicate scorers see agent ⊕ (object ⊕ relative) per argument; policies
// append the status block; the baseline sees agent ⊕ 8 id-sorted object
// slots (zero-padded) ⊕ a 35-wide bag encoding of the goal atoms.

#include <stdexcept>
#include <string>
#include <vector>

#include "abil/gridworld.hpp"
#include "abil/symbolic.hpp"

namespace abil {

constexpr int kAgentBlock = 6;
constexpr int kObjectBlock = 15;
constexpr int kRelBlock = 2;
constexpr int kStatusBlock = 7;
constexpr int kBcSlots = 8;
constexpr int kGoalAtomBlock = 35;
constexpr int kBcDim = kAgentBlock + kBcSlots * kObjectBlock + kGoalAtomBlock;  // 161

inline int perception_dim(int arity) { return kAgentBlock + (kObjectBlock + kRelBlock) * arity; }
inline int policy_dim(int arity) { return perception_dim(arity) + kStatusBlock; }

namespace featdetail {

inline void agent_block(const EnvState& s, std::vector<double>& out) {
  out.push_back(static_cast<double>(s.agent_x) / s.width);
  out.push_back(static_cast<double>(s.agent_y) / s.height);
  for (int d = 0; d < 4; ++d) out.push_back(static_cast<int>(s.agent_dir) == d ? 1.0 : 0.0);
}

inline void object_block(const EnvState& s, const GridObject& o, std::vector<double>& out) {
  for (int k = 0; k < kNumKinds; ++k) out.push_back(static_cast<int>(o.kind) == k ? 1.0 : 0.0);
  for (int c = 0; c < kNumColors; ++c) out.push_back(static_cast<int>(o.color) == c ? 1.0 : 0.0);
  out.push_back(static_cast<double>(o.x) / s.width);
  out.push_back(static_cast<double>(o.y) / s.height);
  bool is_door = o.kind == Kind::Door;
  out.push_back(is_door && o.door == DoorState::Open ? 1.0 : 0.0);
  out.push_back(is_door && o.door == DoorState::Locked ? 1.0 : 0.0);
  out.push_back(o.carried ? 1.0 : 0.0);
}

inline void rel_block(const EnvState& s, const GridObject& o, std::vector<double>& out) {
  out.push_back(static_cast<double>(o.x - s.agent_x) / s.width);
  out.push_back(static_cast<double>(o.y - s.agent_y) / s.height);
}

inline void status_block(const EnvState& s, std::vector<double>& out) {
  out.push_back(s.carrying >= 0 ? 1.0 : 0.0);
  auto [fx, fy] = s.front_cell();
  int front_obj = s.object_at(fx, fy);
  bool is_door = front_obj >= 0 &&
                 s.objects[static_cast<std::size_t>(front_obj)].kind == Kind::Door;
  bool is_obj = front_obj >= 0 && !is_door;
  bool is_wall = front_obj < 0 && (!s.in_bounds(fx, fy) || s.is_wall(fx, fy));
  out.push_back(!is_door && !is_obj && !is_wall ? 1.0 : 0.0);
  out.push_back(is_wall ? 1.0 : 0.0);
  out.push_back(is_obj ? 1.0 : 0.0);
  out.push_back(is_door ? 1.0 : 0.0);
  const GridObject* door =
      is_door ? &s.objects[static_cast<std::size_t>(front_obj)] : nullptr;
  out.push_back(door && door->door == DoorState::Open ? 1.0 : 0.0);
  out.push_back(door && door->door == DoorState::Locked ? 1.0 : 0.0);
}

inline const GridObject& resolve(const EnvState& s, const ObjectRef& ref) {
  if (!ref.bound() || ref.id >= static_cast<int>(s.objects.size()))
    throw std::invalid_argument("no object " + to_string(ref) + " in state");
  return s.objects[static_cast<std::size_t>(ref.id)];
}

}  // namespace featdetail

// Scorer input for one ground atom: agent block, then each argument's
// object and relative blocks in argument order.
inline std::vector<double> perception_features(const EnvState& s,
                                               const std::vector<ObjectRef>& args) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(perception_dim(static_cast<int>(args.size()))));
  featdetail::agent_block(s, out);
  for (const ObjectRef& ref : args) {
    const GridObject& o = featdetail::resolve(s, ref);
    featdetail::object_block(s, o, out);
    featdetail::rel_block(s, o, out);
  }
  return out;
}

// Policy input: perception layout for the operator's arguments plus the
// carry/front status block.
inline std::vector<double> policy_features(const EnvState& s,
                                           const std::vector<ObjectRef>& args) {
  std::vector<double> out = perception_features(s, args);
  featdetail::status_block(s, out);
  return out;
}

namespace featdetail {

// Goal-atom predicate slots, fixed order.
inline int goal_pred_index(const std::string& pred) {
  static const std::vector<std::string> preds = {
      "facing",  "holding",  "is-open",   "is-locked", "next-to",
      "is-red",  "is-green", "is-blue",   "is-purple", "is-yellow",
      "is-grey", "is-key",   "is-ball",   "is-box",    "is-door"};
  for (int i = 0; i < static_cast<int>(preds.size()); ++i)
    if (preds[static_cast<std::size_t>(i)] == pred) return i;
  throw std::invalid_argument("goal predicate " + pred + " has no encoding slot");
}

}  // namespace featdetail

// Baseline input. Object slots are sorted by id and zero-padded; states with
// more than 8 objects keep the 8 lowest ids. The goal is a bag: for each
// goal atom, a predicate one-hot (15) plus color(6)+kind(4) one-hots of each
// argument's object, summed over atoms.
inline std::vector<double> bc_features(const EnvState& s) {
  std::vector<double> out;
  out.reserve(kBcDim);
  featdetail::agent_block(s, out);
  for (int slot = 0; slot < kBcSlots; ++slot) {
    if (slot < static_cast<int>(s.objects.size())) {
      featdetail::object_block(s, s.objects[static_cast<std::size_t>(slot)], out);
    } else {
      for (int i = 0; i < kObjectBlock; ++i) out.push_back(0.0);
    }
  }
  std::vector<double> goal(kGoalAtomBlock, 0.0);
  for (const GroundAtom& atom : s.goal.atoms) {
    goal[static_cast<std::size_t>(featdetail::goal_pred_index(atom.pred))] += 1.0;
    for (std::size_t arg = 0; arg < 2; ++arg) {
      if (arg >= atom.args.size()) break;
      const GridObject& o = featdetail::resolve(s, atom.args[arg]);
      std::size_t base = 15 + arg * (kNumColors + kNumKinds);
      goal[base + static_cast<std::size_t>(o.color)] += 1.0;
      goal[base + kNumColors + static_cast<std::size_t>(o.kind)] += 1.0;
    }
  }
  out.insert(out.end(), goal.begin(), goal.end());
  return out;
}

}  // namespace abil

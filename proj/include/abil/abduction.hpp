#pragma once
// Constrained labeling of score tracks. Given per-step scores for a
// machine's tracked atoms, find the cheapest assignment of steps to the
// nodes of some initial→goal path, with contiguous non-empty blocks in path
// order and the goal block covering the final step. Cost of putting step t
// on node v is the squared distance between the scores and v's closed-world
// truth vector: sum of (1-s)^2 over atoms in v plus s^2 over tracked atoms
// absent from v.
//
// abduce() is a per-path Viterbi sweep; abduce_bruteforce() enumerates every
// (path, block boundary) combination and exists as its test oracle. Both
// accumulate costs in ascending step order and share one tie-break rule, so
// they agree bit-for-bit.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "abil/symbolic.hpp"

namespace abil {

// Transition-step tie-break under equal cost. Earliest favors
// lexicographically smaller transition vectors (blocks pushed toward the
// start), Latest larger ones; remaining ties fall to path enumeration order.
enum class TieBreak { Earliest, Latest };

struct ScoreTrack {
  std::vector<GroundAtom> atoms;             // sorted tracked universe
  std::vector<std::vector<double>> scores;   // [T+1][atoms.size()]
};

struct InfeasibleError : std::runtime_error {
  explicit InfeasibleError(const std::string& why)
      : std::runtime_error("no feasible labeling: " + why) {}
};

struct Labeling {
  std::vector<std::string> path;            // node ids, initial..goal
  std::vector<SymbolicState> path_nodes;    // conditions aligned with path
  std::vector<int> assignment;              // step -> index into path
  double cost = 0.0;
  struct Pseudo {
    int step;
    GroundAtom atom;
    bool label;
    bool operator==(const Pseudo&) const = default;
  };
  std::vector<Pseudo> pseudo;
  bool operator==(const Labeling&) const = default;
};

// Closed-world emission: every tracked atom gets a label at every step.
inline std::vector<Labeling::Pseudo> pseudo_labels(const Labeling& lab,
                                                   const ScoreTrack& track) {
  std::vector<Labeling::Pseudo> out;
  out.reserve(lab.assignment.size() * track.atoms.size());
  for (std::size_t t = 0; t < lab.assignment.size(); ++t) {
    const SymbolicState& node = lab.path_nodes[static_cast<std::size_t>(lab.assignment[t])];
    for (const GroundAtom& a : track.atoms)
      out.push_back({static_cast<int>(t), a, node.contains(a)});
  }
  return out;
}

namespace abddetail {

struct Candidate {
  bool valid = false;
  double cost = 0.0;
  std::vector<int> trans;     // steps where a new block begins
  std::size_t path_idx = 0;
};

inline bool better(const Candidate& a, const Candidate& b, TieBreak tb) {
  if (!a.valid) return false;
  if (!b.valid) return true;
  if (a.cost != b.cost) return a.cost < b.cost;
  if (a.trans != b.trans)
    return tb == TieBreak::Earliest ? a.trans < b.trans : a.trans > b.trans;
  return a.path_idx < b.path_idx;
}

// Per-node membership over the track's atom index space.
inline std::vector<char> node_mask(const SymbolicState& node, const ScoreTrack& track) {
  std::vector<char> mask(track.atoms.size(), 0);
  for (std::size_t i = 0; i < track.atoms.size(); ++i)
    mask[i] = node.contains(track.atoms[i]) ? 1 : 0;
  return mask;
}

inline double cell_cost(const ScoreTrack& track, std::size_t t, const std::vector<char>& mask) {
  double c = 0.0;
  const std::vector<double>& row = track.scores[t];
  for (std::size_t i = 0; i < mask.size(); ++i) {
    double d = mask[i] ? 1.0 - row[i] : row[i];
    c += d * d;
  }
  return c;
}

inline void check_track(const ScoreTrack& track, const StateMachine& machine) {
  if (track.scores.empty()) throw std::invalid_argument("score track has no steps");
  for (const std::vector<double>& row : track.scores)
    if (row.size() != track.atoms.size())
      throw std::invalid_argument("score row width does not match the atom table");
  SymbolicState tracked = tracked_atoms(machine);
  if (SymbolicState(track.atoms).atoms != tracked.atoms)
    throw std::invalid_argument("score track atoms differ from the machine's tracked universe");
}

inline Labeling finish(const StateMachine& machine, const ScoreTrack& track,
                       const std::vector<std::string>& path, const Candidate& best) {
  Labeling lab;
  lab.path = path;
  for (const std::string& id : path) lab.path_nodes.push_back(machine.nodes.at(id));
  lab.assignment.resize(track.scores.size());
  std::size_t k = 0;
  for (std::size_t t = 0; t < track.scores.size(); ++t) {
    if (k < best.trans.size() && static_cast<int>(t) == best.trans[k]) ++k;
    lab.assignment[t] = static_cast<int>(k);
  }
  lab.cost = best.cost;
  lab.pseudo = pseudo_labels(lab, track);
  return lab;
}

}  // namespace abddetail

inline Labeling abduce_bruteforce(const ScoreTrack& track, const StateMachine& machine,
                                  TieBreak tb = TieBreak::Earliest, std::size_t path_cap = 64) {
  abddetail::check_track(track, machine);
  std::vector<std::vector<std::string>> paths = enumerate_paths(machine, path_cap);
  const std::size_t T1 = track.scores.size();  // T+1 states
  if (T1 - 1 > 10) throw std::invalid_argument("brute force capped at T <= 10");
  if (paths.size() > 8) throw std::invalid_argument("brute force capped at 8 paths");

  abddetail::Candidate best;
  std::vector<std::string> best_path;

  for (std::size_t p = 0; p < paths.size(); ++p) {
    const std::vector<std::string>& path = paths[p];
    const std::size_t P = path.size();
    if (P > T1) continue;  // some block would be empty
    std::vector<std::vector<char>> masks;
    for (const std::string& id : path)
      masks.push_back(abddetail::node_mask(machine.nodes.at(id), track));

    // transition steps: strictly increasing (P-1)-subsets of 1..T
    std::vector<int> trans(P - 1);
    for (std::size_t i = 0; i < P - 1; ++i) trans[i] = static_cast<int>(i) + 1;
    while (true) {
      double cost = 0.0;
      std::size_t k = 0;
      for (std::size_t t = 0; t < T1; ++t) {
        if (k < trans.size() && static_cast<int>(t) == trans[k]) ++k;
        cost += abddetail::cell_cost(track, t, masks[k]);
      }
      abddetail::Candidate cand{true, cost, trans, p};
      if (abddetail::better(cand, best, tb)) {
        best = cand;
        best_path = path;
      }
      // next combination in lexicographic order
      if (trans.empty()) break;
      int i = static_cast<int>(trans.size()) - 1;
      while (i >= 0 && trans[static_cast<std::size_t>(i)] ==
                           static_cast<int>(T1 - 1 - (trans.size() - 1 - static_cast<std::size_t>(i))))
        --i;
      if (i < 0) break;
      ++trans[static_cast<std::size_t>(i)];
      for (std::size_t j = static_cast<std::size_t>(i) + 1; j < trans.size(); ++j)
        trans[j] = trans[j - 1] + 1;
    }
  }
  if (!best.valid)
    throw InfeasibleError("track of " + std::to_string(T1) + " steps, every path longer");
  return abddetail::finish(machine, track, best_path, best);
}

inline Labeling abduce(const ScoreTrack& track, const StateMachine& machine,
                       TieBreak tb = TieBreak::Earliest, std::size_t path_cap = 64) {
  abddetail::check_track(track, machine);
  std::vector<std::vector<std::string>> paths = enumerate_paths(machine, path_cap);
  const std::size_t T1 = track.scores.size();

  abddetail::Candidate best;
  std::vector<std::string> best_path;

  for (std::size_t p = 0; p < paths.size(); ++p) {
    const std::vector<std::string>& path = paths[p];
    const std::size_t P = path.size();
    if (P > T1) continue;
    std::vector<std::vector<char>> masks;
    for (const std::string& id : path)
      masks.push_back(abddetail::node_mask(machine.nodes.at(id), track));

    // dp[k][t]: best labeling of steps 0..t ending on node k. Candidates
    // extend by staying on node k or entering it at step t; both add
    // cell(t, k), so sums fold left in step order exactly like the oracle.
    std::vector<std::vector<abddetail::Candidate>> dp(
        P, std::vector<abddetail::Candidate>(T1));
    dp[0][0] = {true, abddetail::cell_cost(track, 0, masks[0]), {}, p};
    for (std::size_t t = 1; t < T1; ++t) {
      // feasibility window: k blocks before this one need k earlier steps,
      // remaining P-1-k blocks need as many later steps
      for (std::size_t k = 0; k < P; ++k) {
        if (k > t) break;
        if (P - 1 - k > T1 - 1 - t) continue;
        double cell = abddetail::cell_cost(track, t, masks[k]);
        abddetail::Candidate stay;
        if (dp[k][t - 1].valid) {
          stay = dp[k][t - 1];
          stay.cost += cell;
        }
        abddetail::Candidate enter;
        if (k > 0 && dp[k - 1][t - 1].valid) {
          enter = dp[k - 1][t - 1];
          enter.cost += cell;
          enter.trans.push_back(static_cast<int>(t));
        }
        dp[k][t] = abddetail::better(enter, stay, tb) ? std::move(enter) : std::move(stay);
      }
    }
    const abddetail::Candidate& fin = dp[P - 1][T1 - 1];
    if (fin.valid && abddetail::better(fin, best, tb)) {
      best = fin;
      best_path = path;
    }
  }
  if (!best.valid)
    throw InfeasibleError("track of " + std::to_string(T1) + " steps, every path longer");
  return abddetail::finish(machine, track, best_path, best);
}

}  // namespace abil

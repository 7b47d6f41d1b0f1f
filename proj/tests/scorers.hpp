#pragma once
// Hand-built exact scorers for facing/1 and holding/1 on bordered grids.
// Suites that need oracle-sharp grounding use these instead of training, so
// their routing behavior is deterministic by construction.

#include "abil/features.hpp"
#include "abil/gridworld.hpp"
#include "abil/mlp.hpp"
#include "abil/perception.hpp"

namespace abil::testing {

// Unary feature indices (see features.hpp): dir one-hot at 2..5, carried
// bit at 20, normalized offsets at 21..22.
constexpr int kDirBase = 2;
constexpr int kCarried = 20;
constexpr int kRelX = 21;
constexpr int kRelY = 22;

// Exact facing(o) scorer, no training: per direction, a triangular bump
// that peaks when the integerized offset equals that direction's unit step
// and the orthogonal offset is zero, gated off unless the agent faces that
// way and holds nothing. The gate must dominate the packed-offset range
// (|axis + 32*ortho| < 33 * width here), or an unfaced direction whose
// packed value lands within 2 of the gate still reaches the bump.
inline Mlp crafted_facing(int width, int height) {
  Mlp m;
  m.n_in = perception_dim(1);
  m.n_hidden = 12;
  m.n_out = 1;
  m.w1.assign(static_cast<std::size_t>(m.n_hidden) * m.n_in, 0.0);
  m.b1.assign(static_cast<std::size_t>(m.n_hidden), 0.0);
  m.w2.assign(static_cast<std::size_t>(m.n_hidden), 0.0);
  m.b2 = {-6.0};
  const double gate = 1000.0, gain = 12.0;
  for (int d = 0; d < 4; ++d) {
    // axis = offset along the facing direction, ortho = the other one
    double ax = kDx[d] * width, ay = kDy[d] * height;
    double ox = kDx[d] == 0 ? width : 0.0, oy = kDy[d] == 0 ? height : 0.0;
    for (int j = 0; j < 3; ++j) {
      std::size_t h = static_cast<std::size_t>(d * 3 + j);
      double* row = m.w1.data() + h * m.n_in;
      row[kRelX] = ax + 32.0 * ox;
      row[kRelY] = ay + 32.0 * oy;
      row[kDirBase + d] = gate;
      row[kCarried] = -gate;
      m.b1[h] = -static_cast<double>(j) - gate;
      m.w2[h] = gain * (j == 1 ? -2.0 : 1.0);
    }
  }
  return m;
}

// holding(o) is literally the carried bit.
inline Mlp crafted_holding() {
  Mlp m;
  m.n_in = perception_dim(1);
  m.n_hidden = 1;
  m.n_out = 1;
  m.w1.assign(static_cast<std::size_t>(m.n_in), 0.0);
  m.w1[kCarried] = 1.0;
  m.b1 = {0.0};
  m.w2 = {12.0};
  m.b2 = {-6.0};
  return m;
}

inline PerceptionModel crafted_perception(int width, int height) {
  PerceptionModel model;
  model.scorers.emplace(ScorerKey{"facing", 1}, crafted_facing(width, height));
  model.scorers.emplace(ScorerKey{"holding", 1}, crafted_holding());
  return model;
}

}  // namespace abil::testing

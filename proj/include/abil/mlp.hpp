#pragma once
// Minimal dense network: one ReLU hidden layer, linear output. Losses take
// raw logits (numerically stable formulations) and gradients accumulate in a
// caller-owned buffer in a fixed order, so seeded training is bit-for-bit
// reproducible.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "abil/rng.hpp"

namespace abil {

struct Mlp {
  int n_in = 0;
  int n_hidden = 0;
  int n_out = 0;
  std::vector<double> w1;  // n_hidden x n_in, row-major
  std::vector<double> b1;  // n_hidden
  std::vector<double> w2;  // n_out x n_hidden, row-major
  std::vector<double> b2;  // n_out
  bool operator==(const Mlp&) const = default;

  static Mlp init(int n_in, int n_hidden, int n_out, Rng& rng) {
    Mlp m;
    m.n_in = n_in;
    m.n_hidden = n_hidden;
    m.n_out = n_out;
    double a1 = std::sqrt(6.0 / (n_in + n_hidden));
    double a2 = std::sqrt(6.0 / (n_hidden + n_out));
    m.w1.resize(static_cast<std::size_t>(n_hidden) * n_in);
    for (double& w : m.w1) w = rng.uniform(-a1, a1);
    m.b1.assign(static_cast<std::size_t>(n_hidden), 0.0);
    m.w2.resize(static_cast<std::size_t>(n_out) * n_hidden);
    for (double& w : m.w2) w = rng.uniform(-a2, a2);
    m.b2.assign(static_cast<std::size_t>(n_out), 0.0);
    return m;
  }

  std::size_t param_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  // hidden must hold n_hidden values, out n_out.
  void forward(const double* x, double* hidden, double* out) const {
    for (int h = 0; h < n_hidden; ++h) {
      double z = b1[static_cast<std::size_t>(h)];
      const double* row = w1.data() + static_cast<std::size_t>(h) * n_in;
      for (int i = 0; i < n_in; ++i) z += row[i] * x[i];
      hidden[h] = z > 0.0 ? z : 0.0;
    }
    for (int o = 0; o < n_out; ++o) {
      double z = b2[static_cast<std::size_t>(o)];
      const double* row = w2.data() + static_cast<std::size_t>(o) * n_hidden;
      for (int h = 0; h < n_hidden; ++h) z += row[h] * hidden[h];
      out[o] = z;
    }
  }

  std::vector<double> logits(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != n_in) throw std::invalid_argument("input width mismatch");
    std::vector<double> hidden(static_cast<std::size_t>(n_hidden));
    std::vector<double> out(static_cast<std::size_t>(n_out));
    forward(x.data(), hidden.data(), out.data());
    return out;
  }
};

struct MlpGrads {
  std::vector<double> w1, b1, w2, b2;

  explicit MlpGrads(const Mlp& m)
      : w1(m.w1.size(), 0.0), b1(m.b1.size(), 0.0), w2(m.w2.size(), 0.0), b2(m.b2.size(), 0.0) {}

  void reset() {
    std::fill(w1.begin(), w1.end(), 0.0);
    std::fill(b1.begin(), b1.end(), 0.0);
    std::fill(w2.begin(), w2.end(), 0.0);
    std::fill(b2.begin(), b2.end(), 0.0);
  }
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

namespace mlpdetail {

// Shared backward pass: dL/dlogit per output is given, gradients summed
// into g.
inline void backward(const Mlp& m, const double* x, const double* hidden, const double* dlogit,
                     MlpGrads& g) {
  std::vector<double> dhidden(static_cast<std::size_t>(m.n_hidden), 0.0);
  for (int o = 0; o < m.n_out; ++o) {
    double d = dlogit[o];
    g.b2[static_cast<std::size_t>(o)] += d;
    double* gw = g.w2.data() + static_cast<std::size_t>(o) * m.n_hidden;
    const double* w = m.w2.data() + static_cast<std::size_t>(o) * m.n_hidden;
    for (int h = 0; h < m.n_hidden; ++h) {
      gw[h] += d * hidden[h];
      dhidden[static_cast<std::size_t>(h)] += d * w[h];
    }
  }
  for (int h = 0; h < m.n_hidden; ++h) {
    if (hidden[h] <= 0.0) continue;  // ReLU gate
    double d = dhidden[static_cast<std::size_t>(h)];
    g.b1[static_cast<std::size_t>(h)] += d;
    double* gw = g.w1.data() + static_cast<std::size_t>(h) * m.n_in;
    for (int i = 0; i < m.n_in; ++i) gw[i] += d * x[i];
  }
}

inline double softplus(double z) {
  // log(1 + e^z) without overflow
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

}  // namespace mlpdetail

// Binary cross-entropy of sigmoid(logit) against y ∈ {0,1}; single-output
// nets only. Returns the loss, adds d(loss)/d(params) into g.
inline double bce_backward(const Mlp& m, const double* x, double y, MlpGrads& g) {
  std::vector<double> hidden(static_cast<std::size_t>(m.n_hidden));
  double logit;
  m.forward(x, hidden.data(), &logit);
  double dlogit = sigmoid(logit) - y;
  mlpdetail::backward(m, x, hidden.data(), &dlogit, g);
  return mlpdetail::softplus(logit) - y * logit;
}

inline double bce_loss(const Mlp& m, const double* x, double y) {
  std::vector<double> hidden(static_cast<std::size_t>(m.n_hidden));
  double logit;
  m.forward(x, hidden.data(), &logit);
  return mlpdetail::softplus(logit) - y * logit;
}

// Softmax cross-entropy against an integer label.
inline double ce_backward(const Mlp& m, const double* x, int label, MlpGrads& g) {
  std::vector<double> hidden(static_cast<std::size_t>(m.n_hidden));
  std::vector<double> logit(static_cast<std::size_t>(m.n_out));
  m.forward(x, hidden.data(), logit.data());
  double mx = logit[0];
  for (double z : logit) mx = z > mx ? z : mx;
  double sum = 0.0;
  for (double z : logit) sum += std::exp(z - mx);
  double lse = mx + std::log(sum);

  std::vector<double> dlogit(static_cast<std::size_t>(m.n_out));
  for (int o = 0; o < m.n_out; ++o)
    dlogit[static_cast<std::size_t>(o)] =
        std::exp(logit[static_cast<std::size_t>(o)] - lse) - (o == label ? 1.0 : 0.0);
  mlpdetail::backward(m, x, hidden.data(), dlogit.data(), g);
  return lse - logit[static_cast<std::size_t>(label)];
}

inline double ce_loss(const Mlp& m, const double* x, int label) {
  std::vector<double> hidden(static_cast<std::size_t>(m.n_hidden));
  std::vector<double> logit(static_cast<std::size_t>(m.n_out));
  m.forward(x, hidden.data(), logit.data());
  double mx = logit[0];
  for (double z : logit) mx = z > mx ? z : mx;
  double sum = 0.0;
  for (double z : logit) sum += std::exp(z - mx);
  return mx + std::log(sum) - logit[static_cast<std::size_t>(label)];
}

// Plain gradient step with the accumulated sums scaled by 1/batch.
inline void sgd_step(Mlp& m, const MlpGrads& g, double lr, double inv_batch) {
  double s = lr * inv_batch;
  for (std::size_t i = 0; i < m.w1.size(); ++i) m.w1[i] -= s * g.w1[i];
  for (std::size_t i = 0; i < m.b1.size(); ++i) m.b1[i] -= s * g.b1[i];
  for (std::size_t i = 0; i < m.w2.size(); ++i) m.w2[i] -= s * g.w2[i];
  for (std::size_t i = 0; i < m.b2.size(); ++i) m.b2[i] -= s * g.b2[i];
}

// An input that is zero in every training example never contributes a
// gradient, so its first-layer column keeps its random init values; when the
// input later activates off-distribution, that column injects init-scale
// noise. Zeroing unwitnessed columns leaves every in-distribution output
// bit-identical and makes the net indifferent to inputs it has no evidence
// about. witnessed[i] must be true iff input i was nonzero in some example.
inline void zero_unwitnessed_inputs(Mlp& m, const std::vector<bool>& witnessed) {
  for (int i = 0; i < m.n_in; ++i) {
    if (witnessed[static_cast<std::size_t>(i)]) continue;
    for (int h = 0; h < m.n_hidden; ++h)
      m.w1[static_cast<std::size_t>(h) * m.n_in + i] = 0.0;
  }
}

// Greedy argmax with ties to the lowest index.
inline int argmax(const std::vector<double>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(best)]) best = i;
  return best;
}

}  // namespace abil

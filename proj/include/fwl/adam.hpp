#pragma once

#include <cmath>

#include "fwl/net.hpp"

namespace fwl {

/// Adam accumulator state over the flat parameter space of one StudentNet.
struct AdamState {
  Vector first_moment;
  Vector second_moment;
  long step_count = 0;
  double base_rate = 1e-3;  // eta1
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_net(const StudentNet& net, double base_rate = 1e-3) {
    AdamState s;
    s.base_rate = base_rate;
    s.first_moment.assign(net.param_count(), 0.0);
    s.second_moment.assign(net.param_count(), 0.0);
    return s;
  }
};

/// One Adam update. The fidelity eta2 multiplicatively scales the parameter
/// delta only: the moment accumulators always see the raw gradients, so a
/// down-weighted step does not distort the running statistics.
inline void adam_step(StudentNet& net, AdamState& state, const Vector& grads, double fidelity = 1.0) {
  if (grads.size() != net.param_count())
    throw DimensionMismatch("adam_step: gradient length mismatch");
  if (!(fidelity >= 0.0) || fidelity > 1.0)
    throw NegativeInput("adam_step: fidelity must be in [0, 1]");
  for (double g : grads)
    if (!std::isfinite(g)) throw NonFiniteGradient("adam_step: non-finite gradient");

  ++state.step_count;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));

  double* m = state.first_moment.data();
  double* v = state.second_moment.data();
  const double* g = grads.data();
  net.for_each_block([&](double* p, std::size_t n, std::size_t off) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = off + k;
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      const double delta = -state.base_rate * mhat / (std::sqrt(vhat) + state.epsilon);
      p[k] += fidelity * delta;
    }
  });
}

}  // namespace fwl

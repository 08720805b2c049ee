#pragma once

#include "mcbits/tasks.hpp"

namespace mcbits {

// Bits-back with a single latent: pop z with q(z|x), push x with p(x|z), push z
// with p(z). Net growth per symbol is about -log2 p(x,z) + log2 q(z|x).
template <typename Task>
void bb_elbo_encode(AnsMessage& m, const typename Task::Observation& x, const CoderContext<Task>& ctx) {
  const Task& task = *ctx.task;
  const auto z = task.decode_q(m, x);
  task.encode_joint(m, x, z);
}

template <typename Task>
typename Task::Observation bb_elbo_decode(AnsMessage& m, const CoderContext<Task>& ctx) {
  const Task& task = *ctx.task;
  auto [x, z] = task.decode_joint(m);
  task.encode_q(m, z, x);
  return x;
}

// E_q[-log2 p(x,z) + log2 q(z|x)], exact (no sampling). Bits per item.
double negative_elbo(const CoderContext<MixtureTask>& ctx, Symbol x);
// For the HMM the expectation factorises over timesteps and transitions, so
// it is computed in O(T K^2).
double negative_elbo(const CoderContext<HmmTask>& ctx, const std::vector<Symbol>& x);

}  // namespace mcbits

#include "mcbits/coder_bb.hpp"

#include <cmath>

namespace mcbits {

double negative_elbo(const CoderContext<MixtureTask>& ctx, Symbol x) {
  const MixtureTask& task = *ctx.task;
  const QuantizedPmf& q = task.q(x);
  double acc = 0.0;
  for (Symbol z = 0; z < q.size(); ++z) {
    if (q.count(z) == 0) continue;
    acc += q.probability(z) * (q.log2_probability(z) - task.log2_joint(x, z));
  }
  return acc;
}

double negative_elbo(const CoderContext<HmmTask>& ctx, const std::vector<Symbol>& x) {
  const HmmTask& task = *ctx.task;
  const std::size_t k = task.num_latent();
  double acc = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const QuantizedPmf& qt = task.q(x[t]);
    for (Symbol z = 0; z < k; ++z) {
      if (qt.count(z) == 0) continue;
      const double pz = qt.probability(z);
      acc += pz * (qt.log2_probability(z) - task.emission_row(z).log2_probability(x[t]));
      if (t == 0) {
        acc -= pz * task.prior_row(0, 0).log2_probability(z);
        continue;
      }
      const QuantizedPmf& qprev = task.q(x[t - 1]);
      for (Symbol prev = 0; prev < k; ++prev) {
        if (qprev.count(prev) == 0) continue;
        acc -= qprev.probability(prev) * pz * task.prior_row(t, prev).log2_probability(z);
      }
    }
  }
  return acc;
}

}  // namespace mcbits

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mcbits/coder_is.hpp"

namespace mcbits {

// One SMC sweep over an HMM sequence, resampling at every step. Index t is
// 0-based. ancestors[t][i] is the step t-1 parent of particle i at step t;
// ancestors[0] is empty.
struct SmcSweep {
  std::vector<std::vector<Symbol>> states;
  std::vector<std::vector<std::uint32_t>> ancestors;
  std::vector<std::vector<double>> log2_weights;
  std::size_t index = 0;  // special particle j at the last step

  std::size_t steps() const noexcept { return states.size(); }
  std::size_t particles() const noexcept { return states.empty() ? 0 : states.front().size(); }
  // log2 prod_t N^-1 sum_i w_t^i
  double log2_estimate() const;
};

// Lineage B_0..B_{t-1} of particle idx at step t-1, by following parents back.
std::vector<std::uint32_t> trace_lineage(const std::vector<std::vector<std::uint32_t>>& ancestors, std::size_t idx,
                                         std::size_t t);
// The states along that lineage.
std::vector<Symbol> trace_back(const std::vector<std::vector<Symbol>>& states,
                               const std::vector<std::vector<std::uint32_t>>& ancestors, std::size_t idx,
                               std::size_t t);

// log2 w_t^i = log2 f(z_t^i | z_{t-1}^{A^i}) + log2 g(x_t | z_t^i) - log2 q(z_t^i | x_t),
// with the initial distribution in place of f at t = 0.
std::vector<double> smc_step_log2_weights(const HmmTask& task, const std::vector<Symbol>& x, std::size_t t,
                                          const std::vector<Symbol>* prev_states,
                                          const std::vector<std::uint32_t>& ancestors,
                                          const std::vector<Symbol>& states);

void bb_smc_encode(AnsMessage& m, const std::vector<Symbol>& x, const CoderContext<HmmTask>& ctx,
                   EncodeTrace* trace = nullptr);
std::vector<Symbol> bb_smc_decode(AnsMessage& m, const CoderContext<HmmTask>& ctx);

// Per-step shift couplings for BB-CSMC: state shifts at the posterior
// precision, ancestor shifts at the index precision. Each step draws i.i.d.
// shifts from its own subkey of `seed`.
class SmcCoupling {
 public:
  SmcCoupling(std::uint64_t seed, std::size_t particles, std::size_t steps, int state_precision,
              int index_precision);

  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t particles() const noexcept { return particles_; }
  std::size_t steps() const noexcept { return states_.size(); }
  const ShiftCoupling& states(std::size_t t) const { return states_.at(t); }
  // Shifts for the ancestors A_t, i.e. for resampling from step t's weights.
  const ShiftCoupling& ancestors(std::size_t t) const { return ancestors_.at(t); }

 private:
  std::uint64_t seed_;
  std::size_t particles_;
  std::vector<ShiftCoupling> states_;
  std::vector<ShiftCoupling> ancestors_;
};

void bb_csmc_encode(AnsMessage& m, const std::vector<Symbol>& x, const CoderContext<HmmTask>& ctx,
                    const SmcCoupling& coupling, EncodeTrace* trace = nullptr);
std::vector<Symbol> bb_csmc_decode(AnsMessage& m, const CoderContext<HmmTask>& ctx, const SmcCoupling& coupling);

// One pseudorandom SMC sweep with ancestors drawn from the real normalised
// weights.
SmcSweep sample_smc_sweep(const CoderContext<HmmTask>& ctx, const std::vector<Symbol>& x, Rng& rng);
double fivo_bound(const CoderContext<HmmTask>& ctx, const std::vector<Symbol>& x, Rng& rng);

// One coupled sweep driven by pseudorandom common uniforms.
double csmc_bound(const CoderContext<HmmTask>& ctx, const std::vector<Symbol>& x, const SmcCoupling& coupling,
                  Rng& rng);

// (log2 P/Q from the extended-space densities, log2 SMC estimator) for a
// sweep. Resampling probabilities are the real normalised weights.
std::pair<double, double> extended_space_identity_smc(const CoderContext<HmmTask>& ctx,
                                                      const std::vector<Symbol>& x, const SmcSweep& sweep);

}  // namespace mcbits

#pragma once

#include <utility>
#include <vector>

#include "mcbits/coder_is.hpp"

namespace mcbits {

// Geometric path f_i(z) = q(z|x)^(1-beta_i) p(x,z)^beta_i, i = 0..N, for one
// observation, with linear betas beta_i = i/N. Stored in log2.
class AnnealingPath {
 public:
  AnnealingPath(const MixtureTask& task, Symbol x, std::size_t levels);
  AnnealingPath(std::vector<double> betas, std::vector<double> log2_base, std::vector<double> log2_target);

  std::size_t levels() const noexcept { return betas_.size() - 1; }
  std::size_t num_latent() const noexcept { return log2_base_.size(); }
  double beta(std::size_t i) const { return betas_.at(i); }
  const std::vector<double>& betas() const noexcept { return betas_; }

  double log2_f(std::size_t i, Symbol z) const;
  bool in_support(Symbol z) const { return std::isfinite(log2_base_[z]); }
  // f_i scaled so its largest value is 1; zero off support. Built on first
  // use, since pseudorandom trajectories only need log2_f.
  const std::vector<double>& scaled_f(std::size_t i) const;

 private:

  std::vector<double> betas_;
  std::vector<double> log2_base_;    // log2 q(z|x)
  std::vector<double> log2_target_;  // log2 p(x, z)
  mutable std::vector<std::vector<double>> scaled_;
};

// Metropolis-Hastings kernel with a uniform proposal over the latent alphabet,
// leaving pi_i invariant. Row T_i(. | z) in real arithmetic; rejected mass sits
// on the diagonal. Valid for 1 <= i <= N-1.
std::vector<double> mh_kernel_row(const AnnealingPath& path, std::size_t i, Symbol z);
// Reverse kernel row over z for fixed z_next:
// T~_i(z | z_next) = T_i(z_next | z) f_i(z) / f_i(z_next).
std::vector<double> reverse_kernel_row(const AnnealingPath& path, std::size_t i, Symbol z_next);

// The rows above quantized with support {z' : f_i(z') > 0} plus the source
// state.
QuantizedPmf mh_kernel_pmf(const AnnealingPath& path, std::size_t i, Symbol z, int precision);
QuantizedPmf reverse_kernel_pmf(const AnnealingPath& path, std::size_t i, Symbol z_next, int precision);

// Realised AIS trajectory z_1..z_N and its log2 weight
// sum_i log2 f_i(z_i) - log2 f_{i-1}(z_i).
struct AisTrajectory {
  std::vector<Symbol> states;
  double log2_weight = 0.0;
};

double ais_log2_weight(const AnnealingPath& path, const std::vector<Symbol>& states);

// ctx.particles is the number of levels N. Encode: pop z_1 with q, pop
// z_{i+1} with T_i(.|z_i); push z_i with T~_i(.|z_{i+1}) for i = 1..N-1; then
// push x with p(x|z_N) and z_N with p(z_N).
void bb_ais_encode(AnsMessage& m, Symbol x, const CoderContext<MixtureTask>& ctx,
                   AisTrajectory* trace = nullptr);
Symbol bb_ais_decode(AnsMessage& m, const CoderContext<MixtureTask>& ctx);

// BitSwap order: each push of z_i with T~_i follows right after the pop of
// z_{i+1}, so later pops reuse freshly pushed bits.
void bb_ais_bitswap_encode(AnsMessage& m, Symbol x, const CoderContext<MixtureTask>& ctx,
                           AisTrajectory* trace = nullptr);
Symbol bb_ais_bitswap_decode(AnsMessage& m, const CoderContext<MixtureTask>& ctx);

// Simulates one AIS trajectory with exact (unquantized) MH steps.
AisTrajectory sample_ais_trajectory(const CoderContext<MixtureTask>& ctx, Symbol x, Rng& rng);

// -log2 AIS weight of one pseudorandom trajectory.
double ais_bound(const CoderContext<MixtureTask>& ctx, Symbol x, Rng& rng);

// (log2 P/Q from the extended-space densities with real kernels, log2 AIS
// weight) for a given trajectory.
std::pair<double, double> extended_space_identity_ais(const CoderContext<MixtureTask>& ctx, Symbol x,
                                                      const std::vector<Symbol>& states);

}  // namespace mcbits

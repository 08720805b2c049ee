#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "mcbits/models.hpp"
#include "mcbits/random.hpp"

namespace mcbits {

inline Symbol sample_pmf(const QuantizedPmf& p, Rng& rng) {
  return p.inv_cdf(static_cast<std::uint32_t>(uniform_below(rng, p.total())));
}

// Adapters binding a model to an approximate posterior. Coders that work for
// both the mixture and the HMM (BB-ELBO, BB-IS) are written against this
// surface:
//   log2_joint(x, z), log2_q(z, x)
//   encode_q / decode_q            latent under q(. | x); a nonzero salt
//                                  rotates the alphabet order by a hash of
//                                  (salt, x), salt 0 keeps the natural order
//   encode_joint / decode_joint    x under p(x | z), then z under p(z)
// decode_* is always the exact inverse of the matching encode_*.

// Rotation pivot for salted q coding.
inline Symbol rotation_pivot(std::uint64_t salt, std::uint64_t key, std::size_t alphabet) {
  return salt == 0 ? 0 : static_cast<Symbol>(splitmix64(splitmix64(salt) ^ key) % alphabet);
}

class MixtureTask {
 public:
  using Observation = Symbol;
  using Latent = Symbol;

  MixtureTask(const MixtureModel& model, const TabularPosterior& posterior);

  const MixtureModel& model() const noexcept { return *model_; }
  const QuantizedPmf& q(Symbol x) const { return (*posterior_)(x); }
  std::size_t dimension() const noexcept { return 1; }
  std::size_t num_latent() const noexcept { return model_->num_latent(); }

  double log2_joint(Symbol x, Symbol z) const { return log2_joint_[x * num_latent() + z]; }
  double log2_q(Symbol z, Symbol x) const { return log2_q_[x * num_latent() + z]; }

  void encode_q(AnsMessage& m, Symbol z, Symbol x, std::uint64_t salt = 0) const {
    encode_symbol(m, z, q(x), rotation_pivot(salt, x, num_latent()));
  }
  Symbol decode_q(AnsMessage& m, Symbol x, std::uint64_t salt = 0) const {
    return decode_symbol(m, q(x), rotation_pivot(salt, x, num_latent()));
  }
  Symbol sample_q(Rng& rng, Symbol x) const;

  void encode_joint(AnsMessage& m, Symbol x, Symbol z) const;
  std::pair<Symbol, Symbol> decode_joint(AnsMessage& m) const;

  Symbol observation(const std::vector<Symbol>& item) const { return item.at(0); }
  std::vector<Symbol> item(Symbol x) const { return {x}; }

 private:
  const MixtureModel* model_;
  const TabularPosterior* posterior_;
  // Cached log2 tables indexed [x * K_z + z].
  std::vector<double> log2_joint_;
  std::vector<double> log2_q_;
};

class HmmTask {
 public:
  using Observation = std::vector<Symbol>;
  using Latent = std::vector<Symbol>;

  HmmTask(const Hmm& model, const TabularPosterior& posterior);

  const Hmm& model() const noexcept { return *model_; }
  const QuantizedPmf& q(Symbol x_t) const { return (*posterior_)(x_t); }
  std::size_t dimension() const noexcept { return model_->steps; }
  std::size_t num_latent() const noexcept { return model_->num_latent(); }

  double log2_joint(const Observation& x, const Latent& z) const;
  double log2_q(const Latent& z, const Observation& x) const;

  // Timestep-level factors shared with the SMC coders.
  const QuantizedPmf& prior_row(std::size_t t, Symbol prev) const {
    return t == 0 ? model_->initial : model_->transition[prev];
  }
  const QuantizedPmf& emission_row(Symbol z) const { return model_->emission[z]; }
  double log2_prior_step(std::size_t t, Symbol prev, Symbol z) const {
    return t == 0 ? log2_initial_[z] : log2_transition_[prev * num_latent() + z];
  }
  double log2_emission(Symbol z, Symbol x_t) const { return log2_emission_[z * model_->num_obs() + x_t]; }
  double log2_q_step(Symbol z, Symbol x_t) const { return log2_q_[x_t * num_latent() + z]; }

  void encode_q(AnsMessage& m, const Latent& z, const Observation& x, std::uint64_t salt = 0) const;
  Latent decode_q(AnsMessage& m, const Observation& x, std::uint64_t salt = 0) const;
  Latent sample_q(Rng& rng, const Observation& x) const;

  void encode_joint(AnsMessage& m, const Observation& x, const Latent& z) const;
  std::pair<Observation, Latent> decode_joint(AnsMessage& m) const;

  const Observation& observation(const std::vector<Symbol>& item) const { return item; }
  std::vector<Symbol> item(const Observation& x) const { return x; }

 private:
  const Hmm* model_;
  const TabularPosterior* posterior_;
  std::vector<double> log2_initial_;
  std::vector<double> log2_transition_;  // [prev * K_z + z]
  std::vector<double> log2_emission_;    // [z * K_x + x]
  std::vector<double> log2_q_;           // [x * K_z + z]
};

// Shared coder parameters. `particles` is N (particle count, or number of
// annealing levels for AIS). Categoricals over particle indices are quantized
// at `index_precision`.
template <typename Task>
struct CoderContext {
  const Task* task;
  std::size_t particles = 1;
  int index_precision = 24;
  // Precision of the quantized MCMC kernel rows (AIS only).
  int kernel_precision = kModelPrecision;
};

}  // namespace mcbits

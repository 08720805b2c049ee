#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcbits/codec.hpp"

namespace mcbits {

inline constexpr int kModelPrecision = 16;

// p(z) p(x | z) over a latent alphabet of size K_z and an observation
// alphabet of size K_x. All probabilities are the quantized ones.
struct MixtureModel {
  QuantizedPmf prior;                     // over K_z
  std::vector<QuantizedPmf> likelihood;   // K_z rows over K_x

  std::size_t num_latent() const noexcept { return prior.size(); }
  std::size_t num_obs() const noexcept { return likelihood.empty() ? 0 : likelihood.front().size(); }
  double log2_joint(Symbol x, Symbol z) const {
    return prior.log2_probability(z) + likelihood[z].log2_probability(x);
  }
  bool operator==(const MixtureModel&) const = default;
};

// mu(z_1) prod_t f(z_t | z_{t-1}) g(x_t | z_t) with a fixed horizon.
struct Hmm {
  QuantizedPmf initial;                  // over K_z
  std::vector<QuantizedPmf> transition;  // K_z rows over K_z
  std::vector<QuantizedPmf> emission;    // K_z rows over K_x
  std::size_t steps = 0;

  std::size_t num_latent() const noexcept { return initial.size(); }
  std::size_t num_obs() const noexcept { return emission.empty() ? 0 : emission.front().size(); }
  bool operator==(const Hmm&) const = default;
};

// q(z | x) as one PMF row per observation value. For the HMM the row is
// applied per timestep, q(z_t | x_t).
class TabularPosterior {
 public:
  TabularPosterior() = default;
  explicit TabularPosterior(std::vector<QuantizedPmf> rows) : rows_(std::move(rows)) {}

  // Uniform over num_latent symbols for every observation value.
  static TabularPosterior uniform(std::size_t num_obs, std::size_t num_latent, int precision = kModelPrecision);
  // Quantized exact posterior p(z | x) of a mixture.
  static TabularPosterior exact(const MixtureModel& model, int precision = kModelPrecision);
  // Point mass on `z` for every observation value.
  static TabularPosterior point_mass(std::size_t num_obs, std::size_t num_latent, Symbol z,
                                     int precision = kModelPrecision);

  const QuantizedPmf& operator()(Symbol x) const { return rows_.at(x); }
  std::size_t num_obs() const noexcept { return rows_.size(); }
  int precision() const { return rows_.front().precision(); }

 private:
  std::vector<QuantizedPmf> rows_;
};

struct MixtureShape {
  std::size_t num_obs = 64;
  std::size_t num_latent = 256;
  int precision = kModelPrecision;
};

struct HmmShape {
  std::size_t num_obs = 16;
  std::size_t num_latent = 32;
  std::size_t steps = 10;
  int precision = kModelPrecision;
};

// Raw counts drawn i.i.d. from {1, ..., 20}, then quantized.
MixtureModel gen_mixture(std::uint64_t seed, const MixtureShape& shape = {});
Hmm gen_hmm(std::uint64_t seed, const HmmShape& shape = {});

// Each item is one observation vector: length 1 for the mixture, `steps` for
// the HMM.
using Dataset = std::vector<std::vector<Symbol>>;

Dataset sample_dataset(const MixtureModel& model, std::size_t n, std::uint64_t seed);
Dataset sample_dataset(const Hmm& model, std::size_t n, std::uint64_t seed);

// log2 p(x), by summing over z (mixture) or the forward algorithm (HMM).
double exact_log2_marginal(const MixtureModel& model, Symbol x);
double exact_log2_marginal(const Hmm& model, std::span<const Symbol> x);

// Mean of -log2 p(x) over the dataset, per observed symbol.
double empirical_entropy(const MixtureModel& model, const Dataset& data);
double empirical_entropy(const Hmm& model, const Dataset& data);

// Exact H(X) in bits by enumerating the observation alphabet.
double exact_entropy(const MixtureModel& model);

double log2_sum_exp2(std::span<const double> values);

}  // namespace mcbits

#include "mcbits/models.hpp"

#include <algorithm>
#include <cmath>

#include "mcbits/random.hpp"

namespace mcbits {

namespace {

QuantizedPmf random_row(Rng& rng, std::size_t size, int precision) {
  std::vector<double> w(size);
  for (auto& v : w) v = static_cast<double>(1 + uniform_below(rng, 20));
  return quantize_pmf(w, precision);
}

Symbol sample(const QuantizedPmf& p, Rng& rng) {
  return p.inv_cdf(static_cast<std::uint32_t>(uniform_below(rng, p.total())));
}

}  // namespace

double log2_sum_exp2(std::span<const double> values) {
  double top = -INFINITY;
  for (double v : values) top = std::max(top, v);
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double v : values) acc += std::exp2(v - top);
  return top + std::log2(acc);
}

TabularPosterior TabularPosterior::uniform(std::size_t num_obs, std::size_t num_latent, int precision) {
  return TabularPosterior(std::vector<QuantizedPmf>(num_obs, QuantizedPmf::uniform(num_latent, precision)));
}

TabularPosterior TabularPosterior::exact(const MixtureModel& model, int precision) {
  std::vector<QuantizedPmf> rows;
  std::vector<double> w(model.num_latent());
  for (Symbol x = 0; x < model.num_obs(); ++x) {
    for (Symbol z = 0; z < w.size(); ++z) w[z] = model.prior.probability(z) * model.likelihood[z].probability(x);
    rows.push_back(quantize_pmf(w, precision));
  }
  return TabularPosterior(std::move(rows));
}

TabularPosterior TabularPosterior::point_mass(std::size_t num_obs, std::size_t num_latent, Symbol z,
                                              int precision) {
  std::vector<std::uint32_t> counts(num_latent, 0);
  counts.at(z) = static_cast<std::uint32_t>(std::uint64_t{1} << precision);
  return TabularPosterior(std::vector<QuantizedPmf>(num_obs, QuantizedPmf(counts, precision)));
}

MixtureModel gen_mixture(std::uint64_t seed, const MixtureShape& shape) {
  Rng rng = make_rng(seed, 1);
  MixtureModel m;
  m.prior = random_row(rng, shape.num_latent, shape.precision);
  for (std::size_t z = 0; z < shape.num_latent; ++z)
    m.likelihood.push_back(random_row(rng, shape.num_obs, shape.precision));
  return m;
}

Hmm gen_hmm(std::uint64_t seed, const HmmShape& shape) {
  Rng rng = make_rng(seed, 2);
  Hmm h;
  h.steps = shape.steps;
  h.initial = random_row(rng, shape.num_latent, shape.precision);
  for (std::size_t z = 0; z < shape.num_latent; ++z)
    h.transition.push_back(random_row(rng, shape.num_latent, shape.precision));
  for (std::size_t z = 0; z < shape.num_latent; ++z)
    h.emission.push_back(random_row(rng, shape.num_obs, shape.precision));
  return h;
}

Dataset sample_dataset(const MixtureModel& model, std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed, 3);
  Dataset data(n);
  for (auto& item : data) {
    const Symbol z = sample(model.prior, rng);
    item = {sample(model.likelihood[z], rng)};
  }
  return data;
}

Dataset sample_dataset(const Hmm& model, std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed, 4);
  Dataset data(n);
  for (auto& item : data) {
    item.resize(model.steps);
    Symbol z = sample(model.initial, rng);
    for (std::size_t t = 0; t < model.steps; ++t) {
      if (t > 0) z = sample(model.transition[z], rng);
      item[t] = sample(model.emission[z], rng);
    }
  }
  return data;
}

double exact_log2_marginal(const MixtureModel& model, Symbol x) {
  std::vector<double> terms(model.num_latent());
  for (Symbol z = 0; z < terms.size(); ++z) terms[z] = model.log2_joint(x, z);
  return log2_sum_exp2(terms);
}

double exact_log2_marginal(const Hmm& model, std::span<const Symbol> x) {
  const std::size_t k = model.num_latent();
  std::vector<double> alpha(k), next(k), terms(k);
  for (Symbol z = 0; z < k; ++z)
    alpha[z] = model.initial.log2_probability(z) + model.emission[z].log2_probability(x[0]);
  for (std::size_t t = 1; t < x.size(); ++t) {
    for (Symbol z = 0; z < k; ++z) {
      for (Symbol prev = 0; prev < k; ++prev) terms[prev] = alpha[prev] + model.transition[prev].log2_probability(z);
      next[z] = log2_sum_exp2(terms) + model.emission[z].log2_probability(x[t]);
    }
    alpha.swap(next);
  }
  return log2_sum_exp2(alpha);
}

double empirical_entropy(const MixtureModel& model, const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("empirical_entropy: empty dataset");
  double acc = 0.0;
  for (const auto& item : data) acc -= exact_log2_marginal(model, item.at(0));
  return acc / static_cast<double>(data.size());
}

double empirical_entropy(const Hmm& model, const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("empirical_entropy: empty dataset");
  double acc = 0.0;
  for (const auto& item : data) acc -= exact_log2_marginal(model, item);
  return acc / static_cast<double>(data.size() * model.steps);
}

double exact_entropy(const MixtureModel& model) {
  double h = 0.0;
  for (Symbol x = 0; x < model.num_obs(); ++x) {
    const double lp = exact_log2_marginal(model, x);
    h -= std::exp2(lp) * lp;
  }
  return h;
}

}  // namespace mcbits

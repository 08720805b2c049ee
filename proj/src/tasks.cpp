#include "mcbits/tasks.hpp"

namespace mcbits {

MixtureTask::MixtureTask(const MixtureModel& model, const TabularPosterior& posterior)
    : model_(&model), posterior_(&posterior) {
  if (posterior.num_obs() != model.num_obs() || posterior(0).size() != model.num_latent())
    throw ContractError("mixture task: posterior shape does not match model");
  for (Symbol x = 0; x < model.num_obs(); ++x)
    for (Symbol z = 0; z < model.num_latent(); ++z)
      if (posterior(x).count(z) > 0 && (model.prior.count(z) == 0 || model.likelihood[z].count(x) == 0))
        throw ContractError("mixture task: posterior support exceeds joint support");
  const std::size_t kx = model.num_obs(), kz = model.num_latent();
  log2_joint_.resize(kx * kz);
  log2_q_.resize(kx * kz);
  for (Symbol x = 0; x < kx; ++x)
    for (Symbol z = 0; z < kz; ++z) {
      log2_joint_[x * kz + z] = model.log2_joint(x, z);
      log2_q_[x * kz + z] = posterior(x).log2_probability(z);
    }
}

Symbol MixtureTask::sample_q(Rng& rng, Symbol x) const { return sample_pmf(q(x), rng); }

void MixtureTask::encode_joint(AnsMessage& m, Symbol x, Symbol z) const {
  encode_symbol(m, x, model_->likelihood[z]);
  encode_symbol(m, z, model_->prior);
}

std::pair<Symbol, Symbol> MixtureTask::decode_joint(AnsMessage& m) const {
  const Symbol z = decode_symbol(m, model_->prior);
  const Symbol x = decode_symbol(m, model_->likelihood[z]);
  return {x, z};
}

HmmTask::HmmTask(const Hmm& model, const TabularPosterior& posterior) : model_(&model), posterior_(&posterior) {
  if (posterior.num_obs() != model.num_obs() || posterior(0).size() != model.num_latent())
    throw ContractError("hmm task: posterior shape does not match model");
  const std::size_t kx = model.num_obs(), kz = model.num_latent();
  log2_initial_.resize(kz);
  log2_transition_.resize(kz * kz);
  log2_emission_.resize(kz * kx);
  log2_q_.resize(kx * kz);
  for (Symbol z = 0; z < kz; ++z) {
    log2_initial_[z] = model.initial.log2_probability(z);
    for (Symbol to = 0; to < kz; ++to) log2_transition_[z * kz + to] = model.transition[z].log2_probability(to);
    for (Symbol x = 0; x < kx; ++x) log2_emission_[z * kx + x] = model.emission[z].log2_probability(x);
  }
  for (Symbol x = 0; x < kx; ++x)
    for (Symbol z = 0; z < kz; ++z) log2_q_[x * kz + z] = posterior(x).log2_probability(z);
}

double HmmTask::log2_joint(const Observation& x, const Latent& z) const {
  double acc = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    acc += log2_prior_step(t, t ? z[t - 1] : 0, z[t]);
    acc += log2_emission(z[t], x[t]);
  }
  return acc;
}

double HmmTask::log2_q(const Latent& z, const Observation& x) const {
  double acc = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) acc += log2_q_step(z[t], x[t]);
  return acc;
}

void HmmTask::encode_q(AnsMessage& m, const Latent& z, const Observation& x, std::uint64_t salt) const {
  for (std::size_t t = x.size(); t-- > 0;)
    encode_symbol(m, z[t], q(x[t]), rotation_pivot(salt, (std::uint64_t{t} << 32) | x[t], num_latent()));
}

HmmTask::Latent HmmTask::decode_q(AnsMessage& m, const Observation& x, std::uint64_t salt) const {
  Latent z(x.size());
  for (std::size_t t = 0; t < x.size(); ++t)
    z[t] = decode_symbol(m, q(x[t]), rotation_pivot(salt, (std::uint64_t{t} << 32) | x[t], num_latent()));
  return z;
}

HmmTask::Latent HmmTask::sample_q(Rng& rng, const Observation& x) const {
  Latent z(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) z[t] = sample_pmf(q(x[t]), rng);
  return z;
}

void HmmTask::encode_joint(AnsMessage& m, const Observation& x, const Latent& z) const {
  // Sequential over the chain: the receiver pops z_t then x_t for t = 1..T.
  for (std::size_t t = x.size(); t-- > 0;) {
    encode_symbol(m, x[t], model_->emission[z[t]]);
    encode_symbol(m, z[t], prior_row(t, t ? z[t - 1] : 0));
  }
}

std::pair<HmmTask::Observation, HmmTask::Latent> HmmTask::decode_joint(AnsMessage& m) const {
  const std::size_t steps = model_->steps;
  Latent z(steps);
  Observation x(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    z[t] = decode_symbol(m, prior_row(t, t ? z[t - 1] : 0));
    x[t] = decode_symbol(m, model_->emission[z[t]]);
  }
  return {std::move(x), std::move(z)};
}

}  // namespace mcbits

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mcbits/random.hpp"
#include "mcbits/tasks.hpp"

namespace mcbits {

// N particles with log2 importance weights log2 p(x,z_i) - log2 q(z_i|x).
template <typename Task>
struct ParticleSet {
  std::vector<typename Task::Latent> particles;
  std::vector<double> log2_weights;

  // log2 of the importance sampling estimate N^-1 sum_i w_i.
  double log2_estimate() const {
    return log2_sum_exp2(log2_weights) - std::log2(static_cast<double>(log2_weights.size()));
  }
  // Cat(w~) quantized for coding the special index.
  QuantizedPmf index_pmf(int precision) const { return quantize_log2_weights(log2_weights, precision); }
};

template <typename Task>
ParticleSet<Task> weigh_particles(const Task& task, const typename Task::Observation& x,
                                  std::vector<typename Task::Latent> particles) {
  ParticleSet<Task> set;
  set.log2_weights.reserve(particles.size());
  for (const auto& z : particles) set.log2_weights.push_back(task.log2_joint(x, z) - task.log2_q(z, x));
  set.particles = std::move(particles);
  return set;
}

// What an encode realised: the special index and log2 of the estimator of
// p(x) for that particle system.
struct EncodeTrace {
  std::size_t index = 0;
  double log2_estimate = 0.0;
};

// Encode order: pop z_1..z_N with q, pop j with Cat(w~), push z_i (i != j, in
// decreasing i, so each lands back where it was popped) with q, push x with
// p(x|z_j), push z_j with p(z_j), push j with Cat(1/N).
// Particle i is coded with salt i. The non-selected particles stay on the
// stack and are read as the next item's particles; the per-item rotation keeps
// them from arriving already biased towards low weight.
template <typename Task>
void bb_is_encode(AnsMessage& m, const typename Task::Observation& x, const CoderContext<Task>& ctx,
                  EncodeTrace* trace = nullptr) {
  const Task& task = *ctx.task;
  const std::size_t n = ctx.particles;
  if (n == 0) throw ContractError("bb_is: need at least one particle");
  std::vector<typename Task::Latent> zs;
  zs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) zs.push_back(task.decode_q(m, x, i));
  const auto set = weigh_particles(task, x, std::move(zs));
  const Symbol j = decode_symbol(m, set.index_pmf(ctx.index_precision));
  for (std::size_t i = n; i-- > 0;)
    if (i != j) task.encode_q(m, set.particles[i], x, i);
  task.encode_joint(m, x, set.particles[j]);
  encode_uniform(m, j, n);
  if (trace) *trace = {j, set.log2_estimate()};
}

template <typename Task>
typename Task::Observation bb_is_decode(AnsMessage& m, const CoderContext<Task>& ctx) {
  const Task& task = *ctx.task;
  const std::size_t n = ctx.particles;
  if (n == 0) throw ContractError("bb_is: need at least one particle");
  const std::uint32_t j = decode_uniform(m, n);
  auto [x, zj] = task.decode_joint(m);
  std::vector<typename Task::Latent> zs(n);
  zs[j] = std::move(zj);
  for (std::size_t i = 0; i < n; ++i)
    if (i != j) zs[i] = task.decode_q(m, x, i);
  const auto set = weigh_particles(task, x, std::move(zs));
  encode_symbol(m, j, set.index_pmf(ctx.index_precision));
  for (std::size_t i = n; i-- > 0;) task.encode_q(m, set.particles[i], x, i);
  return x;
}

// -log2 of the IS estimator for a given particle system.
template <typename Task>
double iwae_bound_from_particles(const CoderContext<Task>& ctx, const typename Task::Observation& x,
                                 std::vector<typename Task::Latent> particles) {
  return -weigh_particles(*ctx.task, x, std::move(particles)).log2_estimate();
}

// One pseudorandom draw of -log2 N^-1 sum_i w_i with z_i ~ q i.i.d.
template <typename Task>
double iwae_bound(const CoderContext<Task>& ctx, const typename Task::Observation& x, Rng& rng) {
  std::vector<typename Task::Latent> zs;
  zs.reserve(ctx.particles);
  for (std::size_t i = 0; i < ctx.particles; ++i) zs.push_back(ctx.task->sample_q(rng, x));
  return iwae_bound_from_particles(ctx, x, std::move(zs));
}

// log2 P(x, Z) - log2 Q(Z | x) evaluated from the two extended-space densities
// Q = w~_j prod_i q(z_i|x), P = N^-1 p(x,z_j) prod_{i != j} q(z_i|x), paired with
// log2 of the IS estimator. The two must agree.
template <typename Task>
std::pair<double, double> extended_space_identity_is(const CoderContext<Task>& ctx,
                                                     const typename Task::Observation& x,
                                                     const std::vector<typename Task::Latent>& particles,
                                                     std::size_t j) {
  const Task& task = *ctx.task;
  const std::size_t n = particles.size();
  std::vector<double> lw(n), lq(n);
  for (std::size_t i = 0; i < n; ++i) {
    lq[i] = task.log2_q(particles[i], x);
    lw[i] = task.log2_joint(x, particles[i]) - lq[i];
  }
  const double log2_normalised_j = lw[j] - log2_sum_exp2(lw);
  double log_q = log2_normalised_j;
  double log_p = -std::log2(static_cast<double>(n)) + task.log2_joint(x, particles[j]);
  for (std::size_t i = 0; i < n; ++i) {
    log_q += lq[i];
    if (i != j) log_p += lq[i];
  }
  const double estimator = log2_sum_exp2(lw) - std::log2(static_cast<double>(n));
  return {log_p - log_q, estimator};
}

// ---------------------------------------------------------------------------
// Coupled importance sampling (mixture latents).

enum class CouplingMode { iid_shifts, permutation_shifts, exhaustive };

const char* to_string(CouplingMode mode);
CouplingMode coupling_mode_from_string(const std::string& name);

// Bijections T_i(u) = (u + k_i) mod 2^r with k_1 = 0.
class ShiftCoupling {
 public:
  ShiftCoupling(CouplingMode mode, std::uint64_t seed, std::size_t particles, int precision);

  CouplingMode mode() const noexcept { return mode_; }
  std::uint64_t seed() const noexcept { return seed_; }
  int precision() const noexcept { return precision_; }
  std::size_t size() const noexcept { return shifts_.size(); }
  const std::vector<std::uint32_t>& shifts() const noexcept { return shifts_; }

  std::uint32_t forward(std::size_t i, std::uint32_t u) const { return (u + shifts_[i]) & mask_; }
  std::uint32_t inverse(std::size_t i, std::uint32_t u) const { return (u - shifts_[i]) & mask_; }

 private:
  CouplingMode mode_;
  std::uint64_t seed_;
  int precision_;
  std::uint32_t mask_;
  std::vector<std::uint32_t> shifts_;
};

// Encode order: pop u_1 uniform on [0, 2^r) (as z ~ q, then u_1 on U(z));
// z_i = F_q^-1(T_i(u_1)); pop j with Cat(w~); push u_j uniform on U(z_j); push
// x with p(x|z_j); push z_j with p(z_j); push j with Cat(1/N). Needs
// ctx.particles == coupling.size() and the coupling precision equal to q's
// precision.
void bb_cis_encode(AnsMessage& m, Symbol x, const CoderContext<MixtureTask>& ctx, const ShiftCoupling& coupling,
                   EncodeTrace* trace = nullptr);
Symbol bb_cis_decode(AnsMessage& m, const CoderContext<MixtureTask>& ctx, const ShiftCoupling& coupling);

// -log2 of N^-1 sum_i p(x, z_i) / q(z_i|x) with z_i = F_q^-1(T_i(u1)).
double cis_estimator(const CoderContext<MixtureTask>& ctx, Symbol x, const ShiftCoupling& coupling,
                     std::uint32_t u1);

// (log2 P/Q over (z, u, j), log2 CIS estimator) for a realisation (u1, j),
// with P and Q evaluated from their defining densities including the
// indicator terms.
std::pair<double, double> extended_space_identity_cis(const CoderContext<MixtureTask>& ctx, Symbol x,
                                                      const ShiftCoupling& coupling, std::uint32_t u1,
                                                      std::size_t j);

}  // namespace mcbits

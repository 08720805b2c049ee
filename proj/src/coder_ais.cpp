#include "mcbits/coder_ais.hpp"

#include <cfloat>
#include <cmath>

namespace mcbits {

AnnealingPath::AnnealingPath(const MixtureTask& task, Symbol x, std::size_t levels) {
  if (levels == 0) throw ContractError("annealing path: need at least one level");
  betas_.resize(levels + 1);
  for (std::size_t i = 0; i <= levels; ++i) betas_[i] = static_cast<double>(i) / static_cast<double>(levels);
  const std::size_t k = task.num_latent();
  log2_base_.resize(k);
  log2_target_.resize(k);
  for (Symbol z = 0; z < k; ++z) {
    log2_base_[z] = task.log2_q(z, x);
    log2_target_[z] = task.log2_joint(x, z);
  }
}

AnnealingPath::AnnealingPath(std::vector<double> betas, std::vector<double> log2_base,
                             std::vector<double> log2_target)
    : betas_(std::move(betas)), log2_base_(std::move(log2_base)), log2_target_(std::move(log2_target)) {
  if (betas_.size() < 2 || betas_.front() != 0.0 || betas_.back() != 1.0)
    throw ContractError("annealing path: betas must run from 0 to 1");
  for (std::size_t i = 1; i < betas_.size(); ++i)
    if (!(betas_[i] > betas_[i - 1])) throw ContractError("annealing path: betas must increase strictly");
  if (log2_base_.size() != log2_target_.size()) throw ContractError("annealing path: size mismatch");
}

const std::vector<double>& AnnealingPath::scaled_f(std::size_t i) const {
  if (!scaled_.empty()) return scaled_.at(i);
  const std::size_t k = log2_base_.size();
  scaled_.assign(betas_.size(), std::vector<double>(k, 0.0));
  std::vector<double> lf(k);
  for (std::size_t level = 0; level < betas_.size(); ++level) {
    double top = -INFINITY;
    for (Symbol z = 0; z < k; ++z) top = std::max(top, lf[z] = log2_f(level, z));
    if (!std::isfinite(top)) throw ContractError("annealing path: empty support");
    for (Symbol z = 0; z < k; ++z) scaled_[level][z] = in_support(z) ? std::exp2(lf[z] - top) : 0.0;
  }
  return scaled_.at(i);
}

double AnnealingPath::log2_f(std::size_t i, Symbol z) const {
  if (!in_support(z)) return -INFINITY;
  const double b = betas_[i];
  if (b == 0.0) return log2_base_[z];
  if (b == 1.0) return log2_target_[z];
  return (1.0 - b) * log2_base_[z] + b * log2_target_[z];
}

namespace {

void check_level(const AnnealingPath& path, std::size_t i) {
  if (i == 0 || i >= path.levels()) throw ContractError("mh kernel: level outside [1, N-1]");
}

QuantizedPmf quantize_row(const std::vector<double>& row, const AnnealingPath& path, Symbol source, int precision) {
  std::vector<double> w(row.size());
  std::vector<bool> support(row.size());
  for (Symbol z = 0; z < row.size(); ++z) {
    support[z] = path.in_support(z) || z == source;
    w[z] = support[z] ? std::max(row[z], DBL_MIN) : 0.0;
  }
  return quantize_pmf(w, support, precision);
}

}  // namespace

std::vector<double> mh_kernel_row(const AnnealingPath& path, std::size_t i, Symbol z) {
  check_level(path, i);
  const auto& f = path.scaled_f(i);
  const double inv_k = 1.0 / static_cast<double>(f.size());
  std::vector<double> row(f.size(), 0.0);
  double moved = 0.0;
  for (Symbol to = 0; to < f.size(); ++to) {
    if (to == z || f[to] == 0.0) continue;
    row[to] = f[to] >= f[z] ? inv_k : inv_k * (f[to] / f[z]);
    moved += row[to];
  }
  row[z] = std::max(0.0, 1.0 - moved);
  return row;
}

std::vector<double> reverse_kernel_row(const AnnealingPath& path, std::size_t i, Symbol z_next) {
  check_level(path, i);
  const auto& f = path.scaled_f(i);
  const double inv_k = 1.0 / static_cast<double>(f.size());
  const double f_next = f[z_next];
  std::vector<double> row(f.size(), 0.0);
  double moved = 0.0;
  for (Symbol z = 0; z < f.size(); ++z) {
    if (z == z_next || f[z] == 0.0) continue;
    // T_i(z_next | z) f_i(z) / f_i(z_next), and the forward move out of z_next
    // for the diagonal.
    const double forward = f_next >= f[z] ? inv_k : inv_k * (f_next / f[z]);
    row[z] = forward * f[z] / f_next;
    moved += f[z] >= f_next ? inv_k : inv_k * (f[z] / f_next);
  }
  row[z_next] = std::max(0.0, 1.0 - moved);
  return row;
}

QuantizedPmf mh_kernel_pmf(const AnnealingPath& path, std::size_t i, Symbol z, int precision) {
  return quantize_row(mh_kernel_row(path, i, z), path, z, precision);
}

QuantizedPmf reverse_kernel_pmf(const AnnealingPath& path, std::size_t i, Symbol z_next, int precision) {
  return quantize_row(reverse_kernel_row(path, i, z_next), path, z_next, precision);
}

double ais_log2_weight(const AnnealingPath& path, const std::vector<Symbol>& states) {
  if (states.size() != path.levels()) throw ContractError("ais weight: trajectory length differs from levels");
  double acc = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) acc += path.log2_f(k + 1, states[k]) - path.log2_f(k, states[k]);
  return acc;
}

void bb_ais_encode(AnsMessage& m, Symbol x, const CoderContext<MixtureTask>& ctx, AisTrajectory* trace) {
  const MixtureTask& task = *ctx.task;
  const AnnealingPath path(task, x, ctx.particles);
  const std::size_t n = path.levels();
  const int r = ctx.kernel_precision;
  std::vector<Symbol> z(n);
  z[0] = task.decode_q(m, x);
  for (std::size_t i = 1; i < n; ++i) z[i] = decode_symbol(m, mh_kernel_pmf(path, i, z[i - 1], r));
  // x goes on after the reverse-kernel pushes: the receiver needs x before it
  // can build T~_i, and pops x right after z_N.
  for (std::size_t i = 1; i < n; ++i) encode_symbol(m, z[i - 1], reverse_kernel_pmf(path, i, z[i], r));
  task.encode_joint(m, x, z[n - 1]);
  if (trace) *trace = {z, ais_log2_weight(path, z)};
}

Symbol bb_ais_decode(AnsMessage& m, const CoderContext<MixtureTask>& ctx) {
  const MixtureTask& task = *ctx.task;
  const auto [x, last] = task.decode_joint(m);
  const AnnealingPath path(task, x, ctx.particles);
  const std::size_t n = path.levels();
  const int r = ctx.kernel_precision;
  std::vector<Symbol> z(n);
  z[n - 1] = last;
  for (std::size_t i = n - 1; i >= 1; --i) z[i - 1] = decode_symbol(m, reverse_kernel_pmf(path, i, z[i], r));
  for (std::size_t i = n - 1; i >= 1; --i) encode_symbol(m, z[i], mh_kernel_pmf(path, i, z[i - 1], r));
  task.encode_q(m, z[0], x);
  return x;
}

void bb_ais_bitswap_encode(AnsMessage& m, Symbol x, const CoderContext<MixtureTask>& ctx, AisTrajectory* trace) {
  const MixtureTask& task = *ctx.task;
  const AnnealingPath path(task, x, ctx.particles);
  const std::size_t n = path.levels();
  const int r = ctx.kernel_precision;
  std::vector<Symbol> z(n);
  z[0] = task.decode_q(m, x);
  for (std::size_t i = 1; i < n; ++i) {
    z[i] = decode_symbol(m, mh_kernel_pmf(path, i, z[i - 1], r));
    encode_symbol(m, z[i - 1], reverse_kernel_pmf(path, i, z[i], r));
  }
  task.encode_joint(m, x, z[n - 1]);
  if (trace) *trace = {z, ais_log2_weight(path, z)};
}

Symbol bb_ais_bitswap_decode(AnsMessage& m, const CoderContext<MixtureTask>& ctx) {
  const MixtureTask& task = *ctx.task;
  const auto [x, last] = task.decode_joint(m);
  const AnnealingPath path(task, x, ctx.particles);
  const std::size_t n = path.levels();
  const int r = ctx.kernel_precision;
  std::vector<Symbol> z(n);
  z[n - 1] = last;
  for (std::size_t i = n - 1; i >= 1; --i) {
    z[i - 1] = decode_symbol(m, reverse_kernel_pmf(path, i, z[i], r));
    encode_symbol(m, z[i], mh_kernel_pmf(path, i, z[i - 1], r));
  }
  task.encode_q(m, z[0], x);
  return x;
}

AisTrajectory sample_ais_trajectory(const CoderContext<MixtureTask>& ctx, Symbol x, Rng& rng) {
  const MixtureTask& task = *ctx.task;
  const AnnealingPath path(task, x, ctx.particles);
  const std::size_t n = path.levels();
  const std::size_t k = path.num_latent();
  std::vector<Symbol> z(n);
  z[0] = task.sample_q(rng, x);
  for (std::size_t i = 1; i < n; ++i) {
    Symbol cur = z[i - 1];
    const auto proposal = static_cast<Symbol>(uniform_below(rng, k));
    if (proposal != cur && path.in_support(proposal)) {
      const double log_ratio = path.log2_f(i, proposal) - path.log2_f(i, cur);
      if (log_ratio >= 0.0 || uniform_real(rng) < std::exp2(log_ratio)) cur = proposal;
    }
    z[i] = cur;
  }
  const double lw = ais_log2_weight(path, z);
  return {std::move(z), lw};
}

double ais_bound(const CoderContext<MixtureTask>& ctx, Symbol x, Rng& rng) {
  return -sample_ais_trajectory(ctx, x, rng).log2_weight;
}

std::pair<double, double> extended_space_identity_ais(const CoderContext<MixtureTask>& ctx, Symbol x,
                                                      const std::vector<Symbol>& states) {
  const MixtureTask& task = *ctx.task;
  const AnnealingPath path(task, x, ctx.particles);
  const std::size_t n = path.levels();
  // Q = f_0(z_1) prod_i T_i(z_{i+1} | z_i);  P = f_N(z_N) prod_i T~_i(z_i | z_{i+1})
  double log_q = path.log2_f(0, states[0]);
  double log_p = path.log2_f(n, states[n - 1]);
  for (std::size_t i = 1; i < n; ++i) {
    log_q += std::log2(mh_kernel_row(path, i, states[i - 1])[states[i]]);
    log_p += std::log2(reverse_kernel_row(path, i, states[i])[states[i - 1]]);
  }
  return {log_p - log_q, ais_log2_weight(path, states)};
}

}  // namespace mcbits

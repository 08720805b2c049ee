#include "mcbits/coder_smc.hpp"

#include <algorithm>

namespace mcbits {

double SmcSweep::log2_estimate() const {
  double acc = 0.0;
  for (const auto& lw : log2_weights) acc += log2_sum_exp2(lw) - std::log2(static_cast<double>(lw.size()));
  return acc;
}

std::vector<std::uint32_t> trace_lineage(const std::vector<std::vector<std::uint32_t>>& ancestors, std::size_t idx,
                                         std::size_t t) {
  if (t == 0) throw ContractError("trace_back: need t >= 1");
  std::vector<std::uint32_t> lineage(t);
  lineage[t - 1] = static_cast<std::uint32_t>(idx);
  for (std::size_t k = t - 1; k > 0; --k) lineage[k - 1] = ancestors.at(k).at(lineage[k]);
  return lineage;
}

std::vector<Symbol> trace_back(const std::vector<std::vector<Symbol>>& states,
                               const std::vector<std::vector<std::uint32_t>>& ancestors, std::size_t idx,
                               std::size_t t) {
  const auto lineage = trace_lineage(ancestors, idx, t);
  std::vector<Symbol> path(t);
  for (std::size_t k = 0; k < t; ++k) path[k] = states.at(k).at(lineage[k]);
  return path;
}

std::vector<double> smc_step_log2_weights(const HmmTask& task, const std::vector<Symbol>& x, std::size_t t,
                                          const std::vector<Symbol>* prev_states,
                                          const std::vector<std::uint32_t>& ancestors,
                                          const std::vector<Symbol>& states) {
  std::vector<double> lw(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Symbol z = states[i];
    const Symbol prev = t == 0 ? 0 : (*prev_states)[ancestors[i]];
    lw[i] = task.log2_prior_step(t, prev, z) + task.log2_emission(z, x[t]) - task.log2_q_step(z, x[t]);
  }
  return lw;
}

namespace {

struct Forward {
  std::vector<std::vector<Symbol>> z;
  std::vector<std::vector<std::uint32_t>> a;
  std::vector<std::vector<double>> lw;
  std::vector<QuantizedPmf> resample;

  Forward(std::size_t steps, std::size_t n) : z(steps, std::vector<Symbol>(n)), a(steps), lw(steps), resample(steps) {}

  void weigh(const HmmTask& task, const std::vector<Symbol>& x, std::size_t t, int index_precision) {
    lw[t] = smc_step_log2_weights(task, x, t, t ? &z[t - 1] : nullptr, a[t], z[t]);
    resample[t] = quantize_log2_weights(lw[t], index_precision);
  }

  double log2_estimate() const {
    double acc = 0.0;
    for (const auto& w : lw) acc += log2_sum_exp2(w) - std::log2(static_cast<double>(w.size()));
    return acc;
  }
};

std::size_t check_smc(const CoderContext<HmmTask>& ctx, std::size_t steps) {
  if (ctx.particles == 0) throw ContractError("bb_smc: need at least one particle");
  if (steps != ctx.task->dimension()) throw ContractError("bb_smc: sequence length differs from model horizon");
  if (steps == 0) throw ContractError("bb_smc: empty sequence");
  return ctx.particles;
}

const QuantizedPmf& special_prior(const HmmTask& task, const Forward& f, const std::vector<std::uint32_t>& lineage,
                                  std::size_t t) {
  return task.prior_row(t, t ? f.z[t - 1][lineage[t - 1]] : 0);
}

}  // namespace

void bb_smc_encode(AnsMessage& m, const std::vector<Symbol>& x, const CoderContext<HmmTask>& ctx,
                   EncodeTrace* trace) {
  const HmmTask& task = *ctx.task;
  const std::size_t steps = x.size();
  const std::size_t n = check_smc(ctx, steps);
  Forward f(steps, n);
  for (std::size_t t = 0; t < steps; ++t) {
    if (t > 0) {
      f.a[t].resize(n);
      for (std::size_t i = 0; i < n; ++i) f.a[t][i] = decode_symbol(m, f.resample[t - 1]);
    }
    for (std::size_t i = 0; i < n; ++i) f.z[t][i] = decode_symbol(m, task.q(x[t]));
    f.weigh(task, x, t, ctx.index_precision);
  }
  const Symbol j = decode_symbol(m, f.resample[steps - 1]);
  const auto lineage = trace_lineage(f.a, j, steps);

  for (std::size_t t = steps; t-- > 0;) {
    const std::uint32_t b = lineage[t];
    for (std::size_t i = n; i-- > 0;)
      if (i != b) encode_symbol(m, f.z[t][i], task.q(x[t]));
    encode_symbol(m, x[t], task.emission_row(f.z[t][b]));
    encode_symbol(m, f.z[t][b], special_prior(task, f, lineage, t));
    if (t > 0)
      for (std::size_t i = n; i-- > 0;)
        if (i != b) encode_symbol(m, f.a[t][i], f.resample[t - 1]);
    encode_uniform(m, b, n);
  }
  if (trace) *trace = {j, f.log2_estimate()};
}

std::vector<Symbol> bb_smc_decode(AnsMessage& m, const CoderContext<HmmTask>& ctx) {
  const HmmTask& task = *ctx.task;
  const std::size_t steps = ctx.task->dimension();
  const std::size_t n = check_smc(ctx, steps);
  Forward f(steps, n);
  std::vector<Symbol> x(steps);
  std::vector<std::uint32_t> lineage(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const std::uint32_t b = decode_uniform(m, n);
    lineage[t] = b;
    if (t > 0) {
      f.a[t].resize(n);
      f.a[t][b] = lineage[t - 1];
      for (std::size_t i = 0; i < n; ++i)
        if (i != b) f.a[t][i] = decode_symbol(m, f.resample[t - 1]);
    }
    f.z[t][b] = decode_symbol(m, special_prior(task, f, lineage, t));
    x[t] = decode_symbol(m, task.emission_row(f.z[t][b]));
    for (std::size_t i = 0; i < n; ++i)
      if (i != b) f.z[t][i] = decode_symbol(m, task.q(x[t]));
    f.weigh(task, x, t, ctx.index_precision);
  }
  encode_symbol(m, lineage[steps - 1], f.resample[steps - 1]);
  for (std::size_t t = steps; t-- > 0;) {
    for (std::size_t i = n; i-- > 0;) encode_symbol(m, f.z[t][i], task.q(x[t]));
    if (t > 0)
      for (std::size_t i = n; i-- > 0;) encode_symbol(m, f.a[t][i], f.resample[t - 1]);
  }
  return x;
}

SmcCoupling::SmcCoupling(std::uint64_t seed, std::size_t particles, std::size_t steps, int state_precision,
                         int index_precision)
    : seed_(seed), particles_(particles) {
  states_.reserve(steps);
  ancestors_.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    states_.emplace_back(CouplingMode::iid_shifts, splitmix64(seed + 2 * t), particles, state_precision);
    ancestors_.emplace_back(CouplingMode::iid_shifts, splitmix64(seed + 2 * t + 1), particles, index_precision);
  }
}

namespace {

void check_csmc(const CoderContext<HmmTask>& ctx, const SmcCoupling& coupling, const std::vector<Symbol>& x) {
  if (coupling.particles() != ctx.particles) throw ContractError("bb_csmc: particle count differs from coupling");
  if (coupling.steps() != x.size()) throw ContractError("bb_csmc: coupling horizon differs from sequence");
  if (coupling.ancestors(0).precision() != ctx.index_precision)
    throw ContractError("bb_csmc: ancestor coupling precision differs from index precision");
}

void check_state_precision(const SmcCoupling& coupling, std::size_t t, const QuantizedPmf& q) {
  if (coupling.states(t).precision() != q.precision())
    throw ContractError("bb_csmc: state coupling precision differs from posterior precision");
}

// Fills step t's ancestors and states from the common uniforms v (for t > 0)
// and u.
void coupled_step(Forward& f, const SmcCoupling& coupling, const QuantizedPmf& q, std::size_t t, std::uint32_t v,
                  std::uint32_t u) {
  const std::size_t n = coupling.particles();
  if (t > 0) {
    f.a[t].resize(n);
    for (std::size_t i = 0; i < n; ++i) f.a[t][i] = f.resample[t - 1].inv_cdf(coupling.ancestors(t - 1).forward(i, v));
  }
  for (std::size_t i = 0; i < n; ++i) f.z[t][i] = q.inv_cdf(coupling.states(t).forward(i, u));
}

}  // namespace

void bb_csmc_encode(AnsMessage& m, const std::vector<Symbol>& x, const CoderContext<HmmTask>& ctx,
                    const SmcCoupling& coupling, EncodeTrace* trace) {
  const HmmTask& task = *ctx.task;
  const std::size_t steps = x.size();
  const std::size_t n = check_smc(ctx, steps);
  check_csmc(ctx, coupling, x);
  Forward f(steps, n);
  std::vector<std::uint32_t> u(steps), v(steps, 0);
  for (std::size_t t = 0; t < steps; ++t) {
    const QuantizedPmf& q = task.q(x[t]);
    check_state_precision(coupling, t, q);
    // Common uniforms are drawn as a symbol and then an offset inside its
    // interval; jointly uniform, but the symbol reads the low message bits.
    if (t > 0) v[t] = decode_restricted_uniform(m, decode_symbol(m, f.resample[t - 1]), f.resample[t - 1]);
    u[t] = decode_restricted_uniform(m, decode_symbol(m, q), q);
    coupled_step(f, coupling, q, t, v[t], u[t]);
    f.weigh(task, x, t, ctx.index_precision);
  }
  const Symbol j = decode_symbol(m, f.resample[steps - 1]);
  const auto lineage = trace_lineage(f.a, j, steps);

  for (std::size_t t = steps; t-- > 0;) {
    const std::uint32_t b = lineage[t];
    encode_restricted_uniform(m, coupling.states(t).forward(b, u[t]), task.q(x[t]));
    encode_symbol(m, x[t], task.emission_row(f.z[t][b]));
    encode_symbol(m, f.z[t][b], special_prior(task, f, lineage, t));
    if (t > 0) encode_restricted_uniform(m, coupling.ancestors(t - 1).forward(b, v[t]), f.resample[t - 1]);
    encode_uniform(m, b, n);
  }
  if (trace) *trace = {j, f.log2_estimate()};
}

std::vector<Symbol> bb_csmc_decode(AnsMessage& m, const CoderContext<HmmTask>& ctx, const SmcCoupling& coupling) {
  const HmmTask& task = *ctx.task;
  const std::size_t steps = ctx.task->dimension();
  const std::size_t n = check_smc(ctx, steps);
  std::vector<Symbol> x(steps);
  check_csmc(ctx, coupling, x);
  Forward f(steps, n);
  std::vector<std::uint32_t> u(steps), v(steps, 0), lineage(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const std::uint32_t b = decode_uniform(m, n);
    lineage[t] = b;
    if (t > 0) {
      const std::uint32_t vb = decode_restricted_uniform(m, lineage[t - 1], f.resample[t - 1]);
      v[t] = coupling.ancestors(t - 1).inverse(b, vb);
    }
    const Symbol zb = decode_symbol(m, special_prior(task, f, lineage, t));
    x[t] = decode_symbol(m, task.emission_row(zb));
    const QuantizedPmf& q = task.q(x[t]);
    check_state_precision(coupling, t, q);
    u[t] = coupling.states(t).inverse(b, decode_restricted_uniform(m, zb, q));
    coupled_step(f, coupling, q, t, v[t], u[t]);
    f.weigh(task, x, t, ctx.index_precision);
  }
  encode_symbol(m, lineage[steps - 1], f.resample[steps - 1]);
  for (std::size_t t = steps; t-- > 0;) {
    const QuantizedPmf& q = task.q(x[t]);
    encode_restricted_uniform(m, u[t], q);
    encode_symbol(m, q.inv_cdf(u[t]), q);
    if (t > 0) {
      encode_restricted_uniform(m, v[t], f.resample[t - 1]);
      encode_symbol(m, f.resample[t - 1].inv_cdf(v[t]), f.resample[t - 1]);
    }
  }
  return x;
}

namespace {

std::uint32_t sample_log2_weights(const std::vector<double>& lw, Rng& rng) {
  const double top = *std::max_element(lw.begin(), lw.end());
  std::vector<double> cum(lw.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < lw.size(); ++i) cum[i] = acc += std::exp2(lw[i] - top);
  const double target = uniform_real(rng) * acc;
  const auto it = std::upper_bound(cum.begin(), cum.end(), target);
  return static_cast<std::uint32_t>(std::min<std::size_t>(it - cum.begin(), lw.size() - 1));
}

}  // namespace

SmcSweep sample_smc_sweep(const CoderContext<HmmTask>& ctx, const std::vector<Symbol>& x, Rng& rng) {
  const HmmTask& task = *ctx.task;
  const std::size_t steps = x.size();
  const std::size_t n = check_smc(ctx, steps);
  SmcSweep s;
  s.states.assign(steps, std::vector<Symbol>(n));
  s.ancestors.resize(steps);
  s.log2_weights.resize(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    if (t > 0) {
      s.ancestors[t].resize(n);
      for (std::size_t i = 0; i < n; ++i) s.ancestors[t][i] = sample_log2_weights(s.log2_weights[t - 1], rng);
    }
    for (std::size_t i = 0; i < n; ++i) s.states[t][i] = sample_pmf(task.q(x[t]), rng);
    s.log2_weights[t] =
        smc_step_log2_weights(task, x, t, t ? &s.states[t - 1] : nullptr, s.ancestors[t], s.states[t]);
  }
  s.index = sample_log2_weights(s.log2_weights[steps - 1], rng);
  return s;
}

double fivo_bound(const CoderContext<HmmTask>& ctx, const std::vector<Symbol>& x, Rng& rng) {
  return -sample_smc_sweep(ctx, x, rng).log2_estimate();
}

double csmc_bound(const CoderContext<HmmTask>& ctx, const std::vector<Symbol>& x, const SmcCoupling& coupling,
                  Rng& rng) {
  const HmmTask& task = *ctx.task;
  const std::size_t steps = x.size();
  check_smc(ctx, steps);
  check_csmc(ctx, coupling, x);
  const std::uint64_t index_total = std::uint64_t{1} << ctx.index_precision;
  Forward f(steps, ctx.particles);
  for (std::size_t t = 0; t < steps; ++t) {
    const QuantizedPmf& q = task.q(x[t]);
    const auto v = t > 0 ? static_cast<std::uint32_t>(uniform_below(rng, index_total)) : 0u;
    const auto u = static_cast<std::uint32_t>(uniform_below(rng, q.total()));
    coupled_step(f, coupling, q, t, v, u);
    f.weigh(task, x, t, ctx.index_precision);
  }
  return -f.log2_estimate();
}

std::pair<double, double> extended_space_identity_smc(const CoderContext<HmmTask>& ctx,
                                                      const std::vector<Symbol>& x, const SmcSweep& sweep) {
  const HmmTask& task = *ctx.task;
  const std::size_t steps = sweep.steps();
  const std::size_t n = sweep.particles();
  const auto lineage = trace_lineage(sweep.ancestors, sweep.index, steps);

  std::vector<std::vector<double>> log_norm(steps);
  double estimator = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    const auto lw =
        smc_step_log2_weights(task, x, t, t ? &sweep.states[t - 1] : nullptr, sweep.ancestors[t], sweep.states[t]);
    const double total = log2_sum_exp2(lw);
    estimator += total - std::log2(static_cast<double>(n));
    log_norm[t].resize(n);
    for (std::size_t i = 0; i < n; ++i) log_norm[t][i] = lw[i] - total;
  }

  // Q: every particle from q, every ancestor from w~, then j from w~_T.
  // P: uniform lineage indices, the special trajectory from the model, every
  // other particle and ancestor as under Q.
  double log_q = log_norm[steps - 1][sweep.index];
  double log_p = -static_cast<double>(steps) * std::log2(static_cast<double>(n)) +
                 task.log2_joint(x, trace_back(sweep.states, sweep.ancestors, sweep.index, steps));
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      double term = task.log2_q_step(sweep.states[t][i], x[t]);
      if (t > 0) term += log_norm[t - 1][sweep.ancestors[t][i]];
      log_q += term;
      if (i != lineage[t]) log_p += term;
    }
  }
  return {log_p - log_q, estimator};
}

}  // namespace mcbits

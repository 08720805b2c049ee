#include "mcbits/coder_is.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <unordered_map>

namespace mcbits {

const char* to_string(CouplingMode mode) {
  switch (mode) {
    case CouplingMode::iid_shifts: return "iid";
    case CouplingMode::permutation_shifts: return "permutation";
    case CouplingMode::exhaustive: return "exhaustive";
  }
  return "?";
}

CouplingMode coupling_mode_from_string(const std::string& name) {
  if (name == "iid") return CouplingMode::iid_shifts;
  if (name == "permutation") return CouplingMode::permutation_shifts;
  if (name == "exhaustive") return CouplingMode::exhaustive;
  throw std::invalid_argument("unknown coupling mode '" + name + "'");
}

ShiftCoupling::ShiftCoupling(CouplingMode mode, std::uint64_t seed, std::size_t particles, int precision)
    : mode_(mode), seed_(seed), precision_(precision) {
  if (precision < 1 || precision > AnsMessage::kPrecisionCap) throw ContractError("coupling: bad precision");
  const std::uint64_t space = std::uint64_t{1} << precision;
  mask_ = static_cast<std::uint32_t>(space - 1);
  if (particles == 0 || particles > space) throw ContractError("coupling: need 1 <= N <= 2^r");
  shifts_.resize(particles, 0);
  Rng rng = make_rng(seed, 0xc0u + particles);
  switch (mode) {
    case CouplingMode::iid_shifts:
      for (std::size_t i = 1; i < particles; ++i) shifts_[i] = static_cast<std::uint32_t>(uniform_below(rng, space));
      break;
    case CouplingMode::permutation_shifts: {
      // Partial Fisher-Yates over {1, ..., 2^r - 1}, kept sparse so large r
      // does not materialise the whole permutation.
      std::unordered_map<std::uint32_t, std::uint32_t> moved;
      auto value_at = [&](std::uint32_t slot) {
        auto it = moved.find(slot);
        return it == moved.end() ? slot + 1 : it->second;
      };
      const auto pool = static_cast<std::uint32_t>(space - 1);
      for (std::size_t i = 1; i < particles; ++i) {
        const auto slot = static_cast<std::uint32_t>(i - 1);
        const auto pick = slot + static_cast<std::uint32_t>(uniform_below(rng, pool - slot));
        const std::uint32_t a = value_at(slot), b = value_at(pick);
        moved[slot] = b;
        moved[pick] = a;
        shifts_[i] = b;
      }
      break;
    }
    case CouplingMode::exhaustive:
      if (particles != space) throw ContractError("coupling: exhaustive mode needs N = 2^r");
      std::iota(shifts_.begin(), shifts_.end(), 0u);
      break;
  }
}

namespace {

void check_cis(const CoderContext<MixtureTask>& ctx, Symbol x, const ShiftCoupling& coupling) {
  if (ctx.particles != coupling.size()) throw ContractError("bb_cis: particle count differs from coupling size");
  if (coupling.precision() != ctx.task->q(x).precision())
    throw ContractError("bb_cis: coupling precision differs from posterior precision");
}

std::vector<double> coupled_log2_weights(const MixtureTask& task, Symbol x, const ShiftCoupling& coupling,
                                         std::uint32_t u1) {
  const QuantizedPmf& q = task.q(x);
  std::vector<double> lw(coupling.size());
  for (std::size_t i = 0; i < lw.size(); ++i) {
    const Symbol z = q.inv_cdf(coupling.forward(i, u1));
    lw[i] = task.log2_joint(x, z) - q.log2_probability(z);
  }
  return lw;
}

}  // namespace

void bb_cis_encode(AnsMessage& m, Symbol x, const CoderContext<MixtureTask>& ctx, const ShiftCoupling& coupling,
                   EncodeTrace* trace) {
  const MixtureTask& task = *ctx.task;
  check_cis(ctx, x, coupling);
  const QuantizedPmf& q = task.q(x);
  const std::size_t n = ctx.particles;

  // u_1 uniform on [0, 2^r), drawn as z ~ q and then u_1 uniform on U(z).
  const std::uint32_t u1 = decode_restricted_uniform(m, decode_symbol(m, q), q);
  const auto lw = coupled_log2_weights(task, x, coupling, u1);
  const Symbol j = decode_symbol(m, quantize_log2_weights(lw, ctx.index_precision));
  const std::uint32_t uj = coupling.forward(j, u1);
  const Symbol zj = q.inv_cdf(uj);
  encode_restricted_uniform(m, uj, q);
  task.encode_joint(m, x, zj);
  encode_uniform(m, j, n);
  if (trace) *trace = {j, log2_sum_exp2(lw) - std::log2(static_cast<double>(n))};
}

Symbol bb_cis_decode(AnsMessage& m, const CoderContext<MixtureTask>& ctx, const ShiftCoupling& coupling) {
  const MixtureTask& task = *ctx.task;
  const std::size_t n = ctx.particles;
  const std::uint32_t j = decode_uniform(m, n);
  const auto [x, zj] = task.decode_joint(m);
  check_cis(ctx, x, coupling);
  const QuantizedPmf& q = task.q(x);
  const std::uint32_t uj = decode_restricted_uniform(m, zj, q);
  const std::uint32_t u1 = coupling.inverse(j, uj);
  const auto lw = coupled_log2_weights(task, x, coupling, u1);
  encode_symbol(m, j, quantize_log2_weights(lw, ctx.index_precision));
  encode_restricted_uniform(m, u1, q);
  encode_symbol(m, q.inv_cdf(u1), q);
  return x;
}

double cis_estimator(const CoderContext<MixtureTask>& ctx, Symbol x, const ShiftCoupling& coupling,
                     std::uint32_t u1) {
  check_cis(ctx, x, coupling);
  const auto lw = coupled_log2_weights(*ctx.task, x, coupling, u1);
  return -(log2_sum_exp2(lw) - std::log2(static_cast<double>(lw.size())));
}

std::pair<double, double> extended_space_identity_cis(const CoderContext<MixtureTask>& ctx, Symbol x,
                                                      const ShiftCoupling& coupling, std::uint32_t u1,
                                                      std::size_t j) {
  check_cis(ctx, x, coupling);
  const MixtureTask& task = *ctx.task;
  const QuantizedPmf& q = task.q(x);
  const std::size_t n = coupling.size();
  const int r = q.precision();

  std::vector<std::uint32_t> u(n);
  std::vector<Symbol> z(n);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = coupling.forward(i, u1);
    z[i] = q.inv_cdf(u[i]);
    w[i] = std::exp2(task.log2_joint(x, z[i]) - q.log2_probability(z[i]));
  }
  const double w_sum = std::accumulate(w.begin(), w.end(), 0.0);

  // Q: uniform u_1, deterministic u_i and z_i, then j ~ Cat(w~).
  double q_density = std::ldexp(1.0, -r) * (w[j] / w_sum);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && coupling.forward(i, u1) != u[i]) q_density = 0.0;
    if (q.inv_cdf(u[i]) != z[i]) q_density = 0.0;
  }

  // P: j uniform, z_j from the prior, x | z_j, u_j uniform on U(z_j), the rest
  // deterministic through T_i(T_j^-1(u_j)).
  const auto [lo, hi] = q.u_set_range(z[j]);
  const bool in_set = u[j] >= lo && u[j] < hi;
  double p_density = std::exp2(task.log2_joint(x, z[j])) / static_cast<double>(n) *
                     (in_set ? 1.0 / static_cast<double>(q.count(z[j])) : 0.0);
  const std::uint32_t base = coupling.inverse(j, u[j]);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == j) continue;
    if (coupling.forward(i, base) != u[i] || q.inv_cdf(u[i]) != z[i]) p_density = 0.0;
  }

  const double estimator = std::log2(w_sum / static_cast<double>(n));
  return {std::log2(p_density) - std::log2(q_density), estimator};
}

}  // namespace mcbits

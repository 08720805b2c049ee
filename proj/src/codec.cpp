#include "mcbits/codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

namespace mcbits {

QuantizedPmf::QuantizedPmf(std::vector<std::uint32_t> counts, int precision)
    : counts_(std::move(counts)), precision_(precision) {
  if (precision < 0 || precision > AnsMessage::kPrecisionCap)
    throw DegenerateDistributionError("pmf precision outside [0, 31]");
  if (counts_.empty()) throw DegenerateDistributionError("pmf over empty alphabet");
  cumulative_.resize(counts_.size() + 1);
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    cumulative_[i] = static_cast<std::uint32_t>(std::min<std::uint64_t>(acc, UINT32_MAX));
    acc += counts_[i];
  }
  if (acc != total())
    throw DegenerateDistributionError("pmf counts sum to " + std::to_string(acc) + ", expected 2^" +
                                      std::to_string(precision));
  cumulative_.back() = static_cast<std::uint32_t>(acc);
  coding_shift_ = precision_;
  for (std::uint32_t c : counts_)
    if (c != 0) coding_shift_ = std::min(coding_shift_, std::countr_zero(c));
}

QuantizedPmf QuantizedPmf::uniform(std::size_t size, int precision) {
  const std::uint64_t total = std::uint64_t{1} << precision;
  if (size == 0 || total % size != 0)
    throw DegenerateDistributionError("uniform pmf needs size dividing 2^precision");
  return QuantizedPmf(std::vector<std::uint32_t>(size, static_cast<std::uint32_t>(total / size)), precision);
}

double QuantizedPmf::probability(Symbol z) const {
  return std::ldexp(static_cast<double>(counts_.at(z)), -precision_);
}

double QuantizedPmf::log2_probability(Symbol z) const {
  const std::uint32_t c = counts_.at(z);
  if (c == 0) return -INFINITY;
  return std::log2(static_cast<double>(c)) - precision_;
}

Symbol QuantizedPmf::inv_cdf(std::uint32_t u) const {
  if (u >= total()) throw ContractError("inv_cdf: residue outside [0, 2^r)");
  // first cumulative entry strictly greater than u, minus one
  auto it = std::upper_bound(cumulative_.begin() + 1, cumulative_.end(), u);
  return static_cast<Symbol>(it - cumulative_.begin() - 1);
}

std::pair<std::uint32_t, std::uint32_t> QuantizedPmf::u_set_range(Symbol z) const {
  if (z >= counts_.size() || counts_[z] == 0) throw ContractError("u_set_range: symbol outside support");
  return {cumulative_[z], cumulative_[z] + counts_[z]};
}

QuantizedPmf quantize_pmf(std::span<const double> weights, const std::vector<bool>& support, int precision) {
  const std::size_t k = weights.size();
  if (!support.empty() && support.size() != k) throw ContractError("quantize_pmf: mask size mismatch");
  auto supported = [&](std::size_t i) { return support.empty() || support[i]; };

  double sum = 0.0;
  std::size_t n_support = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!supported(i)) continue;
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
      throw DegenerateDistributionError("quantize_pmf: supported weight must be positive and finite");
    sum += weights[i];
    ++n_support;
  }
  if (n_support == 0) throw DegenerateDistributionError("quantize_pmf: no positive weight");
  const std::uint64_t total = std::uint64_t{1} << precision;
  if (n_support > total) throw DegenerateDistributionError("quantize_pmf: support larger than 2^precision");

  const std::uint64_t spare = total - n_support;
  const double scale = static_cast<double>(spare) / sum;
  std::vector<std::uint32_t> counts(k, 0);
  // (remainder, index) of every supported symbol, for the leftover ranking.
  std::vector<std::pair<double, std::uint32_t>> rank;
  rank.reserve(n_support);
  std::int64_t left = static_cast<std::int64_t>(spare);
  for (std::size_t i = 0; i < k; ++i) {
    if (!supported(i)) continue;
    const double ideal = weights[i] * scale;
    const auto fl = static_cast<std::uint32_t>(ideal);  // ideal >= 0, so truncation is floor
    counts[i] = 1 + fl;
    rank.emplace_back(ideal - fl, static_cast<std::uint32_t>(i));
    left -= fl;
  }

  if (left > 0) {
    // Larger remainder first, ties to the smaller index.
    auto before = [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; };
    // Rounding can leave at most |support| leftovers; wrap around if not.
    while (left > 0) {
      const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(left), rank.size());
      if (take < rank.size()) std::nth_element(rank.begin(), rank.begin() + (take - 1), rank.end(), before);
      for (std::size_t t = 0; t < take; ++t) ++counts[rank[t].second];
      left -= static_cast<std::int64_t>(take);
    }
  } else if (left < 0) {
    // Floating error overshot; take back from the smallest remainders.
    auto before = [](const auto& a, const auto& b) { return a.first != b.first ? a.first < b.first : a.second > b.second; };
    std::sort(rank.begin(), rank.end(), before);
    for (std::size_t t = 0; left < 0; t = (t + 1) % rank.size()) {
      if (counts[rank[t].second] > 1) {
        --counts[rank[t].second];
        ++left;
      }
    }
  }
  return QuantizedPmf(std::move(counts), precision);
}

QuantizedPmf quantize_pmf(std::span<const double> weights, int precision) {
  return quantize_pmf(weights, {}, precision);
}

QuantizedPmf quantize_log2_weights(std::span<const double> log2_weights, int precision) {
  double top = -INFINITY;
  for (double lw : log2_weights) top = std::max(top, lw);
  if (!std::isfinite(top)) throw DegenerateDistributionError("quantize_log2_weights: no finite weight");
  std::vector<double> w(log2_weights.size());
  std::vector<bool> support(log2_weights.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    support[i] = std::isfinite(log2_weights[i]);
    // clamp keeps tiny but supported weights strictly positive
    w[i] = support[i] ? std::exp2(std::max(log2_weights[i] - top, -1000.0)) : 0.0;
  }
  return quantize_pmf(w, support, precision);
}

void encode_symbol(AnsMessage& m, Symbol z, const QuantizedPmf& p) { encode_symbol(m, z, p, 0); }

Symbol decode_symbol(AnsMessage& m, const QuantizedPmf& p) { return decode_symbol(m, p, 0); }

void encode_symbol(AnsMessage& m, Symbol z, const QuantizedPmf& p, Symbol pivot) {
  if (z >= p.size() || pivot >= p.size()) throw ContractError("encode_symbol: symbol outside alphabet");
  const int s = p.coding_shift();
  const auto mask = static_cast<std::uint32_t>(p.total() - 1);
  const Interval iv = p.interval(z);
  m.push(((iv.start - p.cdf(pivot)) & mask) >> s, iv.freq >> s, p.precision() - s);
}

Symbol decode_symbol(AnsMessage& m, const QuantizedPmf& p, Symbol pivot) {
  if (pivot >= p.size()) throw ContractError("decode_symbol: pivot outside alphabet");
  const int s = p.coding_shift();
  const auto mask = static_cast<std::uint32_t>(p.total() - 1);
  const std::uint32_t offset = p.cdf(pivot);
  Symbol z = 0;
  m.pop(p.precision() - s, [&](std::uint32_t u) {
    z = p.inv_cdf(((u << s) + offset) & mask);
    const Interval iv = p.interval(z);
    return Interval{((iv.start - offset) & mask) >> s, iv.freq >> s};
  });
  return z;
}

namespace {

int ceil_log2(std::uint64_t n) { return n <= 1 ? 0 : std::bit_width(n - 1); }

}  // namespace

void encode_uniform(AnsMessage& m, std::uint32_t value, std::uint64_t n) {
  if (n == 0 || value >= n) throw ContractError("encode_uniform: value outside [0, n)");
  if (n == 1) return;
  const int r = ceil_log2(n);
  m.push(value, 1, r);
  if (n == (std::uint64_t{1} << r)) return;
  const auto lo = static_cast<std::uint32_t>(n);
  const auto hi = static_cast<std::uint32_t>((std::uint64_t{1} << r) - n);
  m.pop(r, [&](std::uint32_t u) { return u < lo ? Interval{0, lo} : Interval{lo, hi}; });
}

std::uint32_t decode_uniform(AnsMessage& m, std::uint64_t n) {
  if (n == 0) throw ContractError("decode_uniform: empty range");
  if (n == 1) return 0;
  const int r = ceil_log2(n);
  if (n != (std::uint64_t{1} << r)) m.push(0, static_cast<std::uint32_t>(n), r);
  return m.pop(r, [](std::uint32_t u) { return Interval{u, 1}; });
}

void encode_restricted_uniform(AnsMessage& m, std::uint32_t u, const QuantizedPmf& p) {
  const Symbol z = p.inv_cdf(u);
  m.push(u, 1, p.precision());
  m.pop(p.precision(), [&](std::uint32_t) { return p.interval(z); });
}

std::uint32_t decode_restricted_uniform(AnsMessage& m, Symbol z, const QuantizedPmf& p) {
  if (z >= p.size() || p.count(z) == 0) throw ContractError("decode_restricted_uniform: symbol outside support");
  const Interval iv = p.interval(z);
  m.push(iv.start, iv.freq, p.precision());
  return m.pop(p.precision(), [](std::uint32_t u) { return Interval{u, 1}; });
}

}  // namespace mcbits

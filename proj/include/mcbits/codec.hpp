#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mcbits/ans.hpp"

namespace mcbits {

using Symbol = std::uint32_t;

// Discrete distribution over {0, ..., size()-1} with integer counts summing to
// exactly 2^precision. Immutable once built.
class QuantizedPmf {
 public:
  QuantizedPmf() = default;

  // Takes counts as-is; throws DegenerateDistributionError unless they sum to
  // 2^precision.
  QuantizedPmf(std::vector<std::uint32_t> counts, int precision);

  // Every symbol gets 2^precision / size counts; requires size | 2^precision.
  static QuantizedPmf uniform(std::size_t size, int precision);

  std::size_t size() const noexcept { return counts_.size(); }
  int precision() const noexcept { return precision_; }
  std::uint64_t total() const noexcept { return std::uint64_t{1} << precision_; }

  std::uint32_t count(Symbol z) const { return counts_.at(z); }
  std::uint32_t cdf(Symbol z) const { return cumulative_.at(z); }  // counts strictly before z
  std::span<const std::uint32_t> counts() const noexcept { return counts_; }

  double probability(Symbol z) const;
  double log2_probability(Symbol z) const;  // -inf off support

  // The unique z with cdf(z) <= u < cdf(z) + count(z).
  Symbol inv_cdf(std::uint32_t u) const;

  // U(z) = {u : inv_cdf(u) = z} as [lo, hi). Throws for zero-count symbols.
  std::pair<std::uint32_t, std::uint32_t> u_set_range(Symbol z) const;

  Interval interval(Symbol z) const { return {cumulative_[z], counts_[z]}; }

  // Number of trailing zero bits shared by every count. encode_symbol and
  // decode_symbol code at precision() - coding_shift(), which is the same
  // distribution but takes its bits from the bottom of the head.
  int coding_shift() const noexcept { return coding_shift_; }

  friend bool operator==(const QuantizedPmf& a, const QuantizedPmf& b) noexcept {
    return a.precision_ == b.precision_ && a.counts_ == b.counts_;
  }

 private:
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint32_t> cumulative_;  // size()+1 entries
  int precision_ = 0;
  int coding_shift_ = 0;
};

// Largest-remainder apportionment of 2^precision counts: every supported symbol
// first gets one count, the remaining 2^precision - |support| counts are split
// in proportion to the weights (floors first, leftovers to the largest
// remainders, ties to the smaller index). Unsupported symbols get zero.
// An empty mask means "all symbols supported".
QuantizedPmf quantize_pmf(std::span<const double> weights, const std::vector<bool>& support,
                          int precision);
QuantizedPmf quantize_pmf(std::span<const double> weights, int precision);

// Same apportionment for weights given as log2 values; -inf marks symbols off
// the support. Used for normalised importance weights.
QuantizedPmf quantize_log2_weights(std::span<const double> log2_weights, int precision);

void encode_symbol(AnsMessage& m, Symbol z, const QuantizedPmf& p);
Symbol decode_symbol(AnsMessage& m, const QuantizedPmf& p);
// Same distribution with the alphabet order rotated to start at pivot, so z
// occupies [(cdf(z) - cdf(pivot)) mod 2^r, ... + count(z)).
void encode_symbol(AnsMessage& m, Symbol z, const QuantizedPmf& p, Symbol pivot);
Symbol decode_symbol(AnsMessage& m, const QuantizedPmf& p, Symbol pivot);

// Exact uniform over {0, ..., n-1} for any n in [1, 2^31]: costs log2(n) bits.
// For n that is not a power of two this is a push at precision ceil(log2 n)
// followed by a pop of the two-bucket split [n, 2^r - n].
void encode_uniform(AnsMessage& m, std::uint32_t value, std::uint64_t n);
std::uint32_t decode_uniform(AnsMessage& m, std::uint64_t n);

// Uniform over the restricted set U(inv_cdf(u)) of p; costs log2 count(z) bits.
// Realised as a full-precision uniform push of u followed by a pop with p,
// which leaves exactly the offset of u inside U(z) on the message.
void encode_restricted_uniform(AnsMessage& m, std::uint32_t u, const QuantizedPmf& p);
std::uint32_t decode_restricted_uniform(AnsMessage& m, Symbol z, const QuantizedPmf& p);

}  // namespace mcbits

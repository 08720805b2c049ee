#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mcbits/codec.hpp"
#include "mcbits/random.hpp"

using namespace mcbits;

namespace {

std::vector<std::uint32_t> counts_of(const QuantizedPmf& p) { return {p.counts().begin(), p.counts().end()}; }

std::vector<double> random_weights(Rng& rng, std::size_t k) {
  std::vector<double> w(k);
  for (auto& v : w) v = 1e-3 + uniform_real(rng);
  return w;
}

Symbol draw(const QuantizedPmf& p, Rng& rng) {
  return p.inv_cdf(static_cast<std::uint32_t>(uniform_below(rng, p.total())));
}

}  // namespace

TEST_CASE("quantize_pmf small cases") {
  CHECK(counts_of(quantize_pmf(std::vector<double>{1, 1, 2}, 2)) == std::vector<std::uint32_t>{1, 1, 2});
  CHECK(counts_of(quantize_pmf(std::vector<double>{1, 1, 1}, 2)) == std::vector<std::uint32_t>{2, 1, 1});
  const auto masked = quantize_pmf(std::vector<double>{5, 0, 1}, {true, false, true}, 3);
  CHECK(counts_of(masked) == std::vector<std::uint32_t>{6, 0, 2});
}

TEST_CASE("quantize_pmf rejects degenerate input") {
  CHECK_THROWS_AS(quantize_pmf(std::vector<double>{0, 0}, 4), DegenerateDistributionError);
  CHECK_THROWS_AS(quantize_pmf(std::vector<double>{1, 0}, 4), DegenerateDistributionError);
  CHECK_THROWS_AS(quantize_pmf(std::vector<double>{1, 1, 1, 1, 1}, 2), DegenerateDistributionError);
  CHECK_THROWS_AS(QuantizedPmf({1, 2}, 2), DegenerateDistributionError);
}

TEST_CASE("quantize_pmf error bound on random 256-ary weights") {
  Rng rng = make_rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const auto w = random_weights(rng, 256);
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    const auto p = quantize_pmf(w, 16);
    double worst = 0.0;
    for (Symbol z = 0; z < 256; ++z) worst = std::max(worst, std::abs(p.probability(z) - w[z] / sum));
    CHECK(worst <= 256.0 / 65536.0);
  }
}

TEST_CASE("quantize_pmf is scale invariant") {
  Rng rng = make_rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    const auto w = random_weights(rng, 1 + uniform_below(rng, 300));
    const auto base = counts_of(quantize_pmf(w, 16));
    for (double c : {0.125, 3.7, 1e6}) {
      std::vector<double> scaled(w);
      for (auto& v : scaled) v *= c;
      CHECK(counts_of(quantize_pmf(scaled, 16)) == base);
    }
  }
}

TEST_CASE("quantize_log2_weights keeps every finite weight in the support") {
  const auto p = quantize_log2_weights(std::vector<double>{0.0, -2000.0, -INFINITY, -1.0}, 12);
  CHECK(p.count(0) > 0);
  CHECK(p.count(1) == 1);
  CHECK(p.count(2) == 0);
  CHECK(p.count(3) > 0);
}

TEST_CASE("inv_cdf and u_set_range on counts [1,3]") {
  const QuantizedPmf p({1, 3}, 2);
  CHECK(p.inv_cdf(0) == 0);
  for (std::uint32_t u : {1u, 2u, 3u}) CHECK(p.inv_cdf(u) == 1);
  CHECK(p.u_set_range(1) == std::pair<std::uint32_t, std::uint32_t>{1, 4});
  CHECK(p.inv_cdf(p.cdf(1) - 1) == 0);
  CHECK_THROWS_AS(p.inv_cdf(4), ContractError);
  const QuantizedPmf gap({2, 0, 2}, 2);
  CHECK_THROWS_AS(gap.u_set_range(1), ContractError);
}

TEST_CASE("inverse CDF buckets partition the residue space") {
  Rng rng = make_rng(10);
  auto w = random_weights(rng, 77);
  w[5] = 0.0;
  std::vector<bool> support(77, true);
  support[5] = false;
  const auto p = quantize_pmf(w, support, 16);
  std::vector<std::uint32_t> seen(77, 0);
  for (std::uint32_t u = 0; u < p.total(); ++u) ++seen[p.inv_cdf(u)];
  CHECK(seen == counts_of(p));
  for (Symbol z = 0; z < 77; ++z) {
    if (p.count(z) == 0) continue;
    const auto [lo, hi] = p.u_set_range(z);
    CHECK(hi - lo == p.count(z));
    CHECK(p.inv_cdf(lo) == z);
    CHECK(p.inv_cdf(hi - 1) == z);
  }
}

TEST_CASE("encode/decode symbol round trip and rejection of off-support symbols") {
  const QuantizedPmf p({3, 0, 5, 8}, 4);
  AnsMessage m = AnsMessage::random(1, 2);
  const AnsMessage before = m;
  for (Symbol s : {0u, 2u, 3u, 3u, 0u}) encode_symbol(m, s, p);
  for (Symbol s : {0u, 3u, 3u, 2u, 0u}) CHECK(decode_symbol(m, p) == s);
  CHECK(m == before);
  CHECK_THROWS_AS(encode_symbol(m, 1, p), ContractError);
  CHECK_THROWS_AS(encode_symbol(m, 4, p), ContractError);
}

TEST_CASE("decoding from a random message samples the pmf") {
  const auto p = quantize_pmf(std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8}, 16);
  AnsMessage m = AnsMessage::random(3, 4000);
  std::vector<int> hist(8, 0);
  const int n = 20000;
  for (int i = 0; i < n; ++i) ++hist[decode_symbol(m, p)];
  double chi2 = 0.0;
  for (Symbol z = 0; z < 8; ++z) {
    const double e = n * p.probability(z);
    chi2 += (hist[z] - e) * (hist[z] - e) / e;
  }
  CHECK(chi2 < 18.4753);  // upper 1% point, 7 degrees of freedom
}

TEST_CASE("symbol cost matches r - log2 count") {
  Rng rng = make_rng(12);
  const auto p = quantize_pmf(random_weights(rng, 50), 16);
  AnsMessage m;
  double info = 0.0;
  for (int i = 0; i < 50000; ++i) {
    const Symbol s = draw(p, rng);
    info += p.precision() - std::log2(p.count(s));
    encode_symbol(m, s, p);
  }
  CHECK(std::abs(static_cast<double>(m.bit_length() - 32) - info) <= 0.001 * info);
}

TEST_CASE("pmfs with shared power-of-two factors code at reduced precision") {
  const auto u = QuantizedPmf::uniform(256, 16);
  CHECK(u.coding_shift() == 8);
  CHECK(QuantizedPmf({4, 8, 4}, 4).coding_shift() == 2);
  CHECK(QuantizedPmf({0, 16}, 4).coding_shift() == 4);
  CHECK(QuantizedPmf({3, 13}, 4).coding_shift() == 0);

  // The decoded symbol comes from the lowest head bits.
  const AnsMessage start(0x1'0000'1234ULL, {0xdeadbeef});
  AnsMessage m = start;
  CHECK(decode_symbol(m, u) == 0x34);
  encode_symbol(m, 0x34, u);
  CHECK(m == start);

  const QuantizedPmf p({4, 8, 4}, 4);
  AnsMessage a = AnsMessage::random(3, 8), b = a;
  for (Symbol s : {0u, 1u, 2u, 1u}) encode_symbol(a, s, p);
  for (Symbol s : {1u, 2u, 1u, 0u}) CHECK(decode_symbol(a, p) == s);
  CHECK(a == b);
}

TEST_CASE("rotated alphabet order") {
  // counts {4, 8, 4} at r = 4, pivot 1: symbol 1 at [0, 8), 2 at [8, 12), 0 at [12, 16).
  const QuantizedPmf p({4, 8, 4}, 4);
  const AnsMessage start(0x1'0000'0003ULL, {7});
  for (auto [low, want] : {std::pair{0u, 1u}, {1u, 1u}, {2u, 2u}, {3u, 0u}}) {
    AnsMessage m(0x1'0000'0000ULL | low, {7});
    CHECK(decode_symbol(m, p, 1) == want);
  }
  AnsMessage m = start;
  const Symbol z = decode_symbol(m, p, 1);
  encode_symbol(m, z, p, 1);
  CHECK(m == start);

  Rng rng = make_rng(16);
  const auto q = quantize_pmf(random_weights(rng, 40), 16);
  AnsMessage a = AnsMessage::random(4, 8);
  const AnsMessage before = a;
  std::vector<std::pair<Symbol, Symbol>> pushed(3000);
  double info = 0.0;
  for (auto& [s, pivot] : pushed) {
    s = draw(q, rng);
    pivot = static_cast<Symbol>(uniform_below(rng, 40));
    info += q.precision() - std::log2(q.count(s));
    encode_symbol(a, s, q, pivot);
  }
  CHECK(std::abs(static_cast<double>(a.bit_length() - before.bit_length()) - info) <= 64.0);
  for (auto it = pushed.rbegin(); it != pushed.rend(); ++it) CHECK(decode_symbol(a, q, it->second) == it->first);
  CHECK(a == before);
  CHECK_THROWS_AS(encode_symbol(a, 0, q, 40), ContractError);
}

TEST_CASE("exact uniform over any n") {
  Rng rng = make_rng(13);
  for (std::uint64_t n : {1ull, 2ull, 3ull, 7ull, 100ull, 1000ull, 65537ull, 1ull << 31}) {
    AnsMessage m = AnsMessage::random(n, 8);
    const AnsMessage before = m;
    std::vector<std::uint32_t> vals(2000);
    for (auto& v : vals) {
      v = static_cast<std::uint32_t>(uniform_below(rng, n));
      encode_uniform(m, v, n);
    }
    const double bits = static_cast<double>(m.bit_length() - before.bit_length());
    CHECK(std::abs(bits - 2000 * std::log2(static_cast<double>(n))) <= 64.0);
    for (auto it = vals.rbegin(); it != vals.rend(); ++it) CHECK(decode_uniform(m, n) == *it);
    CHECK(m == before);
  }
  AnsMessage m;
  CHECK_THROWS_AS(encode_uniform(m, 5, 5), ContractError);
}

TEST_CASE("decode_uniform from random bits is uniform for non-dyadic n") {
  AnsMessage m = AnsMessage::random(14, 3000);
  // Skip the minimal head.
  decode_uniform(m, std::uint64_t{1} << 31);
  std::vector<int> hist3(3, 0);
  for (int i = 0; i < 30000; ++i) ++hist3[decode_uniform(m, 3)];
  double chi2 = 0.0;
  for (int c : hist3) chi2 += (c - 10000.0) * (c - 10000.0) / 10000.0;
  CHECK(chi2 < 9.2103);  // upper 1% point, 2 degrees of freedom
}

TEST_CASE("restricted uniform codes the offset inside U(z)") {
  const QuantizedPmf p({5, 0, 9, 2}, 4);
  Rng rng = make_rng(15);
  AnsMessage m = AnsMessage::random(15, 8);
  const AnsMessage before = m;
  std::vector<std::uint32_t> us(3000);
  double info = 0.0;
  for (auto& u : us) {
    do u = static_cast<std::uint32_t>(uniform_below(rng, 16));
    while (p.count(p.inv_cdf(u)) == 0);
    info += std::log2(p.count(p.inv_cdf(u)));
    encode_restricted_uniform(m, u, p);
  }
  CHECK(std::abs(static_cast<double>(m.bit_length() - before.bit_length()) - info) <= 64.0);
  for (auto it = us.rbegin(); it != us.rend(); ++it) CHECK(decode_restricted_uniform(m, p.inv_cdf(*it), p) == *it);
  CHECK(m == before);
}

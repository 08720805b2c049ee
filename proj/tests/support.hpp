#pragma once

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mcbits/ans.hpp"
#include "mcbits/models.hpp"

namespace mcbits::test {

inline std::vector<Symbol> flatten(const Dataset& data) {
  std::vector<Symbol> out;
  for (const auto& item : data) out.push_back(item.at(0));
  return out;
}

// Encodes `items` in order onto a padded random message, decodes them back in
// reverse, and checks both the items and the restored message. Returns the
// net growth in bits per item.
template <typename Obs, typename Enc, typename Dec>
double roundtrip(const std::vector<Obs>& items, Enc&& enc, Dec&& dec, std::uint64_t seed = 1,
                 std::size_t pad_words = 4096) {
  const AnsMessage initial = AnsMessage::random(seed, pad_words);
  AnsMessage m = initial;
  for (const auto& x : items) enc(m, x);
  const double net = (static_cast<double>(m.bit_length()) - static_cast<double>(initial.bit_length())) /
                     static_cast<double>(items.size());
  bool all_equal = true;
  for (std::size_t i = items.size(); i-- > 0;)
    if (!(dec(m) == items[i])) all_equal = false;
  CHECK(all_equal);
  CHECK(m == initial);
  return net;
}

// Mean and standard error.
struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

inline Moments moments(const std::vector<double>& v) {
  double s = 0.0, sq = 0.0;
  for (double a : v) {
    s += a;
    sq += a * a;
  }
  const double n = static_cast<double>(v.size());
  const double mean = s / n;
  const double var = (sq - n * mean * mean) / (n - 1);
  return {mean, std::sqrt(std::max(var, 0.0) / n)};
}

}  // namespace mcbits::test

#include "mcbits/ans.hpp"

#include <algorithm>
#include <string>

#include "mcbits/random.hpp"

namespace mcbits {

AnsMessage::AnsMessage(std::uint64_t head, std::vector<std::uint32_t> tail)
    : head_(head), tail_(std::move(tail)), low_water_(tail_.size()) {
  if (head_ < kHeadMin) throw ContractError("ans message: head below renormalisation bound");
}

AnsMessage AnsMessage::random(std::uint64_t seed, std::size_t pad_words) {
  Rng rng = make_rng(seed, 0xa5a5);
  std::vector<std::uint32_t> tail(pad_words);
  for (std::size_t i = 0; i < pad_words; ++i) tail[pad_words - 1 - i] = static_cast<std::uint32_t>(rng() >> 32);
  return AnsMessage(kHeadMin, std::move(tail));
}

void AnsMessage::check_precision(int precision) {
  if (precision < 0 || precision > kPrecisionCap)
    throw ContractError("ans: precision " + std::to_string(precision) + " outside [0, 31]");
}

void AnsMessage::push(std::uint32_t start, std::uint32_t freq, int precision) {
  check_precision(precision);
  const std::uint64_t total = std::uint64_t{1} << precision;
  if (freq == 0) throw ContractError("ans push: zero frequency (symbol outside support)");
  if (std::uint64_t{start} + freq > total) throw ContractError("ans push: interval exceeds 2^precision");
  if (freq == total) return;  // certain symbol, identity map

  const std::uint64_t x_max = std::uint64_t{freq} << (kHeadBits - precision);
  if (head_ >= x_max) {
    tail_.push_back(static_cast<std::uint32_t>(head_));
    head_ >>= kWordBits;
  }
  head_ = ((head_ / freq) << precision) + (head_ % freq) + start;
}

std::vector<std::uint8_t> AnsMessage::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(1 + 4 * tail_.size() + 8);
  out.push_back(static_cast<std::uint8_t>(kWordBits));
  for (std::uint32_t w : tail_)
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(w >> (8 * b)));
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(head_ >> (8 * b)));
  return out;
}

AnsMessage AnsMessage::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.empty() || bytes[0] != kWordBits)
    throw ParseError("ans message: unsupported word width header", 1);
  const std::size_t body = bytes.size() - 1;
  if (body < 8 || (body - 8) % 4 != 0) throw ParseError("ans message: truncated payload", 1);
  const std::size_t words = (body - 8) / 4;
  std::vector<std::uint32_t> tail(words);
  std::size_t pos = 1;
  for (std::size_t i = 0; i < words; ++i, pos += 4) {
    std::uint32_t w = 0;
    for (int b = 0; b < 4; ++b) w |= std::uint32_t{bytes[pos + b]} << (8 * b);
    tail[i] = w;
  }
  std::uint64_t head = 0;
  for (int b = 0; b < 8; ++b) head |= std::uint64_t{bytes[pos + b]} << (8 * b);
  if (head < kHeadMin) throw ParseError("ans message: head below renormalisation bound", 1);
  return AnsMessage(head, std::move(tail));
}

}  // namespace mcbits

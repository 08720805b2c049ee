#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mcbits/error.hpp"

namespace mcbits {

// Interval [start, start + freq) of the residue space [0, 2^precision).
struct Interval {
  std::uint32_t start;
  std::uint32_t freq;
};

// Streaming rANS message: a 64-bit head kept in [2^32, 2^64) plus a LIFO stack
// of 32-bit tail words. Every push/pop is an exact bijection on this state, so
// pushes and pops with matching intervals undo each other bit for bit.
class AnsMessage {
 public:
  static constexpr int kWordBits = 32;
  static constexpr int kHeadBits = 64;
  static constexpr int kPrecisionCap = 31;
  static constexpr std::uint64_t kHeadMin = std::uint64_t{1} << kWordBits;

  // Minimal head, empty tail.
  AnsMessage() = default;
  AnsMessage(std::uint64_t head, std::vector<std::uint32_t> tail);

  // Minimal head plus `pad_words` pseudorandom tail words. The word nearest
  // the head is generated first, so two messages with the same seed consume
  // identical words regardless of pad depth.
  static AnsMessage random(std::uint64_t seed, std::size_t pad_words);

  void push(std::uint32_t start, std::uint32_t freq, int precision);

  // Pops the residue u = head mod 2^precision, advances the state with the
  // interval returned by locate(u) and returns u. Throws UnderflowError (state
  // untouched) when renormalisation needs a word from an empty tail.
  template <typename Locate>
  std::uint32_t pop(int precision, Locate&& locate);

  // Bits held by the message: position of the head's leading one bit plus the
  // tail words. A fresh message therefore has bit_length() == 32.
  std::size_t bit_length() const noexcept {
    return static_cast<std::size_t>(std::bit_width(head_) - 1) + kWordBits * tail_.size();
  }

  std::uint64_t head() const noexcept { return head_; }
  std::span<const std::uint32_t> tail() const noexcept { return tail_; }
  std::size_t tail_words() const noexcept { return tail_.size(); }

  // Lowest tail depth reached since the last reset. Not part of the message
  // value; harness code uses it to find the minimal initial pad.
  std::size_t low_water() const noexcept { return low_water_; }
  void reset_low_water() noexcept { low_water_ = tail_.size(); }

  // Little-endian dump: 1 header byte (word width in bits), tail words bottom
  // first, then the 64-bit head.
  std::vector<std::uint8_t> serialize() const;
  static AnsMessage deserialize(std::span<const std::uint8_t> bytes);

  friend bool operator==(const AnsMessage& a, const AnsMessage& b) noexcept {
    return a.head_ == b.head_ && a.tail_ == b.tail_;
  }

 private:
  static void check_precision(int precision);

  std::uint64_t head_ = kHeadMin;
  std::vector<std::uint32_t> tail_;
  std::size_t low_water_ = 0;
};

template <typename Locate>
std::uint32_t AnsMessage::pop(int precision, Locate&& locate) {
  check_precision(precision);
  if (precision == 0) return 0;
  const std::uint64_t mask = (std::uint64_t{1} << precision) - 1;
  const auto u = static_cast<std::uint32_t>(head_ & mask);
  const Interval iv = locate(u);
  if (iv.freq == 0 || u < iv.start || u - iv.start >= iv.freq)
    throw ContractError("ans pop: locate returned an interval not containing the residue");
  std::uint64_t next = std::uint64_t{iv.freq} * (head_ >> precision) + (u - iv.start);
  if (next < kHeadMin) {
    if (tail_.empty()) throw UnderflowError("ans pop: message exhausted (insufficient initial bits)");
    next = (next << kWordBits) | tail_.back();
    tail_.pop_back();
    if (tail_.size() < low_water_) low_water_ = tail_.size();
  }
  head_ = next;
  return u;
}

}  // namespace mcbits

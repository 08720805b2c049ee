#pragma once

#include <stdexcept>
#include <string>

namespace mcbits {

// Violated precondition of a coding primitive (e.g. pushing a zero-frequency
// interval). Always a bug in the caller.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The message ran out of tail words while decoding: the initial message did not
// carry enough bits for the requested decode.
class UnderflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateDistributionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Decoded data did not reproduce the encoder input.
class RoundTripError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mcbits

#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace tempmine {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;
using Timestamp = std::int64_t;
using CurrencyId = std::uint16_t;
using Count = std::int64_t;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();
inline constexpr EdgeId kNoEdge = std::numeric_limits<EdgeId>::max();
inline constexpr Timestamp kMinTime = std::numeric_limits<Timestamp>::min() / 4;
inline constexpr Timestamp kMaxTime = std::numeric_limits<Timestamp>::max() / 4;

enum class Direction : std::uint8_t { In, Out };

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data; carries the 1-based line of the offending row.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Broken internal contract (plan/graph mismatch, corrupted cache, ...).
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace tempmine

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcjesp {

using StateId = std::int32_t;
using ActionId = std::int32_t;
using ObsId = std::int32_t;
using JointIndex = std::int32_t;
using NodeId = std::int32_t;

inline constexpr int kMaxAgents = 8;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed `.dpomdp` text; carries a 1-based line/column.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// A name that does not resolve to a declared state/action/observation.
class ResolutionError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Probability rows or parameters that break the model invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Policy/model alphabet or arity mismatch, or an out-of-range index.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class ImpossibleObservation : public Error {
 public:
  using Error::Error;
};

/// Mixed-radix encoding of per-agent components into a joint index.
/// Agent 0 is the most significant digit.
class JointSpace {
 public:
  JointSpace() = default;
  explicit JointSpace(std::vector<int> sizes);

  int num_agents() const { return static_cast<int>(sizes_.size()); }
  int size(int agent) const { return sizes_.at(agent); }
  const std::vector<int>& sizes() const { return sizes_; }
  int total() const { return total_; }

  JointIndex encode(std::span<const int> components) const;
  void decode(JointIndex joint, std::span<int> components) const;
  std::vector<int> decode(JointIndex joint) const;
  int component(JointIndex joint, int agent) const {
    return static_cast<int>((joint / strides_[agent]) % sizes_[agent]);
  }
  int stride(int agent) const { return strides_[agent]; }

  friend bool operator==(const JointSpace& a, const JointSpace& b) { return a.sizes_ == b.sizes_; }

 private:
  std::vector<int> sizes_;
  std::vector<int> strides_;
  int total_ = 0;
};

}  // namespace mcjesp

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seqthink/objects/op.hpp"

namespace seqthink::objects {

/// Read/write register. `write v` -> ok, `read` -> current value.
class RegisterSpec {
 public:
  using State = std::int64_t;

  explicit RegisterSpec(std::int64_t initial = 0) : initial_(initial) {}
  static constexpr std::string_view name() { return "register"; }
  State initial() const { return initial_; }
  Transition<State> apply(const State& state, const Op& op) const;
  std::string describe(const State& state) const { return std::to_string(state); }

 private:
  std::int64_t initial_;
};

/// Counter. `inc` -> new count, `read` -> count.
class CounterSpec {
 public:
  using State = std::int64_t;

  static constexpr std::string_view name() { return "counter"; }
  State initial() const { return 0; }
  Transition<State> apply(const State& state, const Op& op) const;
  std::string describe(const State& state) const { return std::to_string(state); }
};

/// Bounded stack. `push v` -> ok or full, `pop` -> top value or empty.
class StackSpec {
 public:
  using State = std::vector<std::int64_t>;

  static constexpr std::size_t kDefaultCapacity = 16;

  explicit StackSpec(std::size_t capacity = kDefaultCapacity);
  static constexpr std::string_view name() { return "stack"; }
  std::size_t capacity() const noexcept { return capacity_; }
  State initial() const { return {}; }
  Transition<State> apply(const State& state, const Op& op) const;
  std::string describe(const State& state) const;

 private:
  std::size_t capacity_;
};

/// One-shot consensus as a sequential object: the first `propose v` fixes
/// the decision, every propose returns it.
class ConsensusSpec {
 public:
  using State = std::optional<std::int64_t>;

  static constexpr std::string_view name() { return "consensus"; }
  State initial() const { return std::nullopt; }
  Transition<State> apply(const State& state, const Op& op) const;
  std::string describe(const State& state) const;
};

}  // namespace seqthink::objects

#pragma once

#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "seqthink/sim/ids.hpp"

namespace seqthink::objects {

/// An operation invocation on a sequential object: name, optional textual
/// argument, and the invoking process (only the ledger uses the latter).
/// Text form is `name` or `name arg`, e.g. `push 3`, `pop`, `append tx1`.
struct Op {
  std::string name;
  std::string arg;
  sim::ProcessId caller;

  bool operator==(const Op&) const = default;
  auto operator<=>(const Op&) const = default;
};

std::string to_string(const Op& op);
Op parse_op(std::string_view text, sim::ProcessId caller = {});

/// The operation is not in the object's alphabet, or its argument is invalid.
struct UnknownOp : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Integer argument of `op`; throws UnknownOp if absent or malformed.
std::int64_t int_arg(const Op& op);

template <class State>
struct Transition {
  State state;
  std::string result;
};

/// A deterministic sequential specification: initial state plus a pure
/// transition function delta(state, op) -> (state', result). States must be
/// totally ordered so the checker can memoize on them.
template <class S>
concept SequentialSpec = requires(const S& spec, const typename S::State& state, const Op& op) {
  { spec.initial() } -> std::same_as<typename S::State>;
  { spec.apply(state, op) } -> std::same_as<Transition<typename S::State>>;
  { spec.describe(state) } -> std::convertible_to<std::string>;
  { S::name() } -> std::convertible_to<std::string_view>;
} && std::totally_ordered<typename S::State> && std::copyable<typename S::State>;

}  // namespace seqthink::objects

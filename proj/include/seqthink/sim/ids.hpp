#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <string>

namespace seqthink::sim {

/// Identity of a simulated process, 1-based as in p_1 ... p_n.
struct ProcessId {
  int value = 0;

  constexpr std::size_t index() const noexcept { return static_cast<std::size_t>(value - 1); }
  constexpr auto operator<=>(const ProcessId&) const = default;
};

constexpr ProcessId pid(int v) noexcept { return ProcessId{v}; }

inline std::string to_string(ProcessId p) { return "p" + std::to_string(p.value); }

}  // namespace seqthink::sim

template <>
struct std::hash<seqthink::sim::ProcessId> {
  std::size_t operator()(seqthink::sim::ProcessId p) const noexcept {
    return std::hash<int>{}(p.value);
  }
};

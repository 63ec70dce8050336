#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "seqthink/sim/ids.hpp"
#include "seqthink/sim/scenario.hpp"

namespace seqthink::sim {

struct Message;

enum class StepKind { local, deliver };

/// One enabled atomic action, offered to the adversary.
struct ProcessStep {
  ProcessId pid;
  StepKind kind = StepKind::local;
  /// Thread index for local steps, message id for deliveries.
  std::uint64_t slot = 0;
  /// Kernel step since which this action has been continuously enabled.
  std::uint64_t enabled_since = 0;
  /// The message for deliveries; only valid during the decision.
  const Message* message = nullptr;
};

/// Chooses the next step among the enabled ones.
///
/// Round-robin rotates over processes and takes each process's oldest step.
/// Seeded-random draws uniformly from the seed; under `Fairness::fair` a step
/// that has waited `window()` steps is forced. Scripted follows its script,
/// skipping entries that match nothing, then falls back to round-robin.
/// Exploration mode replays a prefix of choice indices (0 afterwards) and
/// records the branching factor of every decision, for exhaustive search.
class Adversary {
 public:
  Adversary(AdversaryKind kind, Fairness fairness, std::uint64_t seed, int n,
            std::vector<ScriptEntry> script = {});

  static Adversary explorer(int n, std::vector<std::size_t> prefix);

  /// Returns an index into `enabled`, which must be non-empty.
  std::size_t choose(std::span<const ProcessStep> enabled, std::uint64_t now);

  std::uint64_t window() const noexcept { return window_; }

  /// Exploration record: choice index and branching factor per decision.
  const std::vector<std::size_t>& choices() const noexcept { return choices_; }
  const std::vector<std::size_t>& branching() const noexcept { return branching_; }

  /// Script entries that were skipped because nothing matched them.
  std::size_t skipped_script_entries() const noexcept { return skipped_; }

 private:
  std::size_t round_robin(std::span<const ProcessStep> enabled);
  std::optional<std::size_t> scripted(std::span<const ProcessStep> enabled);

  AdversaryKind kind_;
  Fairness fairness_;
  int n_;
  std::uint64_t window_;
  std::mt19937_64 rng_;
  std::vector<ScriptEntry> script_;
  std::size_t cursor_ = 0;
  std::size_t skipped_ = 0;
  int last_pid_ = 0;

  bool exploring_ = false;
  std::vector<std::size_t> prefix_;
  std::vector<std::size_t> choices_;
  std::vector<std::size_t> branching_;
};

/// Fairness window for n processes.
constexpr std::uint64_t fairness_window(int n) noexcept {
  return static_cast<std::uint64_t>(n) * 16;
}

}  // namespace seqthink::sim

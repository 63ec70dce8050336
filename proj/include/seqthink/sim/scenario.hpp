#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqthink/sim/ids.hpp"

namespace seqthink::sim {

enum class Fairness { fair, unfair };
enum class AdversaryKind { round_robin, seeded_random, scripted };

/// One entry of a scripted schedule.
///
/// Text forms: `p3` (any step of p3, local steps first), `p3:local`,
/// `p3<p1` (deliver to p3 the oldest message from p1) and `p3<p1:WRITE`
/// (same, restricted to messages whose first payload token is WRITE).
struct ScriptEntry {
  enum class Target { any, local, deliver };

  ProcessId pid;
  Target target = Target::any;
  std::optional<ProcessId> from;
  std::string message_kind;

  bool operator==(const ScriptEntry&) const = default;
};

std::string to_string(const ScriptEntry& entry);
/// Throws std::invalid_argument on malformed text.
ScriptEntry parse_script_entry(std::string_view text);

inline constexpr std::uint64_t kDefaultStepBudget = 100'000;

/// Everything needed to replay one run bit-for-bit.
struct Scenario {
  int n = 2;
  std::string protocol = "peterson";
  /// Process -> kernel step after which it is crashed. Absent means never.
  std::map<ProcessId, std::uint64_t> crash_plan;
  Fairness fairness = Fairness::fair;
  AdversaryKind adversary = AdversaryKind::seeded_random;
  std::uint64_t seed = 0;
  std::uint64_t step_budget = kDefaultStepBudget;
  std::vector<ScriptEntry> script;
  /// Allows crash plans beyond the protocol's tolerance.
  bool violating = false;
  /// Canned demonstration; unlocks debug toggles.
  bool demo = false;

  // Workload knobs, interpreted by the protocol runners.
  std::string object = "register";
  int ops = 3;
  int rounds = 2;
  int cs_steps = 1;
  /// Explicit per-process operation lists; overrides generated workloads.
  std::map<ProcessId, std::vector<std::string>> workload;
  bool skip_read_phase2 = false;

  bool operator==(const Scenario&) const = default;
};

/// A scenario field failed to parse or validate.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Parses the `key = value` scenario format (see README). Unknown keys and
/// malformed values raise ScenarioError naming the field.
Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::filesystem::path& path);

/// Inverse of parse_scenario.
std::string to_text(const Scenario& s);

/// Protocol-independent checks: n >= 1, budget > 0, process ids in range.
void validate_basic(const Scenario& s);

std::string_view to_string(Fairness f) noexcept;
std::string_view to_string(AdversaryKind k) noexcept;

}  // namespace seqthink::sim

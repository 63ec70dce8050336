#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seqthink/lincheck/check.hpp"
#include "seqthink/lincheck/history.hpp"
#include "seqthink/sim/kernel.hpp"
#include "seqthink/sim/scenario.hpp"

namespace seqthink::runner {

enum class Status { pass, violation, undecided };

std::string_view to_string(Status s) noexcept;

/// One property evaluated on a finished run.
struct Check {
  std::string name;
  Status status = Status::pass;
  std::string detail;
};

struct RunReport {
  sim::Scenario scenario;
  sim::RunOutcome outcome;
  sim::EventLog log;
  std::string digest;
  std::vector<Check> checks;
  /// Object whose history went through lincheck, if any.
  std::string object;
  std::optional<lincheck::History> history;
  std::optional<lincheck::Verdict> verdict;

  /// Worst status over all checks.
  Status status() const noexcept;
  /// 0 all checks pass, 1 a property is violated, 2 undecided or budget.
  int exit_code() const noexcept;
  const Check* find(const std::string& name) const;
};

/// Known protocol identifiers.
const std::vector<std::string>& protocols();

/// Crashes a protocol is declared to tolerate with n processes.
int crash_tolerance(const std::string& protocol, int n);

/// validate_basic plus protocol-specific rules: known protocol and object,
/// process count, crash plan within tolerance unless `violating`, and the
/// phase 2 toggle only in demo scenarios. Throws sim::ScenarioError.
void validate(const sim::Scenario& s);

/// The explicit workload if the scenario has one, else `ops` operations per
/// process drawn from a generator seeded by the scenario seed.
std::map<sim::ProcessId, std::vector<std::string>> workload(const sim::Scenario& s);

/// Validates, runs once, and evaluates every property that applies.
RunReport run_scenario(const sim::Scenario& s);

/// Human-readable summary lines ("linearizable: yes", ...).
std::vector<std::string> summary(const RunReport& r);

}  // namespace seqthink::runner

#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqthink/registers.hpp"
#include "seqthink/sim/kernel.hpp"

namespace seqthink::mutex {

enum class Flag { down, up };
std::ostream& operator<<(std::ostream& out, Flag f);

/// Log object used for acquire/release invocations and responses.
inline constexpr const char* kObject = "mutex";

struct UsageError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Two-sided Peterson instance: FLAG[1], FLAG[2], LAST.
///
/// Sides are 1 and 2. When `owners` is given, FLAG[k] may only be written by
/// owners[k-1] (the plain two-process lock); tournament nodes are shared by
/// whichever process currently represents a subtree, so they leave it open.
class PetersonPair {
 public:
  /// Registers are named `<prefix>FLAG[k]` and `<prefix>LAST`.
  PetersonPair(std::string name, std::string prefix, std::optional<std::pair<sim::ProcessId, sim::ProcessId>> owners);

  /// FLAG[i] <- up; LAST <- i; wait (FLAG[j] = down or LAST != i). The wait
  /// reads FLAG[j] and then LAST, one register access per step, and retries.
  /// Logs "doorway <name>" in the LAST write's step and "won <name>" in the
  /// step the wait passes.
  sim::Task<void> acquire(sim::Process self, int side);
  /// FLAG[i] <- down.
  sim::Task<void> release(sim::Process self, int side);

  AtomicRegister<Flag>& flag(int side) { return *flags_.at(static_cast<std::size_t>(side - 1)); }
  AtomicRegister<int>& last() { return last_; }

  /// The wait predicate for `side` on the current register values.
  bool admits(int side) const;
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
  std::vector<std::unique_ptr<AtomicRegister<Flag>>> flags_;
  AtomicRegister<int> last_;
};

/// A lock usable by processes p1..pn.
class Lock {
 public:
  virtual ~Lock() = default;
  virtual sim::Task<void> acquire(sim::Process self) = 0;
  virtual sim::Task<void> release(sim::Process self) = 0;
  virtual int n() const noexcept = 0;
};

/// Two-process Peterson lock; p_i plays side i.
class Peterson final : public Lock {
 public:
  Peterson();
  sim::Task<void> acquire(sim::Process self) override;
  sim::Task<void> release(sim::Process self) override;
  int n() const noexcept override { return 2; }
  PetersonPair& pair() { return pair_; }

 private:
  PetersonPair pair_;
  std::vector<bool> holding_;
};

/// Tournament of Peterson pairs on a complete binary tree with `leaves()`
/// leaves (n rounded up to a power of two; unused leaves never compete).
/// Nodes are heap-indexed, root = 1; p_i starts at leaf leaves() + i - 1.
class Tournament final : public Lock {
 public:
  explicit Tournament(int n);
  sim::Task<void> acquire(sim::Process self) override;
  /// Lowers the flags root first, down to the leaf.
  sim::Task<void> release(sim::Process self) override;
  int n() const noexcept override { return n_; }
  int leaves() const noexcept { return leaves_; }
  PetersonPair& node(int index) { return *nodes_.at(static_cast<std::size_t>(index)); }

  /// (node, side) pairs on p's path, leaf level first.
  std::vector<std::pair<int, int>> path(sim::ProcessId p) const;

 private:
  int n_;
  int leaves_;
  std::vector<std::unique_ptr<PetersonPair>> nodes_;  // index 0 unused
  std::vector<bool> holding_;
};

std::unique_ptr<Lock> make_lock(const std::string& protocol, int n);

/// Spawns one client per process: `rounds` times acquire, `cs_steps` steps
/// inside the critical section, release. Acquire/release are logged as
/// invocations and responses on kObject.
void spawn_clients(sim::Kernel& kernel, Lock& lock, int rounds, int cs_steps);

/// Critical-section interval: from the acquire response to the release
/// invocation (log seq numbers). `exit` is empty if the process never left.
struct CsInterval {
  sim::ProcessId pid;
  std::uint64_t enter = 0;
  std::optional<std::uint64_t> exit;
};

std::vector<CsInterval> cs_intervals(const sim::EventLog& log);

/// First pair of intervals of distinct processes that overlap, if any.
std::optional<std::pair<CsInterval, CsInterval>> find_overlap(const std::vector<CsInterval>& intervals);

struct ProgressReport {
  std::size_t acquires = 0;
  std::size_t entries = 0;
  /// Acquires that never entered, excluding crashed processes.
  std::size_t stuck = 0;
  /// Max number of CS entries by other processes between a process's first
  /// doorway of an acquire and its entry.
  std::size_t max_bypass = 0;
  /// Max number of times a node was won by others between a process's
  /// doorway at that node and its own win there.
  std::size_t max_node_bypass = 0;
};

ProgressReport progress(const sim::EventLog& log);

}  // namespace seqthink::mutex

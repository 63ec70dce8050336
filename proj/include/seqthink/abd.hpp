#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "seqthink/sim/kernel.hpp"

namespace seqthink::abd {

/// Identity of a written value: lexicographic on (sn, pid). The initial
/// value carries <0, 0>, below every written timestamp.
struct Timestamp {
  std::uint64_t sn = 0;
  int pid = 0;

  auto operator<=>(const Timestamp&) const = default;
};

std::string to_string(Timestamp ts);

/// Identifies one operation's messages: issuer plus per-issuer counter.
struct Tag {
  sim::ProcessId issuer;
  std::uint64_t counter = 0;

  auto operator<=>(const Tag&) const = default;
};

struct ReplicaState {
  std::int64_t reg = 0;
  Timestamp timestamp;
};

enum class MsgKind { write_req, ack_write_req, write, ack_write, read_req, ack_read };

/// Wire form, fields separated by single spaces:
///   WRITE_REQ issuer counter
///   ACK_WRITE_REQ issuer counter sn
///   WRITE issuer counter value sn pid
///   ACK_WRITE issuer counter
///   READ_REQ issuer counter
///   ACK_READ issuer counter value sn pid
struct Msg {
  MsgKind kind = MsgKind::write_req;
  Tag tag;
  std::int64_t value = 0;
  Timestamp ts;

  bool operator==(const Msg&) const = default;
};

std::string encode(const Msg& m);
/// Throws std::invalid_argument on malformed payloads.
Msg decode(const std::string& payload);

/// Collects acks of one phase: only from `tag` and of the expected kind.
class QuorumTracker {
 public:
  QuorumTracker() = default;
  QuorumTracker(Tag tag, MsgKind expect, int n) : tag_(tag), expect_(expect), threshold_(n / 2 + 1), active_(true) {}

  /// Returns false for stale or unexpected acks, which are dropped.
  bool add(sim::ProcessId from, const Msg& ack);
  bool complete() const noexcept { return active_ && acks_.size() >= threshold_; }
  std::size_t threshold() const noexcept { return threshold_; }
  const std::set<sim::ProcessId>& acks() const noexcept { return acks_; }
  const std::vector<Msg>& replies() const noexcept { return replies_; }

 private:
  Tag tag_;
  MsgKind expect_ = MsgKind::ack_write_req;
  std::size_t threshold_ = 1;
  bool active_ = false;
  std::set<sim::ProcessId> acks_;
  std::vector<Msg> replies_;
};

struct Options {
  /// Log object id for invocations and responses.
  std::string object = "REG";
  /// Debug toggle for the inversion demo: reads return after phase 1.
  bool skip_read_phase2 = false;
};

/// ABD emulation of a MWMR atomic register on n message-passing processes.
/// Every process is both client and server; construction registers the
/// server handlers with the kernel on channel "abd".
class Register {
 public:
  Register(sim::Kernel& kernel, Options options = {});

  /// Logs invoke "write v" and respond "ok".
  sim::Task<void> write(sim::Process self, std::int64_t v);
  /// Logs invoke "read" and respond with the value.
  sim::Task<std::int64_t> read(sim::Process self);

  const ReplicaState& replica(sim::ProcessId p) const { return replicas_.at(p.index()); }
  const Options& options() const noexcept { return options_; }

  /// Ack sets of every completed phase, for the quorum-intersection check.
  const std::vector<std::set<sim::ProcessId>>& completed_quorums() const noexcept { return quorums_; }
  /// Timestamps chosen by completed or in-progress writes, by issuer.
  const std::vector<std::pair<sim::ProcessId, Timestamp>>& write_timestamps() const noexcept { return write_ts_; }

 private:
  struct Client {
    std::uint64_t counter = 0;
    QuorumTracker tracker;
  };

  void on_message(sim::Process& self, const sim::Message& m);
  sim::Task<void> phase(sim::Process self, const Msg& request, MsgKind ack, const char* label);

  sim::Kernel& kernel_;
  Options options_;
  std::vector<ReplicaState> replicas_;
  std::vector<Client> clients_;
  std::vector<std::set<sim::ProcessId>> quorums_;
  std::vector<std::pair<sim::ProcessId, Timestamp>> write_ts_;
};

/// Spawns one client thread per process running its operations in order
/// ("write v" or "read").
void spawn_clients(sim::Kernel& kernel, Register& reg, const std::map<sim::ProcessId, std::vector<std::string>>& ops);

}  // namespace seqthink::abd

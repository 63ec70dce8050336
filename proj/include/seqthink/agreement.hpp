#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "seqthink/registers.hpp"
#include "seqthink/sim/kernel.hpp"

namespace seqthink::agreement {

/// Consensus object over one LL/SC cell M, initially ⊥ (empty optional).
///
/// propose: val <- M.LL(); if val != ⊥ return val; if M.SC(v) return v;
/// else return M.LL(). At most three LL/SC accesses of the caller.
template <class T>
class Consensus {
 public:
  Consensus(std::string name, int n) : m_(std::move(name), std::nullopt, n) {}

  sim::Task<T> propose(sim::Process self, T v) {
    auto val = co_await m_.ll(self);
    if (val) co_return *val;
    if (co_await m_.sc(self, std::optional<T>(v))) co_return v;
    val = co_await m_.ll(self);
    co_return *val;
  }

  const std::optional<T>& decided() const noexcept { return m_.peek(); }
  const LlscRegister<std::optional<T>>& cell() const noexcept { return m_; }

 private:
  LlscRegister<std::optional<T>> m_;
};

/// Spawns one proposer per entry of `proposals`; each logs invoke
/// "propose v" and respond with the decided value on `object`.
void spawn_proposers(sim::Kernel& kernel, Consensus<std::int64_t>& c,
                     const std::map<sim::ProcessId, std::int64_t>& proposals, const std::string& object = "consensus");

/// Globally unique message identity.
struct MsgId {
  sim::ProcessId sender;
  std::uint64_t counter = 0;

  auto operator<=>(const MsgId&) const = default;
};

std::string to_string(MsgId id);

struct ToMessage {
  MsgId id;
  std::string payload;

  auto operator<=>(const ToMessage&) const = default;
};

using Batch = std::vector<ToMessage>;

std::string describe(const Batch& batch);

/// Wire form: "TO <sender> <counter> <payload>".
std::string encode(const ToMessage& m);
ToMessage decode_to(const std::string& wire);

/// Total-order broadcast from a sequence of consensus instances CS[1], CS[2], ...
///
/// Diffusion: a process sends m to itself; on first receipt it broadcasts m
/// and adds it to delivered. Background task T per process: wait until
/// delivered \ to_deliverable is non-empty, propose that batch (ordered by
/// message id) to CS[++sn], append the not-yet-present part of the decided
/// batch to to_deliverable. A second background activity to-delivers
/// to_deliverable in order.
///
/// Log notes on object `name`: "broadcast s:c" and "deliver s:c".
class ToBroadcast {
 public:
  using DeliverFn = std::function<void(sim::Process&, const ToMessage&)>;

  explicit ToBroadcast(sim::Kernel& kernel, std::string name = "to");

  /// Starts T and the delivery loop on every process (daemon threads).
  void start();

  /// Stamps `payload` with the next (sender, counter) identity and submits it.
  MsgId broadcast(sim::Process& self, std::string payload);
  /// Submits a message with an explicit identity. Throws std::invalid_argument
  /// if that identity was already submitted or names another sender.
  void submit(sim::Process& self, const ToMessage& m);

  /// Called in the step where `m` is to-delivered at a process.
  void on_deliver(DeliverFn fn) { deliver_fn_ = std::move(fn); }

  const std::vector<MsgId>& delivered_sequence(sim::ProcessId p) const { return state(p).sequence; }
  const Batch& to_deliverable(sim::ProcessId p) const { return state(p).to_deliverable; }
  std::uint64_t instances_run(sim::ProcessId p) const { return state(p).sn; }
  const std::string& name() const noexcept { return name_; }
  /// Decided batch of instance k, if any process has decided it.
  std::optional<Batch> decided(std::uint64_t k) const;

 private:
  struct State {
    std::uint64_t counter = 0;
    std::uint64_t sn = 0;
    std::set<MsgId> seen;
    std::map<MsgId, ToMessage> delivered;
    Batch to_deliverable;
    std::set<MsgId> in_to_deliverable;
    std::size_t next = 0;
    std::vector<MsgId> sequence;
  };

  State& state(sim::ProcessId p) { return states_.at(p.index()); }
  const State& state(sim::ProcessId p) const { return states_.at(p.index()); }
  Consensus<Batch>& instance(std::uint64_t k);
  void on_message(sim::Process& self, const sim::Message& m);
  sim::Task<void> task_t(sim::Process self);
  sim::Task<void> deliver_loop(sim::Process self);

  sim::Kernel& kernel_;
  std::string name_;
  std::vector<State> states_;
  std::map<std::uint64_t, std::unique_ptr<Consensus<Batch>>> cs_;
  std::set<MsgId> submitted_;
  DeliverFn deliver_fn_;
};

/// Spawns a client per process that to-broadcasts `count` messages
/// "m<pid>.<i>", one per step.
void spawn_broadcasters(sim::Kernel& kernel, ToBroadcast& to, int count);

/// TO properties evaluated on a finished log. Termination properties only
/// make sense on quiescent runs.
struct ToReport {
  bool validity = true;
  bool integrity = true;
  bool order = true;
  bool termination1 = true;
  bool termination2 = true;
  std::string failure;
  std::size_t broadcasts = 0;
  std::size_t deliveries = 0;

  bool all() const noexcept { return validity && integrity && order && termination1 && termination2; }
};

ToReport check_to_log(const sim::EventLog& log, int n, const std::string& object = "to");

}  // namespace seqthink::agreement

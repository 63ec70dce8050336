#pragma once

#include <coroutine>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seqthink/sim/adversary.hpp"
#include "seqthink/sim/event_log.hpp"
#include "seqthink/sim/ids.hpp"
#include "seqthink/sim/scenario.hpp"
#include "seqthink/sim/task.hpp"

namespace seqthink::sim {

/// A message in flight. Delivered at most once, never to a crashed process.
struct Message {
  std::uint64_t id = 0;
  ProcessId from;
  ProcessId to;
  std::string channel;
  std::string payload;
  std::uint64_t send_step = 0;
};

struct KernelConfig {
  int n = 1;
  AdversaryKind adversary = AdversaryKind::round_robin;
  Fairness fairness = Fairness::fair;
  std::uint64_t seed = 0;
  std::uint64_t step_budget = kDefaultStepBudget;
  std::map<ProcessId, std::uint64_t> crash_plan;
  std::vector<ScriptEntry> script;
  /// When set, the kernel runs in exploration mode with this choice prefix.
  std::optional<std::vector<std::size_t>> explore_prefix;
};

KernelConfig kernel_config(const Scenario& s);

enum class RunStatus { quiescent, budget_exhausted };

struct RunOutcome {
  RunStatus status = RunStatus::quiescent;
  std::uint64_t steps = 0;
  /// Non-daemon threads left suspended on a false guard at quiescence.
  std::size_t blocked_threads = 0;
  /// Longest wait (in steps) of any chosen step since it became enabled.
  std::uint64_t max_wait = 0;
};

std::string_view to_string(RunStatus s) noexcept;

class Kernel;

/// Handle through which protocol code acts as one process.
///
/// Every `co_await` on an awaiter obtained here is a scheduling point: the
/// coroutine is parked, and the code up to the next `co_await` runs as one
/// atomic kernel step once the adversary picks this process.
class Process {
 public:
  Process(Kernel& kernel, ProcessId id) : kernel_(&kernel), id_(id) {}

  ProcessId id() const noexcept { return id_; }
  Kernel& kernel() const noexcept { return *kernel_; }
  int n() const noexcept;

  /// Awaiter that, once scheduled, runs `fn` atomically and yields its result.
  template <class F>
  class AtomicAwaiter {
   public:
    AtomicAwaiter(Kernel& k, F fn, std::function<bool()> guard)
        : kernel_(&k), fn_(std::move(fn)), guard_(std::move(guard)) {}
    bool await_ready() const noexcept { return false; }
    void await_suspend(std::coroutine_handle<> h);
    decltype(auto) await_resume() { return fn_(); }

   private:
    Kernel* kernel_;
    F fn_;
    std::function<bool()> guard_;
  };

  template <class F>
  AtomicAwaiter<F> atomic(F fn) {
    return AtomicAwaiter<F>(*kernel_, std::move(fn), nullptr);
  }

  /// One plain step, logged as an internal event with `label`.
  auto step(std::string label) {
    return atomic([self = *this, label = std::move(label)]() mutable { self.note("", label); });
  }

  /// Parks until `guard` holds; the step that resumes is logged with `label`.
  auto until(std::function<bool()> guard, std::string label) {
    auto fn = [self = *this, label = std::move(label)]() mutable { self.note("", label); };
    return AtomicAwaiter<decltype(fn)>(*kernel_, std::move(fn), std::move(guard));
  }

  void send(ProcessId to, std::string channel, std::string payload);
  /// Sends to every process, including itself.
  void broadcast(const std::string& channel, const std::string& payload);

  void invoke(std::string object, std::string detail);
  void respond(std::string object, std::string detail);
  void note(std::string object, std::string detail);

 private:
  Kernel* kernel_;
  ProcessId id_;
};

/// Deterministic discrete-event executor for n protocol automata.
///
/// Local activities are coroutine threads spawned per process; message
/// deliveries are steps of the receiving process that run the receiver
/// registered for the message's channel. The adversary picks one enabled
/// step at a time. Crashes come from the crash plan (applied after the
/// given step; 0 means before the first step) or from crash().
class Kernel {
 public:
  using Receiver = std::function<void(Process&, const Message&)>;

  explicit Kernel(KernelConfig config);
  Kernel(const Kernel&) = delete;
  Kernel& operator=(const Kernel&) = delete;
  ~Kernel();

  int n() const noexcept { return config_.n; }
  Process process(ProcessId p) { return Process(*this, p); }

  /// Registers a local thread. Daemon threads (background loops) do not
  /// count as blocked when the run goes quiescent.
  void spawn(ProcessId p, std::string name, Task<void> task, bool daemon = false);
  void on_receive(ProcessId p, std::string channel, Receiver receiver);

  /// Executes one step. Returns false when nothing is enabled or the budget
  /// is spent.
  bool step_once();
  RunOutcome run();

  /// Crashes p now. Throws std::logic_error if p already crashed.
  void crash(ProcessId p);
  bool crashed(ProcessId p) const { return crashed_.at(p.index()); }
  std::uint64_t now() const noexcept { return now_; }

  const EventLog& log() const noexcept { return log_; }
  const Adversary& adversary() const noexcept { return adversary_; }
  std::uint64_t max_wait() const noexcept { return max_wait_; }

  /// Currently enabled steps in canonical order: by process, local threads
  /// (by spawn order) before deliveries (by message id).
  std::vector<ProcessStep> enabled_steps();

  /// Pending messages addressed to p, oldest first.
  std::vector<const Message*> pending_to(ProcessId p) const;

  // Used by Process and awaiters.
  void park(std::coroutine_handle<> h, std::function<bool()> guard);
  void record(ProcessId p, EventKind kind, std::string object, std::string detail);
  void enqueue(ProcessId from, ProcessId to, std::string channel, std::string payload);

 private:
  struct Thread {
    ProcessId pid;
    std::string name;
    Task<void> task;
    std::coroutine_handle<> resume_point;
    std::function<bool()> guard;
    bool started = false;
    bool finished = false;
    bool daemon = false;
    bool was_enabled = false;
    std::uint64_t enabled_since = 0;
  };

  void apply_planned_crashes();
  void run_local(Thread& t);
  void run_delivery(std::uint64_t message_id, ProcessId to);
  void check_process(ProcessId p) const;

  KernelConfig config_;
  Adversary adversary_;
  std::mt19937_64 fault_rng_;
  EventLog log_;
  std::uint64_t now_ = 0;
  std::uint64_t next_message_id_ = 1;
  std::uint64_t max_wait_ = 0;
  bool budget_exhausted_ = false;

  std::vector<std::unique_ptr<Thread>> threads_;
  std::vector<std::vector<std::size_t>> threads_of_;  // per process, spawn order
  std::vector<std::map<std::uint64_t, Message>> inbox_;  // per destination
  std::vector<bool> crashed_;
  std::vector<std::uint64_t> last_step_of_;
  std::map<std::pair<ProcessId, std::string>, Receiver> receivers_;
  Thread* current_ = nullptr;
};

/// Runs `body` once per distinct schedule of the system it builds, in
/// depth-first order. `body` receives a fresh kernel in exploration mode and
/// must set up the protocol and run it to completion. Stops after `limit`
/// schedules; returns the number explored.
template <class Body>
std::size_t explore_schedules(const KernelConfig& base, Body&& body,
                              std::size_t limit = std::numeric_limits<std::size_t>::max()) {
  std::vector<std::size_t> prefix;
  std::size_t runs = 0;
  while (runs < limit) {
    KernelConfig c = base;
    c.explore_prefix = prefix;
    Kernel k(c);
    body(k);
    ++runs;
    const auto& ch = k.adversary().choices();
    const auto& br = k.adversary().branching();
    std::size_t d = ch.size();
    while (d > 0 && ch[d - 1] + 1 >= br[d - 1]) --d;
    if (d == 0) break;
    prefix.assign(ch.begin(), ch.begin() + static_cast<std::ptrdiff_t>(d));
    ++prefix.back();
  }
  return runs;
}

template <class F>
void Process::AtomicAwaiter<F>::await_suspend(std::coroutine_handle<> h) {
  kernel_->park(h, std::move(guard_));
}

}  // namespace seqthink::sim

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "seqthink/agreement.hpp"
#include "seqthink/objects/op.hpp"
#include "seqthink/registers.hpp"
#include "seqthink/sim/kernel.hpp"

namespace seqthink::universal {

/// A second invocation by a process whose previous one has not returned.
struct OutstandingInvocation : std::logic_error {
  using std::logic_error::logic_error;
};

/// One replica-side application of an operation (Algorithm 4).
struct Applied {
  std::string op;  // "pN op text"
  std::string state;
  bool operator==(const Applied&) const = default;
};

/// State machine replication over TO-broadcast.
///
/// Each process keeps its own copy of the object. An invocation broadcasts
/// "pid op" and waits until the local replica has applied it; the deliver
/// callback applies every delivered operation in TO order and fills the
/// result slot only for the invoker.
template <objects::SequentialSpec Spec>
class ToUniversal {
 public:
  using State = typename Spec::State;

  ToUniversal(sim::Kernel& kernel, Spec spec, std::string object)
      : spec_(std::move(spec)), object_(std::move(object)), to_(kernel, object_ + ".to") {
    for (int p = 1; p <= kernel.n(); ++p) replicas_.push_back(Replica{spec_.initial(), std::nullopt, false, {}});
    to_.on_deliver([this](sim::Process& self, const agreement::ToMessage& m) { on_deliver(self, m); });
  }

  /// Starts the TO-broadcast background tasks of every process.
  void start() { to_.start(); }

  sim::Task<std::string> invoke(sim::Process self, objects::Op op) {
    auto& r = replica(self.id());
    if (r.busy) throw OutstandingInvocation(sim::to_string(self.id()) + " already has an invocation on " + object_);
    r.busy = true;
    r.result.reset();
    to_.broadcast(self, std::to_string(self.id().value) + " " + objects::to_string(op));
    co_await self.until([&r] { return r.result.has_value(); }, object_ + " result ready");
    r.busy = false;
    co_return *r.result;
  }

  const State& replica_state(sim::ProcessId p) const { return replicas_.at(p.index()).state; }
  const std::vector<Applied>& applied(sim::ProcessId p) const { return replicas_.at(p.index()).applied; }
  const agreement::ToBroadcast& broadcast() const noexcept { return to_; }
  const std::string& object() const noexcept { return object_; }
  const Spec& spec() const noexcept { return spec_; }

 private:
  struct Replica {
    State state;
    std::optional<std::string> result;
    bool busy = false;
    std::vector<Applied> applied;
  };

  Replica& replica(sim::ProcessId p) { return replicas_.at(p.index()); }

  void on_deliver(sim::Process& self, const agreement::ToMessage& m) {
    std::istringstream in(m.payload);
    int proc = 0;
    in >> proc;
    std::string rest;
    std::getline(in >> std::ws, rest);
    auto invoker = sim::pid(proc);
    auto op = objects::parse_op(rest, invoker);
    auto& r = replica(self.id());
    auto t = spec_.apply(r.state, op);
    r.state = std::move(t.state);
    auto shown = spec_.describe(r.state);
    r.applied.push_back({sim::to_string(invoker) + " " + objects::to_string(op), shown});
    self.note(object_, "apply " + sim::to_string(invoker) + " " + objects::to_string(op) + " -> " + t.result +
                           " state " + shown);
    if (invoker == self.id()) r.result = t.result;
  }

  Spec spec_;
  std::string object_;
  agreement::ToBroadcast to_;
  std::vector<Replica> replicas_;
};

/// Replica convergence: every non-crashed replica applied the same sequence;
/// crashed replicas applied a prefix of it. Returns a description of the
/// first divergence, or nullopt.
template <class U>
std::optional<std::string> replica_divergence(const sim::Kernel& kernel, const U& u) {
  const std::vector<Applied>* longest = nullptr;
  for (int p = 1; p <= kernel.n(); ++p) {
    const auto& a = u.applied(sim::pid(p));
    if (!longest || a.size() > longest->size()) longest = &a;
  }
  for (int p = 1; p <= kernel.n(); ++p) {
    const auto& a = u.applied(sim::pid(p));
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] != (*longest)[i]) {
        return "p" + std::to_string(p) + " applied " + a[i].op + " at position " + std::to_string(i) +
               " where another replica applied " + (*longest)[i].op;
      }
    }
    if (!kernel.crashed(sim::pid(p)) && a.size() != longest->size()) {
      return "p" + std::to_string(p) + " applied " + std::to_string(a.size()) + " operations, another replica " +
             std::to_string(longest->size());
    }
  }
  return std::nullopt;
}

/// BOARD[i]: the last operation announced by p_i and its sequence number.
struct BoardEntry {
  std::optional<objects::Op> op;
  std::uint64_t sn = 0;
  bool operator==(const BoardEntry&) const = default;
};

inline std::string describe(const BoardEntry& e) {
  if (!e.op) return "⊥";
  return "<" + objects::to_string(*e.op) + ", " + std::to_string(e.sn) + ">";
}

/// STATE: object value plus, per process, the number of its operations
/// applied and the result of the last one.
template <objects::SequentialSpec Spec>
struct StateCell {
  typename Spec::State value;
  std::vector<std::uint64_t> sn;
  std::vector<std::string> res;
  bool operator==(const StateCell&) const = default;
};

template <objects::SequentialSpec Spec>
std::string describe(const StateCell<Spec>& cell) {
  std::string out = Spec{}.describe(cell.value) + " sn=[";
  for (std::size_t i = 0; i < cell.sn.size(); ++i) out += (i ? "," : "") + std::to_string(cell.sn[i]);
  out += "] res=[";
  for (std::size_t i = 0; i < cell.res.size(); ++i) out += (i ? "," : "") + cell.res[i];
  return out + "]";
}

/// What apply() does after its first SC fails and its re-LL shows its own
/// operation still unapplied.
///
/// as_published folds only its own operation before the second SC. That SC
/// can lose to another process's recovery SC which did not fold it either,
/// and the invocation then returns a stale res[i] with its operation never
/// applied. reread reads BOARD again and folds every pending announcement,
/// so whichever SC beats it read BOARD after the announcement.
enum class Recovery { as_published, reread };

/// Own register accesses of one invocation, worst case: BOARD write, LL,
/// n BOARD reads, SC, recovery LL (+ n reads with reread) and SC, final LL.
constexpr std::uint64_t llsc_step_bound(int n, Recovery r = Recovery::reread) {
  auto reads = static_cast<std::uint64_t>(n);
  return 6 + reads + (r == Recovery::reread ? reads : 0);
}

/// Wait-free universal construction over one LL/SC register STATE and n
/// single-writer BOARD registers. apply() reads BOARD one entry per step, so
/// the snapshot is not atomic.
template <objects::SequentialSpec Spec>
class LlscUniversal {
 public:
  using State = typename Spec::State;
  using Cell = StateCell<Spec>;

  LlscUniversal(int n, Spec spec, std::string object, Recovery recovery = Recovery::reread)
      : spec_(std::move(spec)),
        object_(std::move(object)),
        recovery_(recovery),
        state_("STATE", Cell{spec_.initial(), std::vector<std::uint64_t>(static_cast<std::size_t>(n), 0),
                             std::vector<std::string>(static_cast<std::size_t>(n), "⊥")},
               n),
        sn_(static_cast<std::size_t>(n), 0),
        busy_(static_cast<std::size_t>(n), false),
        returned_(static_cast<std::size_t>(n), 0) {
    for (int i = 1; i <= n; ++i) {
      board_.push_back(std::make_unique<AtomicRegister<BoardEntry>>("BOARD[" + std::to_string(i) + "]", BoardEntry{},
                                                                    Access::single_writer(sim::pid(i))));
    }
  }

  sim::Task<std::string> invoke(sim::Process self, objects::Op op) {
    auto i = self.id().index();
    if (busy_.at(i)) throw OutstandingInvocation(sim::to_string(self.id()) + " already has an invocation on " + object_);
    busy_[i] = true;
    op.caller = self.id();
    ++sn_[i];
    BoardEntry announce{op, sn_[i]};  // named: g++ 11 double-frees braced temporaries in co_await
    co_await board_[i]->write(self, std::move(announce));
    co_await apply(self);
    auto st = co_await state_.ll(self);
    busy_[i] = false;
    returned_[i] = sn_[i];
    co_return st.res[i];
  }

  const Cell& state() const noexcept { return state_.peek(); }
  const std::string& object() const noexcept { return object_; }
  const Spec& spec() const noexcept { return spec_; }

  /// How many times p's k-th operation was folded into a successful SC.
  std::size_t commits(sim::ProcessId p, std::uint64_t k) const {
    auto it = commits_.find({p, k});
    return it == commits_.end() ? 0 : it->second;
  }
  Recovery recovery() const noexcept { return recovery_; }

  /// Exactly-once check: every operation STATE counts was committed once, and
  /// every invocation that returned is counted. nullopt when it holds.
  std::optional<std::string> exactly_once_violation() const {
    const auto& cell = state();
    for (std::size_t l = 0; l < cell.sn.size(); ++l) {
      if (returned_[l] > cell.sn[l]) {
        return "p" + std::to_string(l + 1) + " returned from operation " + std::to_string(returned_[l]) +
               " but STATE.sn[" + std::to_string(l + 1) + "] = " + std::to_string(cell.sn[l]);
      }
    }
    for (std::size_t l = 0; l < cell.sn.size(); ++l) {
      for (std::uint64_t k = 1; k <= cell.sn[l]; ++k) {
        auto c = commits(sim::pid(static_cast<int>(l) + 1), k);
        if (c != 1) {
          return "operation " + std::to_string(k) + " of p" + std::to_string(l + 1) + " committed " + std::to_string(c) +
                 " times";
        }
      }
    }
    for (const auto& [key, c] : commits_) {
      if (key.second > cell.sn.at(key.first.index())) return "commit beyond STATE.sn for " + sim::to_string(key.first);
    }
    return std::nullopt;
  }

 private:
  using Fold = std::vector<std::pair<sim::ProcessId, std::uint64_t>>;

  // Lines A and B for process l.
  void fold(Cell& st, std::size_t l, const objects::Op& op, Fold& folded) const {
    auto t = spec_.apply(st.value, op);
    st.value = std::move(t.state);
    st.res[l] = std::move(t.result);
    ++st.sn[l];
    folded.emplace_back(sim::pid(static_cast<int>(l) + 1), st.sn[l]);
  }

  void record(const Fold& folded) {
    for (const auto& key : folded) ++commits_[key];
  }

  sim::Task<std::vector<BoardEntry>> read_board(sim::Process self) {
    std::vector<BoardEntry> board;
    for (auto& reg : board_) board.push_back(co_await reg->read(self));
    co_return board;
  }

  void fold_pending(Cell& st, const std::vector<BoardEntry>& board, Fold& folded) const {
    for (std::size_t l = 0; l < board.size(); ++l) {
      if (board[l].op && board[l].sn == st.sn[l] + 1) fold(st, l, *board[l].op, folded);
    }
  }

  sim::Task<void> apply(sim::Process self) {
    auto i = self.id().index();
    auto st = co_await state_.ll(self);
    auto board = co_await read_board(self);
    Fold folded;
    fold_pending(st, board, folded);
    if (co_await state_.sc(self, st)) {
      record(folded);
      co_return;
    }
    st = co_await state_.ll(self);
    if (sn_[i] == st.sn[i] + 1) {
      Fold again;
      if (recovery_ == Recovery::reread) {
        board = co_await read_board(self);
        fold_pending(st, board, again);
      } else {
        fold(st, i, *board[i].op, again);
      }
      if (co_await state_.sc(self, st)) record(again);
    }
  }

  Spec spec_;
  std::string object_;
  Recovery recovery_;
  std::vector<std::unique_ptr<AtomicRegister<BoardEntry>>> board_;
  LlscRegister<Cell> state_;
  std::vector<std::uint64_t> sn_;
  std::vector<bool> busy_;
  std::vector<std::uint64_t> returned_;
  std::map<std::pair<sim::ProcessId, std::uint64_t>, std::size_t> commits_;
};

namespace detail {
template <class U>
sim::Task<void> client(sim::Process self, U& u, std::vector<std::string> ops) {
  for (std::size_t k = 0; k < ops.size(); ++k) {
    if (k) co_await self.step("next operation");
    auto op = objects::parse_op(ops[k], self.id());
    self.invoke(u.object(), objects::to_string(op));
    auto result = co_await u.invoke(self, op);
    self.respond(u.object(), result);
  }
}
}  // namespace detail

/// Spawns one sequential client per process, logging invoke/respond events
/// on the construction's object name.
template <class U>
void spawn_clients(sim::Kernel& kernel, U& u, const std::map<sim::ProcessId, std::vector<std::string>>& workload) {
  for (const auto& [p, ops] : workload) kernel.spawn(p, "client", detail::client(kernel.process(p), u, ops));
}

}  // namespace seqthink::universal

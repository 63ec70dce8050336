#pragma once

#include <bit>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "seqthink/lincheck/history.hpp"
#include "seqthink/objects/op.hpp"

namespace seqthink::lincheck {

enum class Outcome { accepted, rejected, undecided };

std::string_view to_string(Outcome o) noexcept;

struct Verdict {
  Outcome outcome = Outcome::undecided;
  /// Accepted: operation ids in linearization order. Pending operations that
  /// were dropped do not appear.
  std::vector<std::size_t> witness;
  /// Rejected: ids of a sub-history that is itself rejected and becomes
  /// linearizable when any single one of its operations is removed.
  std::vector<std::size_t> violation_core;
  std::string reason;
  std::uint64_t nodes = 0;

  bool accepted() const noexcept { return outcome == Outcome::accepted; }
  bool rejected() const noexcept { return outcome == Outcome::rejected; }
};

struct CheckOptions {
  std::size_t max_completed = 20;
  std::uint64_t node_limit = 5'000'000;
  bool minimize = true;
};

namespace detail {

/// Depth-first search over linearization points. At each node any
/// operation none of whose real-time predecessors is still outstanding may
/// go next; completed operations must reproduce their recorded result,
/// pending ones may return anything. Pending operations may also never take
/// effect. (linearized set, state) pairs that failed once are not revisited.
template <objects::SequentialSpec S>
class Search {
 public:
  using State = typename S::State;

  Search(const History& h, const S& spec, std::uint64_t node_limit)
      : spec_(spec), limit_(node_limit) {
    const auto& ops = h.operations();
    n_ = ops.size();
    for (std::size_t i = 0; i < n_; ++i) {
      parsed_.push_back(ops[i].op);
      result_.push_back(ops[i].result);
      if (!ops[i].pending()) required_ |= bit(i);
      std::uint64_t preds = 0;
      for (std::size_t j = 0; j < n_; ++j) {
        if (ops[j].precedes(ops[i])) preds |= bit(j);
      }
      preds_.push_back(preds);
    }
  }

  /// true = found, false = none exists; throws Exhausted past the node limit.
  struct Exhausted {};

  bool run() { return dfs(0, spec_.initial()); }
  const std::vector<std::size_t>& witness() const noexcept { return order_; }
  std::uint64_t nodes() const noexcept { return nodes_; }

 private:
  static constexpr std::uint64_t bit(std::size_t i) { return std::uint64_t{1} << i; }

  bool dfs(std::uint64_t done, const State& state) {
    if ((done & required_) == required_) return true;
    if (++nodes_ > limit_) throw Exhausted{};
    if (dead_.count({done, state})) return false;
    for (std::size_t i = 0; i < n_; ++i) {
      if (done & bit(i)) continue;
      if ((preds_[i] & done) != preds_[i]) continue;
      auto t = spec_.apply(state, parsed_[i]);
      if (result_[i] && t.result != *result_[i]) continue;
      order_.push_back(i);
      if (dfs(done | bit(i), t.state)) return true;
      order_.pop_back();
    }
    dead_.insert({done, state});
    return false;
  }

  const S& spec_;
  std::uint64_t limit_;
  std::size_t n_ = 0;
  std::vector<objects::Op> parsed_;
  std::vector<std::optional<std::string>> result_;
  std::vector<std::uint64_t> preds_;
  std::uint64_t required_ = 0;
  std::uint64_t nodes_ = 0;
  std::vector<std::size_t> order_;
  std::set<std::pair<std::uint64_t, State>> dead_;
};

/// accepted / rejected / undecided for `h`, filling the witness if found.
template <objects::SequentialSpec S>
Outcome decide(const History& h, const S& spec, const CheckOptions& opt, Verdict& v) {
  if (h.completed() > opt.max_completed) {
    v.reason = "undecided: too large (" + std::to_string(h.completed()) + " completed operations, bound " +
               std::to_string(opt.max_completed) + ")";
    return Outcome::undecided;
  }
  if (h.size() > 64) {
    v.reason = "undecided: too large (" + std::to_string(h.size()) + " operations)";
    return Outcome::undecided;
  }
  Search<S> search(h, spec, opt.node_limit);
  try {
    bool found = search.run();
    v.nodes += search.nodes();
    if (!found) return Outcome::rejected;
    v.witness.clear();
    for (auto i : search.witness()) v.witness.push_back(h.operations()[i].id);
    return Outcome::accepted;
  } catch (const typename Search<S>::Exhausted&) {
    v.nodes += search.nodes();
    v.reason = "undecided: search limit of " + std::to_string(opt.node_limit) + " nodes reached";
    return Outcome::undecided;
  }
}

}  // namespace detail

/// Decides linearizability of `h` against `spec`.
///
/// A pending invocation may take effect at any point after it was invoked or
/// not at all. Histories above the configured bound come back undecided.
template <objects::SequentialSpec S>
Verdict check(const History& h, const S& spec, const CheckOptions& opt = {}) {
  Verdict v;
  v.outcome = detail::decide(h, spec, opt, v);
  if (v.outcome != Outcome::rejected) return v;
  v.reason = "no linearization reproduces the recorded results";

  std::vector<std::size_t> core;
  for (const auto& op : h.operations()) core.push_back(op.id);
  if (opt.minimize) {
    // Removing an operation can also break a history, so repeat until no
    // single removal keeps it rejected.
    for (bool shrunk = true; shrunk;) {
      shrunk = false;
      for (std::size_t k = 0; k < core.size();) {
        auto trial = core;
        trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(k));
        Verdict scratch;
        if (detail::decide(h.restrict_to(trial), spec, opt, scratch) == Outcome::rejected) {
          core = std::move(trial);
          shrunk = true;
        } else {
          ++k;
        }
      }
    }
  }
  v.violation_core = std::move(core);
  return v;
}

/// Replays `witness` (operation ids) through `spec`; true iff it respects
/// real-time order, covers every completed operation, and reproduces every
/// recorded result.
template <objects::SequentialSpec S>
bool witness_is_valid(const History& h, const S& spec, const std::vector<std::size_t>& witness) {
  const auto& ops = h.operations();
  auto find = [&](std::size_t id) -> const Operation* {
    for (const auto& o : ops) {
      if (o.id == id) return &o;
    }
    return nullptr;
  };
  std::set<std::size_t> placed;
  auto state = spec.initial();
  for (auto id : witness) {
    const auto* o = find(id);
    if (!o || placed.count(id)) return false;
    for (const auto& other : ops) {
      if (other.precedes(*o) && !placed.count(other.id)) return false;
    }
    auto t = spec.apply(state, o->op);
    if (o->result && t.result != *o->result) return false;
    state = std::move(t.state);
    placed.insert(id);
  }
  for (const auto& o : ops) {
    if (!o.pending() && !placed.count(o.id)) return false;
  }
  return true;
}

}  // namespace seqthink::lincheck

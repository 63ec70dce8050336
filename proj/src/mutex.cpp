#include "seqthink/mutex.hpp"

#include <limits>
#include <map>
#include <ostream>

namespace seqthink::mutex {

using sim::Process;
using sim::ProcessId;
using sim::Task;

std::ostream& operator<<(std::ostream& out, Flag f) { return out << (f == Flag::up ? "up" : "down"); }

PetersonPair::PetersonPair(std::string name, std::string prefix,
                           std::optional<std::pair<ProcessId, ProcessId>> owners)
    : name_(std::move(name)), last_(prefix + "LAST", 1) {
  for (int side = 1; side <= 2; ++side) {
    Access access;
    if (owners) access = Access::single_writer(side == 1 ? owners->first : owners->second);
    flags_.push_back(
        std::make_unique<AtomicRegister<Flag>>(prefix + "FLAG[" + std::to_string(side) + "]", Flag::down, access));
  }
}

Task<void> PetersonPair::acquire(Process self, int side) {
  const int other = 3 - side;
  co_await flag(side).write(self, Flag::up);
  co_await last_.write(self, side);
  self.note(kObject, "doorway " + name_);
  while (true) {
    if (co_await flag(other).read(self) == Flag::down) break;
    if (co_await last_.read(self) != side) break;
  }
  self.note(kObject, "won " + name_);
}

Task<void> PetersonPair::release(Process self, int side) { co_await flag(side).write(self, Flag::down); }

bool PetersonPair::admits(int side) const {
  return flags_.at(static_cast<std::size_t>(2 - side))->peek() == Flag::down || last_.peek() != side;
}

Peterson::Peterson() : pair_("P", "", std::pair{sim::pid(1), sim::pid(2)}), holding_(2, false) {}

Task<void> Peterson::acquire(Process self) {
  auto i = self.id().value;
  if (i < 1 || i > 2) throw WiringError("Peterson lock is for p1 and p2 only, not " + to_string(self.id()));
  if (holding_[self.id().index()]) throw UsageError(to_string(self.id()) + " already holds the lock");
  co_await pair_.acquire(self, i);
  holding_[self.id().index()] = true;
}

Task<void> Peterson::release(Process self) {
  if (self.id().value < 1 || self.id().value > 2 || !holding_[self.id().index()]) {
    throw UsageError(to_string(self.id()) + " released without holding the lock");
  }
  holding_[self.id().index()] = false;
  co_await pair_.release(self, self.id().value);
}

Tournament::Tournament(int n) : n_(n), leaves_(2), holding_(static_cast<std::size_t>(n), false) {
  if (n < 2) throw std::invalid_argument("tournament needs at least 2 processes");
  while (leaves_ < n) leaves_ *= 2;
  nodes_.resize(static_cast<std::size_t>(leaves_));
  for (int k = 1; k < leaves_; ++k) nodes_[static_cast<std::size_t>(k)] = std::make_unique<PetersonPair>("N" + std::to_string(k), "N" + std::to_string(k) + ".", std::nullopt);
}

std::vector<std::pair<int, int>> Tournament::path(ProcessId p) const {
  std::vector<std::pair<int, int>> out;
  for (int pos = leaves_ + p.value - 1; pos > 1; pos /= 2) out.push_back({pos / 2, pos % 2 + 1});
  return out;
}

Task<void> Tournament::acquire(Process self) {
  if (self.id().value < 1 || self.id().value > n_) throw WiringError(to_string(self.id()) + " is not in the tournament");
  if (holding_[self.id().index()]) throw UsageError(to_string(self.id()) + " already holds the lock");
  for (auto [node, side] : path(self.id())) co_await nodes_[static_cast<std::size_t>(node)]->acquire(self, side);
  holding_[self.id().index()] = true;
}

Task<void> Tournament::release(Process self) {
  if (self.id().value < 1 || self.id().value > n_ || !holding_[self.id().index()]) {
    throw UsageError(to_string(self.id()) + " released without holding the lock");
  }
  holding_[self.id().index()] = false;
  auto p = path(self.id());
  for (auto it = p.rbegin(); it != p.rend(); ++it) co_await nodes_[static_cast<std::size_t>(it->first)]->release(self, it->second);
}

std::unique_ptr<Lock> make_lock(const std::string& protocol, int n) {
  if (protocol == "peterson") {
    if (n != 2) throw std::invalid_argument("peterson needs n = 2");
    return std::make_unique<Peterson>();
  }
  if (protocol == "tournament") return std::make_unique<Tournament>(n);
  throw std::invalid_argument("unknown mutex protocol '" + protocol + "'");
}

namespace {
Task<void> client(Process self, Lock& lock, int rounds, int cs_steps) {
  for (int r = 0; r < rounds; ++r) {
    self.invoke(kObject, "acquire");
    co_await lock.acquire(self);
    self.respond(kObject, "ok");
    for (int s = 0; s < cs_steps; ++s) co_await self.step("cs");
    self.invoke(kObject, "release");
    co_await lock.release(self);
    self.respond(kObject, "ok");
  }
}
}  // namespace

void spawn_clients(sim::Kernel& kernel, Lock& lock, int rounds, int cs_steps) {
  for (int p = 1; p <= lock.n(); ++p) {
    kernel.spawn(sim::pid(p), "client", client(kernel.process(sim::pid(p)), lock, rounds, cs_steps));
  }
}

std::vector<CsInterval> cs_intervals(const sim::EventLog& log) {
  std::vector<CsInterval> out;
  std::map<ProcessId, std::string> last_invoked;
  std::map<ProcessId, std::size_t> inside;
  for (const auto& e : log) {
    if (e.object != kObject) continue;
    if (e.kind == sim::EventKind::invoke) {
      last_invoked[e.pid] = e.detail;
      if (e.detail == "release" && inside.count(e.pid)) {
        out[inside[e.pid]].exit = e.seq;
        inside.erase(e.pid);
      }
    } else if (e.kind == sim::EventKind::respond && last_invoked[e.pid] == "acquire") {
      inside[e.pid] = out.size();
      out.push_back({e.pid, e.seq, std::nullopt});
    }
  }
  return out;
}

std::optional<std::pair<CsInterval, CsInterval>> find_overlap(const std::vector<CsInterval>& intervals) {
  constexpr auto inf = std::numeric_limits<std::uint64_t>::max();
  for (std::size_t a = 0; a < intervals.size(); ++a) {
    for (std::size_t b = a + 1; b < intervals.size(); ++b) {
      const auto& x = intervals[a];
      const auto& y = intervals[b];
      if (x.pid == y.pid) continue;
      if (x.enter < y.exit.value_or(inf) && y.enter < x.exit.value_or(inf)) return std::pair{x, y};
    }
  }
  return std::nullopt;
}

ProgressReport progress(const sim::EventLog& log) {
  ProgressReport r;
  std::map<ProcessId, std::string> last_invoked;
  std::map<ProcessId, bool> waiting;
  std::map<ProcessId, bool> crashed;
  // entries by others since the first doorway of the current acquire
  std::map<ProcessId, std::size_t> bypass;
  // per node: wins by others since this process's doorway there
  std::map<std::string, std::map<ProcessId, std::size_t>> node_bypass;
  for (const auto& e : log) {
    if (e.kind == sim::EventKind::crash) crashed[e.pid] = true;
    if (e.object != kObject) continue;
    if (e.kind == sim::EventKind::invoke) {
      last_invoked[e.pid] = e.detail;
      if (e.detail == "acquire") {
        ++r.acquires;
        waiting[e.pid] = true;
      }
    } else if (e.kind == sim::EventKind::internal && e.detail.rfind("doorway ", 0) == 0) {
      if (waiting[e.pid] && !bypass.count(e.pid)) bypass[e.pid] = 0;
      node_bypass[e.detail.substr(8)][e.pid] = 0;
    } else if (e.kind == sim::EventKind::internal && e.detail.rfind("won ", 0) == 0) {
      auto& at = node_bypass[e.detail.substr(4)];
      r.max_node_bypass = std::max(r.max_node_bypass, at[e.pid]);
      at.erase(e.pid);
      for (auto& [q, count] : at) ++count;
    } else if (e.kind == sim::EventKind::respond && last_invoked[e.pid] == "acquire") {
      ++r.entries;
      waiting[e.pid] = false;
      r.max_bypass = std::max(r.max_bypass, bypass[e.pid]);
      bypass.erase(e.pid);
      for (auto& [q, count] : bypass) ++count;
    }
  }
  for (const auto& [p, w] : waiting) {
    if (w && !crashed[p]) ++r.stuck;
  }
  return r;
}

}  // namespace seqthink::mutex

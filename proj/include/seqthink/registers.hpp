#pragma once

#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "seqthink/sim/kernel.hpp"

namespace seqthink {

/// A register or protocol was wired to a process that is not allowed to use
/// it (unauthorized reader/writer, SC without a previous LL, ...).
struct WiringError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Renders register contents for the event log. Specialize or overload
/// `describe` (found by ADL) for protocol-specific value types.
template <class T>
std::string describe(const T& value) {
  std::ostringstream out;
  out << value;
  return out.str();
}

inline std::string describe(const std::string& value) { return value; }

template <class T>
std::string describe(const std::optional<T>& value) {
  return value ? describe(*value) : std::string("⊥");
}

/// Which processes may touch a register; empty means everyone.
struct Access {
  std::set<sim::ProcessId> readers;
  std::set<sim::ProcessId> writers;

  static Access everyone() { return {}; }
  static Access single_writer(sim::ProcessId w) { return {{}, {w}}; }
};

/// Atomic read/write register living in kernel shared memory.
///
/// read() and write() return awaiters: the operation itself happens when the
/// kernel schedules the awaiting process, as one atomic step, which is what
/// makes every read return the most recent preceding write in step order.
template <class T>
class AtomicRegister {
 public:
  AtomicRegister(std::string name, T initial, Access access = {})
      : name_(std::move(name)), value_(std::move(initial)), access_(std::move(access)) {}

  auto read(sim::Process self) {
    check(access_.readers, self.id(), "read");
    return self.atomic([this, self]() mutable {
      self.note(name_, "read -> " + describe(value_));
      return value_;
    });
  }

  auto write(sim::Process self, T v) {
    check(access_.writers, self.id(), "write");
    return self.atomic([this, self, v = std::move(v)]() mutable {
      value_ = v;
      self.note(name_, "write " + describe(value_));
    });
  }

  /// Current value, outside of any step (tests, inspection).
  const T& peek() const noexcept { return value_; }
  const std::string& name() const noexcept { return name_; }

 private:
  void check(const std::set<sim::ProcessId>& allowed, sim::ProcessId p, const char* what) const {
    if (!allowed.empty() && !allowed.count(p)) {
      throw WiringError(sim::to_string(p) + " may not " + what + " register " + name_);
    }
  }

  std::string name_;
  T value_;
  Access access_;
};

/// Load-linked / store-conditional register.
///
/// ll() links the caller; sc(v) succeeds iff the caller's link is still set,
/// i.e. no successful SC happened since the caller's last LL. A successful
/// SC clears every link. There are no spurious failures.
template <class T>
class LlscRegister {
 public:
  LlscRegister(std::string name, T initial, int n)
      : name_(std::move(name)),
        value_(std::move(initial)),
        linked_(static_cast<std::size_t>(n), false),
        ever_linked_(static_cast<std::size_t>(n), false) {}

  auto ll(sim::Process self) {
    return self.atomic([this, self]() mutable { return ll_now(self); });
  }

  auto sc(sim::Process self, T v) {
    if (!ever_linked_.at(self.id().index())) {
      throw WiringError(sim::to_string(self.id()) + " called SC on " + name_ + " without LL");
    }
    return self.atomic([this, self, v = std::move(v)]() mutable { return sc_now(self, std::move(v)); });
  }

  const T& peek() const noexcept { return value_; }
  const std::string& name() const noexcept { return name_; }
  bool linked(sim::ProcessId p) const { return linked_.at(p.index()); }
  std::size_t successful_scs() const noexcept { return successes_; }

 private:
  T ll_now(sim::Process& self) {
    linked_.at(self.id().index()) = true;
    ever_linked_.at(self.id().index()) = true;
    self.note(name_, "ll -> " + describe(value_));
    return value_;
  }

  bool sc_now(sim::Process& self, T v) {
    bool ok = linked_.at(self.id().index());
    if (ok) {
      value_ = std::move(v);
      linked_.assign(linked_.size(), false);
      ++successes_;
    }
    self.note(name_, std::string("sc ") + (ok ? "true " : "false ") + describe(ok ? value_ : v));
    return ok;
  }

  std::string name_;
  T value_;
  std::vector<bool> linked_;
  std::vector<bool> ever_linked_;
  std::size_t successes_ = 0;
};

}  // namespace seqthink

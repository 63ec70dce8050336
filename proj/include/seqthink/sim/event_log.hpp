#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "seqthink/sim/ids.hpp"

namespace seqthink::sim {

enum class EventKind { invoke, respond, send, deliver, crash, internal };

std::string_view to_string(EventKind kind) noexcept;
std::optional<EventKind> parse_event_kind(std::string_view text) noexcept;

/// One entry of a run's log.
///
/// `seq` is unique and strictly increasing over the whole log. `step` is the
/// kernel step during which the event happened; a step that sends several
/// messages produces several events sharing the same `step`.
struct Event {
  std::uint64_t seq = 0;
  std::uint64_t step = 0;
  ProcessId pid;
  EventKind kind = EventKind::internal;
  std::string object;
  std::string detail;

  bool operator==(const Event&) const = default;
};

struct LogFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class EventLog {
 public:
  void append(std::uint64_t step, ProcessId pid, EventKind kind, std::string object,
              std::string detail);

  const std::vector<Event>& events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }
  auto begin() const noexcept { return events_.begin(); }
  auto end() const noexcept { return events_.end(); }

  /// Line-delimited JSON records with a fixed field order:
  /// {"seq":..,"step":..,"pid":..,"kind":..,"obj":..,"detail":..}
  std::string to_records() const;
  void write_records(std::ostream& out) const;

  /// Compact human-readable rendering, one event per line.
  std::string to_text() const;

  /// SHA-256 (hex) of to_records(); identical logs have identical digests.
  std::string digest() const;

  /// Parses records written by write_records(). `seq` values from the input
  /// are preserved. Throws LogFormatError naming the offending line.
  static EventLog from_records(std::istream& in);

  bool operator==(const EventLog&) const = default;

 private:
  std::vector<Event> events_;
};

std::string to_record(const Event& e);

}  // namespace seqthink::sim

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqthink/objects/op.hpp"
#include "seqthink/sim/event_log.hpp"

namespace seqthink::lincheck {

struct MalformedLog : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One invoke or respond of an object. Invokes carry the op text, responds
/// the result text.
struct HistoryEvent {
  std::uint64_t time = 0;
  sim::ProcessId pid;
  bool is_invoke = true;
  std::string text;
};

/// A paired operation. `respond_time` is empty for a pending invocation.
struct Operation {
  std::size_t id = 0;
  sim::ProcessId pid;
  objects::Op op;
  std::uint64_t invoke_time = 0;
  std::optional<std::uint64_t> respond_time;
  std::optional<std::string> result;

  bool pending() const noexcept { return !respond_time.has_value(); }
  /// Real-time order: this responded before `other` was invoked.
  bool precedes(const Operation& other) const noexcept {
    return respond_time && *respond_time < other.invoke_time;
  }
};

/// Invocations and responses of one object, in time order. Per process,
/// invokes and responds alternate; the last invoke may be left open.
class History {
 public:
  /// Appends at the next time index.
  History& invoke(sim::ProcessId p, std::string op);
  History& respond(sim::ProcessId p, std::string result);
  /// Appends with an explicit time, which must exceed the previous one.
  void add(HistoryEvent e);

  const std::vector<HistoryEvent>& events() const noexcept { return events_; }
  const std::vector<Operation>& operations() const noexcept { return ops_; }
  std::size_t completed() const noexcept;
  std::size_t size() const noexcept { return ops_.size(); }

  /// The sub-history made of the given operations only.
  History restrict_to(const std::vector<std::size_t>& op_ids) const;

  std::string to_text() const;

 private:
  std::vector<HistoryEvent> events_;
  std::vector<Operation> ops_;
  std::vector<std::optional<std::size_t>> open_;  // per pid index
};

/// Projects the invoke/respond events of `object` out of a log. Time indices
/// are the log's seq numbers. A process that crashed mid-operation leaves an
/// open invocation. Throws MalformedLog on a respond with no open invoke or
/// a second invoke while one is open.
History extract_history(const sim::EventLog& log, const std::string& object);

/// Object ids that have at least one invoke in the log, in first-use order.
std::vector<std::string> objects_in(const sim::EventLog& log);

std::string describe(const Operation& op);

}  // namespace seqthink::lincheck

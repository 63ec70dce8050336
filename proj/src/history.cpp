#include "seqthink/lincheck/check.hpp"

#include <algorithm>
#include <sstream>

namespace seqthink::lincheck {

std::string_view to_string(Outcome o) noexcept {
  switch (o) {
    case Outcome::accepted: return "accepted";
    case Outcome::rejected: return "rejected";
    case Outcome::undecided: return "undecided";
  }
  return "?";
}

History& History::invoke(sim::ProcessId p, std::string op) {
  add({events_.empty() ? 1 : events_.back().time + 1, p, true, std::move(op)});
  return *this;
}

History& History::respond(sim::ProcessId p, std::string result) {
  add({events_.empty() ? 1 : events_.back().time + 1, p, false, std::move(result)});
  return *this;
}

void History::add(HistoryEvent e) {
  if (!events_.empty() && e.time <= events_.back().time) {
    throw MalformedLog("time " + std::to_string(e.time) + " does not increase");
  }
  if (e.pid.value < 1) throw MalformedLog("bad process id " + std::to_string(e.pid.value));
  if (open_.size() <= e.pid.index()) open_.resize(e.pid.index() + 1);
  auto& open = open_[e.pid.index()];
  if (e.is_invoke) {
    if (open) {
      throw MalformedLog(sim::to_string(e.pid) + " invokes '" + e.text + "' at " + std::to_string(e.time) +
                         " while an operation is open");
    }
    Operation op;
    op.id = ops_.size();
    op.pid = e.pid;
    op.op = objects::parse_op(e.text, e.pid);
    op.invoke_time = e.time;
    open = ops_.size();
    ops_.push_back(std::move(op));
  } else {
    if (!open) {
      throw MalformedLog(sim::to_string(e.pid) + " responds '" + e.text + "' at " + std::to_string(e.time) +
                         " with no open invocation");
    }
    ops_[*open].respond_time = e.time;
    ops_[*open].result = e.text;
    open.reset();
  }
  events_.push_back(std::move(e));
}

std::size_t History::completed() const noexcept {
  return static_cast<std::size_t>(std::count_if(ops_.begin(), ops_.end(), [](const Operation& o) { return !o.pending(); }));
}

History History::restrict_to(const std::vector<std::size_t>& op_ids) const {
  std::vector<bool> keep(ops_.size(), false);
  for (auto id : op_ids) keep.at(id) = true;
  // Map every event back to its operation by replaying the pairing.
  History out;
  std::vector<std::optional<std::size_t>> open(open_.size());
  std::size_t next = 0;
  for (const auto& e : events_) {
    auto& slot = open[e.pid.index()];
    std::size_t id;
    if (e.is_invoke) {
      id = next++;
      slot = id;
    } else {
      id = *slot;
      slot.reset();
    }
    if (keep[id]) out.add(e);
  }
  // Keep the original ids so cores and witnesses refer to this history.
  std::size_t k = 0;
  for (std::size_t id = 0; id < ops_.size(); ++id) {
    if (keep[id]) out.ops_[k++].id = id;
  }
  return out;
}

std::string describe(const Operation& op) {
  std::string s = "#" + std::to_string(op.id) + " " + sim::to_string(op.pid) + " " + objects::to_string(op.op);
  s += op.result ? " -> " + *op.result : std::string(" (pending)");
  s += " [" + std::to_string(op.invoke_time) + ", " + (op.respond_time ? std::to_string(*op.respond_time) : "∞") + "]";
  return s;
}

std::string History::to_text() const {
  std::ostringstream out;
  for (const auto& op : ops_) out << describe(op) << '\n';
  return out.str();
}

History extract_history(const sim::EventLog& log, const std::string& object) {
  History h;
  for (const auto& e : log) {
    if (e.object != object) continue;
    if (e.kind != sim::EventKind::invoke && e.kind != sim::EventKind::respond) continue;
    try {
      h.add({e.seq, e.pid, e.kind == sim::EventKind::invoke, e.detail});
    } catch (const objects::UnknownOp& err) {
      throw MalformedLog("event " + std::to_string(e.seq) + ": " + err.what());
    }
  }
  return h;
}

std::vector<std::string> objects_in(const sim::EventLog& log) {
  std::vector<std::string> out;
  for (const auto& e : log) {
    if (e.kind != sim::EventKind::invoke) continue;
    if (std::find(out.begin(), out.end(), e.object) == out.end()) out.push_back(e.object);
  }
  return out;
}

}  // namespace seqthink::lincheck

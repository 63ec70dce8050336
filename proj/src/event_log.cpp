#include "seqthink/sim/event_log.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "seqthink/crypto.hpp"

namespace seqthink::sim {

namespace {
constexpr std::array<std::string_view, 6> kKindNames = {"invoke", "respond", "send",
                                                        "deliver", "crash", "internal"};
}

std::string_view to_string(EventKind kind) noexcept {
  return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<EventKind> parse_event_kind(std::string_view text) noexcept {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == text) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

void EventLog::append(std::uint64_t step, ProcessId pid, EventKind kind, std::string object,
                      std::string detail) {
  std::uint64_t seq = events_.empty() ? 1 : events_.back().seq + 1;
  events_.push_back(Event{seq, step, pid, kind, std::move(object), std::move(detail)});
}

std::string to_record(const Event& e) {
  nlohmann::ordered_json j;
  j["seq"] = e.seq;
  j["step"] = e.step;
  j["pid"] = e.pid.value;
  j["kind"] = to_string(e.kind);
  j["obj"] = e.object;
  j["detail"] = e.detail;
  return j.dump();
}

void EventLog::write_records(std::ostream& out) const {
  for (const auto& e : events_) out << to_record(e) << '\n';
}

std::string EventLog::to_records() const {
  std::ostringstream out;
  write_records(out);
  return out.str();
}

std::string EventLog::to_text() const {
  std::ostringstream out;
  for (const auto& e : events_) {
    out << '#' << e.seq << " @" << e.step << ' ' << to_string(e.pid) << ' ' << to_string(e.kind);
    if (!e.object.empty()) out << " [" << e.object << ']';
    if (!e.detail.empty()) out << ' ' << e.detail;
    out << '\n';
  }
  return out.str();
}

std::string EventLog::digest() const {
  auto d = sha256(to_records());
  return to_hex(d);
}

EventLog EventLog::from_records(std::istream& in) {
  EventLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto where = [&] { return "line " + std::to_string(line_no) + ": "; };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& err) {
      throw LogFormatError(where() + err.what());
    }
    try {
      Event e;
      e.seq = j.at("seq").get<std::uint64_t>();
      e.step = j.at("step").get<std::uint64_t>();
      e.pid = ProcessId{j.at("pid").get<int>()};
      auto kind = parse_event_kind(j.at("kind").get<std::string>());
      if (!kind) throw LogFormatError(where() + "unknown event kind");
      e.kind = *kind;
      e.object = j.value("obj", std::string{});
      e.detail = j.value("detail", std::string{});
      if (!log.events_.empty() && e.seq <= log.events_.back().seq) {
        throw LogFormatError(where() + "seq must be strictly increasing");
      }
      log.events_.push_back(std::move(e));
    } catch (const nlohmann::json::exception& err) {
      throw LogFormatError(where() + err.what());
    }
  }
  return log;
}

}  // namespace seqthink::sim

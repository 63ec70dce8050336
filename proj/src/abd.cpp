#include "seqthink/abd.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "seqthink/objects/op.hpp"

namespace seqthink::abd {

using sim::Process;
using sim::ProcessId;
using sim::Task;

namespace {

constexpr const char* kChannel = "abd";
constexpr std::array<const char*, 6> kNames = {"WRITE_REQ", "ACK_WRITE_REQ", "WRITE", "ACK_WRITE", "READ_REQ", "ACK_READ"};

bool carries_value(MsgKind k) { return k == MsgKind::write || k == MsgKind::ack_read; }

}  // namespace

std::string to_string(Timestamp ts) { return "<" + std::to_string(ts.sn) + "," + std::to_string(ts.pid) + ">"; }

std::string encode(const Msg& m) {
  std::ostringstream out;
  out << kNames[static_cast<std::size_t>(m.kind)] << ' ' << m.tag.issuer.value << ' ' << m.tag.counter;
  if (carries_value(m.kind)) {
    out << ' ' << m.value << ' ' << m.ts.sn << ' ' << m.ts.pid;
  } else if (m.kind == MsgKind::ack_write_req) {
    out << ' ' << m.ts.sn;
  }
  return out.str();
}

Msg decode(const std::string& payload) {
  std::istringstream in(payload);
  std::string name;
  Msg m;
  in >> name;
  auto it = std::find_if(kNames.begin(), kNames.end(), [&](const char* k) { return name == k; });
  if (it == kNames.end()) throw std::invalid_argument("unknown ABD message '" + payload + "'");
  m.kind = static_cast<MsgKind>(it - kNames.begin());
  in >> m.tag.issuer.value >> m.tag.counter;
  if (carries_value(m.kind)) {
    in >> m.value >> m.ts.sn >> m.ts.pid;
  } else if (m.kind == MsgKind::ack_write_req) {
    in >> m.ts.sn;
  }
  if (in.fail()) throw std::invalid_argument("malformed ABD message '" + payload + "'");
  in >> std::ws;
  if (!in.eof()) throw std::invalid_argument("trailing data in ABD message '" + payload + "'");
  return m;
}

bool QuorumTracker::add(ProcessId from, const Msg& ack) {
  if (!active_ || ack.kind != expect_ || ack.tag != tag_ || acks_.count(from)) return false;
  acks_.insert(from);
  replies_.push_back(ack);
  return true;
}

Register::Register(sim::Kernel& kernel, Options options)
    : kernel_(kernel),
      options_(std::move(options)),
      replicas_(static_cast<std::size_t>(kernel.n())),
      clients_(static_cast<std::size_t>(kernel.n())) {
  for (int p = 1; p <= kernel.n(); ++p) {
    kernel.on_receive(sim::pid(p), kChannel, [this](Process& self, const sim::Message& m) { on_message(self, m); });
  }
}

void Register::on_message(Process& self, const sim::Message& m) {
  auto msg = decode(m.payload);
  auto& replica = replicas_[self.id().index()];
  switch (msg.kind) {
    case MsgKind::write_req: {
      Msg ack{MsgKind::ack_write_req, msg.tag, 0, {replica.timestamp.sn, 0}};
      self.send(m.from, kChannel, encode(ack));
      break;
    }
    case MsgKind::write: {
      if (replica.timestamp < msg.ts) {
        replica.timestamp = msg.ts;
        replica.reg = msg.value;
      }
      self.send(m.from, kChannel, encode(Msg{MsgKind::ack_write, msg.tag, 0, {}}));
      break;
    }
    case MsgKind::read_req: {
      Msg ack{MsgKind::ack_read, msg.tag, replica.reg, replica.timestamp};
      self.send(m.from, kChannel, encode(ack));
      break;
    }
    default:
      clients_[self.id().index()].tracker.add(m.from, msg);
      break;
  }
}

Task<void> Register::phase(Process self, const Msg& request, MsgKind ack, const char* label) {
  auto& client = clients_[self.id().index()];
  client.tracker = QuorumTracker(request.tag, ack, kernel_.n());
  self.broadcast(kChannel, encode(request));
  co_await self.until([&client] { return client.tracker.complete(); }, label);
  quorums_.push_back(client.tracker.acks());
}

Task<void> Register::write(Process self, std::int64_t v) {
  auto& client = clients_[self.id().index()];
  Tag tag{self.id(), ++client.counter};
  self.invoke(options_.object, "write " + std::to_string(v));

  co_await phase(self, Msg{MsgKind::write_req, tag, 0, {}}, MsgKind::ack_write_req, "abd write phase 1 quorum");
  std::uint64_t msn = 0;
  for (const auto& r : client.tracker.replies()) msn = std::max(msn, r.ts.sn);
  Timestamp ts{msn + 1, self.id().value};
  write_ts_.push_back({self.id(), ts});

  co_await phase(self, Msg{MsgKind::write, tag, v, ts}, MsgKind::ack_write, "abd write phase 2 quorum");
  self.respond(options_.object, "ok");
}

Task<std::int64_t> Register::read(Process self) {
  auto& client = clients_[self.id().index()];
  Tag tag{self.id(), ++client.counter};
  self.invoke(options_.object, "read");

  co_await phase(self, Msg{MsgKind::read_req, tag, 0, {}}, MsgKind::ack_read, "abd read phase 1 quorum");
  const auto& replies = client.tracker.replies();
  auto best = std::max_element(replies.begin(), replies.end(), [](const Msg& a, const Msg& b) { return a.ts < b.ts; });
  std::int64_t v = best->value;
  Timestamp ts = best->ts;

  if (!options_.skip_read_phase2) {
    co_await phase(self, Msg{MsgKind::write, tag, v, ts}, MsgKind::ack_write, "abd read phase 2 quorum");
  }
  self.respond(options_.object, std::to_string(v));
  co_return v;
}

namespace {
Task<void> client(Process self, Register& reg, std::vector<std::string> ops) {
  for (const auto& text : ops) {
    auto op = objects::parse_op(text, self.id());
    if (op.name == "write") {
      co_await reg.write(self, objects::int_arg(op));
    } else if (op.name == "read" && op.arg.empty()) {
      (void)co_await reg.read(self);
    } else {
      throw objects::UnknownOp("register has no operation '" + text + "'");
    }
  }
}
}  // namespace

void spawn_clients(sim::Kernel& kernel, Register& reg, const std::map<ProcessId, std::vector<std::string>>& ops) {
  for (const auto& [p, list] : ops) {
    if (list.empty()) continue;
    kernel.spawn(p, "client", client(kernel.process(p), reg, list));
  }
}

}  // namespace seqthink::abd

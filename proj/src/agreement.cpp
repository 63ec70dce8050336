#include "seqthink/agreement.hpp"

#include <sstream>
#include <stdexcept>

namespace seqthink::agreement {

using sim::Process;
using sim::ProcessId;
using sim::Task;

namespace {

Task<void> proposer(Process self, Consensus<std::int64_t>& c, std::int64_t v, std::string object) {
  self.invoke(object, "propose " + std::to_string(v));
  auto decided = co_await c.propose(self, v);
  self.respond(object, std::to_string(decided));
}

}  // namespace

void spawn_proposers(sim::Kernel& kernel, Consensus<std::int64_t>& c, const std::map<ProcessId, std::int64_t>& proposals,
                     const std::string& object) {
  for (const auto& [p, v] : proposals) kernel.spawn(p, "propose", proposer(kernel.process(p), c, v, object));
}

std::string to_string(MsgId id) { return std::to_string(id.sender.value) + ":" + std::to_string(id.counter); }

std::string describe(const Batch& batch) {
  std::string out = "[";
  for (std::size_t i = 0; i < batch.size(); ++i) out += (i ? "," : "") + to_string(batch[i].id);
  return out + "]";
}

std::string encode(const ToMessage& m) {
  return "TO " + std::to_string(m.id.sender.value) + " " + std::to_string(m.id.counter) + " " + m.payload;
}

ToMessage decode_to(const std::string& wire) {
  std::istringstream in(wire);
  std::string tag;
  ToMessage m;
  in >> tag >> m.id.sender.value >> m.id.counter;
  if (tag != "TO" || in.fail()) throw std::invalid_argument("malformed TO message '" + wire + "'");
  if (in.get() == ' ') std::getline(in, m.payload, '\0');
  return m;
}

ToBroadcast::ToBroadcast(sim::Kernel& kernel, std::string name)
    : kernel_(kernel), name_(std::move(name)), states_(static_cast<std::size_t>(kernel.n())) {
  for (int p = 1; p <= kernel.n(); ++p) {
    kernel.on_receive(sim::pid(p), name_, [this](Process& self, const sim::Message& m) { on_message(self, m); });
  }
}

void ToBroadcast::start() {
  for (int p = 1; p <= kernel_.n(); ++p) {
    auto self = kernel_.process(sim::pid(p));
    kernel_.spawn(self.id(), name_ + ".T", task_t(self), true);
    kernel_.spawn(self.id(), name_ + ".deliver", deliver_loop(self), true);
  }
}

MsgId ToBroadcast::broadcast(Process& self, std::string payload) {
  ToMessage m{{self.id(), state(self.id()).counter + 1}, std::move(payload)};
  submit(self, m);
  return m.id;
}

void ToBroadcast::submit(Process& self, const ToMessage& m) {
  if (m.id.sender != self.id()) {
    throw std::invalid_argument(to_string(self.id()) + " cannot submit message " + to_string(m.id));
  }
  if (!submitted_.insert(m.id).second) throw std::invalid_argument("duplicate message identity " + to_string(m.id));
  auto& st = state(self.id());
  st.counter = std::max(st.counter, m.id.counter);
  self.note(name_, "broadcast " + to_string(m.id));
  self.send(self.id(), name_, encode(m));
}

Consensus<Batch>& ToBroadcast::instance(std::uint64_t k) {
  auto& slot = cs_[k];
  if (!slot) slot = std::make_unique<Consensus<Batch>>("CS[" + std::to_string(k) + "]", kernel_.n());
  return *slot;
}

std::optional<Batch> ToBroadcast::decided(std::uint64_t k) const {
  auto it = cs_.find(k);
  if (it == cs_.end()) return std::nullopt;
  return it->second->decided();
}

void ToBroadcast::on_message(Process& self, const sim::Message& wire) {
  auto m = decode_to(wire.payload);
  auto& st = state(self.id());
  if (!st.seen.insert(m.id).second) return;
  self.broadcast(name_, wire.payload);
  st.delivered.emplace(m.id, std::move(m));
}

Task<void> ToBroadcast::task_t(Process self) {
  auto& st = state(self.id());
  auto pending = [&st] {
    for (const auto& [id, m] : st.delivered) {
      if (!st.in_to_deliverable.count(id)) return true;
    }
    return false;
  };
  while (true) {
    co_await self.until(pending, name_ + ".T wakes");
    // delivered is keyed by MsgId, so this is already the canonical order.
    Batch seq;
    for (const auto& [id, m] : st.delivered) {
      if (!st.in_to_deliverable.count(id)) seq.push_back(m);
    }
    ++st.sn;
    auto res = co_await instance(st.sn).propose(self, seq);
    for (const auto& m : res) {
      if (st.in_to_deliverable.insert(m.id).second) st.to_deliverable.push_back(m);
    }
  }
}

Task<void> ToBroadcast::deliver_loop(Process self) {
  auto& st = state(self.id());
  while (true) {
    co_await self.until([&st] { return st.next < st.to_deliverable.size(); }, name_ + ".deliver wakes");
    const auto m = st.to_deliverable[st.next++];
    st.sequence.push_back(m.id);
    self.note(name_, "deliver " + to_string(m.id));
    if (deliver_fn_) deliver_fn_(self, m);
  }
}

namespace {
Task<void> broadcaster(Process self, ToBroadcast& to, int count) {
  for (int i = 1; i <= count; ++i) {
    to.broadcast(self, "m" + std::to_string(self.id().value) + "." + std::to_string(i));
    if (i < count) co_await self.step("next broadcast");
  }
}
}  // namespace

void spawn_broadcasters(sim::Kernel& kernel, ToBroadcast& to, int count) {
  for (int p = 1; p <= kernel.n(); ++p) {
    kernel.spawn(sim::pid(p), "client", broadcaster(kernel.process(sim::pid(p)), to, count));
  }
}

ToReport check_to_log(const sim::EventLog& log, int n, const std::string& object) {
  ToReport r;
  auto fail = [&r](bool& flag, std::string why) {
    if (flag) {
      flag = false;
      if (r.failure.empty()) r.failure = std::move(why);
    }
  };
  std::map<std::string, ProcessId> broadcaster;
  std::vector<std::vector<std::string>> seqs(static_cast<std::size_t>(n));
  std::vector<std::set<std::string>> got(static_cast<std::size_t>(n));
  std::vector<bool> crashed(static_cast<std::size_t>(n), false);
  std::vector<std::string> global;

  for (const auto& e : log) {
    if (e.kind == sim::EventKind::crash) crashed.at(e.pid.index()) = true;
    if (e.object != object || e.kind != sim::EventKind::internal) continue;
    if (e.detail.rfind("broadcast ", 0) == 0) {
      broadcaster[e.detail.substr(10)] = e.pid;
      ++r.broadcasts;
    } else if (e.detail.rfind("deliver ", 0) == 0) {
      auto id = e.detail.substr(8);
      auto i = e.pid.index();
      ++r.deliveries;
      if (!broadcaster.count(id)) fail(r.validity, to_string(e.pid) + " delivered " + id + " before any broadcast of it");
      if (!got[i].insert(id).second) fail(r.integrity, to_string(e.pid) + " delivered " + id + " twice");
      auto k = seqs[i].size();
      seqs[i].push_back(id);
      if (k < global.size()) {
        if (global[k] != id) {
          fail(r.order, to_string(e.pid) + " delivered " + id + " at position " + std::to_string(k) + " where another process delivered " + global[k]);
        }
      } else {
        global.push_back(id);
      }
    }
  }
  for (const auto& [id, p] : broadcaster) {
    if (!crashed[p.index()] && !got[p.index()].count(id)) {
      fail(r.termination1, to_string(p) + " broadcast " + id + " but never delivered it");
    }
  }
  std::set<std::string> anywhere;
  for (const auto& g : got) anywhere.insert(g.begin(), g.end());
  for (const auto& id : anywhere) {
    for (int p = 1; p <= n; ++p) {
      auto i = static_cast<std::size_t>(p - 1);
      if (!crashed[i] && !got[i].count(id)) fail(r.termination2, "p" + std::to_string(p) + " never delivered " + id);
    }
  }
  return r;
}

}  // namespace seqthink::agreement

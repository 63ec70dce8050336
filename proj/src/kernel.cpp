#include "seqthink/sim/kernel.hpp"

#include <stdexcept>

namespace seqthink::sim {

std::string_view to_string(RunStatus s) noexcept {
  return s == RunStatus::quiescent ? "quiescent" : "budget-exhausted";
}

KernelConfig kernel_config(const Scenario& s) {
  KernelConfig c;
  c.n = s.n;
  c.adversary = s.adversary;
  c.fairness = s.fairness;
  c.seed = s.seed;
  c.step_budget = s.step_budget;
  c.crash_plan = s.crash_plan;
  c.script = s.script;
  return c;
}

int Process::n() const noexcept { return kernel_->n(); }

void Process::send(ProcessId to, std::string channel, std::string payload) {
  kernel_->enqueue(id_, to, std::move(channel), std::move(payload));
}

void Process::broadcast(const std::string& channel, const std::string& payload) {
  for (int j = 1; j <= kernel_->n(); ++j) kernel_->enqueue(id_, ProcessId{j}, channel, payload);
}

void Process::invoke(std::string object, std::string detail) {
  kernel_->record(id_, EventKind::invoke, std::move(object), std::move(detail));
}

void Process::respond(std::string object, std::string detail) {
  kernel_->record(id_, EventKind::respond, std::move(object), std::move(detail));
}

void Process::note(std::string object, std::string detail) {
  kernel_->record(id_, EventKind::internal, std::move(object), std::move(detail));
}

namespace {
Adversary make_adversary(const KernelConfig& c) {
  if (c.explore_prefix) return Adversary::explorer(c.n, *c.explore_prefix);
  return Adversary(c.adversary, c.fairness, c.seed, c.n, c.script);
}
}  // namespace

Kernel::Kernel(KernelConfig config)
    : config_(std::move(config)),
      adversary_(make_adversary(config_)),
      fault_rng_(config_.seed ^ 0x9e3779b97f4a7c15ULL),
      threads_of_(static_cast<std::size_t>(config_.n)),
      inbox_(static_cast<std::size_t>(config_.n)),
      crashed_(static_cast<std::size_t>(config_.n), false),
      last_step_of_(static_cast<std::size_t>(config_.n), 0) {
  if (config_.n < 1) throw std::invalid_argument("kernel needs at least one process");
  if (config_.step_budget == 0) throw std::invalid_argument("step budget must be positive");
  apply_planned_crashes();
}

Kernel::~Kernel() = default;

void Kernel::check_process(ProcessId p) const {
  if (p.value < 1 || p.value > config_.n) {
    throw std::out_of_range("process " + to_string(p) + " outside [1, n]");
  }
}

void Kernel::spawn(ProcessId p, std::string name, Task<void> task, bool daemon) {
  check_process(p);
  auto t = std::make_unique<Thread>();
  t->pid = p;
  t->name = std::move(name);
  t->resume_point = task.handle();
  t->task = std::move(task);
  t->daemon = daemon;
  if (crashed(p)) t->finished = true;
  threads_of_[p.index()].push_back(threads_.size());
  threads_.push_back(std::move(t));
}

void Kernel::on_receive(ProcessId p, std::string channel, Receiver receiver) {
  check_process(p);
  receivers_[{p, std::move(channel)}] = std::move(receiver);
}

void Kernel::park(std::coroutine_handle<> h, std::function<bool()> guard) {
  if (current_ == nullptr) throw std::logic_error("co_await on a kernel step outside a thread");
  current_->resume_point = h;
  current_->guard = std::move(guard);
}

void Kernel::record(ProcessId p, EventKind kind, std::string object, std::string detail) {
  log_.append(now_, p, kind, std::move(object), std::move(detail));
}

void Kernel::enqueue(ProcessId from, ProcessId to, std::string channel, std::string payload) {
  check_process(to);
  record(from, EventKind::send, channel, to_string(to) + " " + payload);
  if (crashed(to)) return;
  Message m{next_message_id_++, from, to, std::move(channel), std::move(payload), now_};
  auto id = m.id;
  inbox_[to.index()].emplace(id, std::move(m));
}

std::vector<ProcessStep> Kernel::enabled_steps() {
  std::vector<ProcessStep> out;
  for (int p = 1; p <= config_.n; ++p) {
    if (crashed_[static_cast<std::size_t>(p - 1)]) continue;
    for (auto t : threads_of_[static_cast<std::size_t>(p - 1)]) {
      auto& th = *threads_[t];
      if (th.finished) continue;
      bool enabled = !th.guard || th.guard();
      if (enabled && !th.was_enabled) th.enabled_since = now_ + 1;
      th.was_enabled = enabled;
      if (enabled) out.push_back(ProcessStep{th.pid, StepKind::local, t, th.enabled_since, nullptr});
    }
    for (const auto& [id, msg] : inbox_[static_cast<std::size_t>(p - 1)]) {
      out.push_back(ProcessStep{msg.to, StepKind::deliver, id, msg.send_step + 1, &msg});
    }
  }
  return out;
}

std::vector<const Message*> Kernel::pending_to(ProcessId p) const {
  check_process(p);
  std::vector<const Message*> out;
  for (const auto& [id, msg] : inbox_[p.index()]) out.push_back(&msg);
  return out;
}

bool Kernel::step_once() {
  if (now_ >= config_.step_budget) {
    budget_exhausted_ = !enabled_steps().empty();
    return false;
  }
  auto enabled = enabled_steps();
  if (enabled.empty()) return false;
  auto pick = adversary_.choose(enabled, now_);
  ProcessStep chosen = enabled.at(pick);
  ++now_;
  max_wait_ = std::max(max_wait_, now_ - chosen.enabled_since);
  last_step_of_[chosen.pid.index()] = now_;
  if (chosen.kind == StepKind::local) {
    run_local(*threads_[chosen.slot]);
  } else {
    run_delivery(chosen.slot, chosen.pid);
  }
  apply_planned_crashes();
  return true;
}

RunOutcome Kernel::run() {
  while (step_once()) {
  }
  RunOutcome out;
  out.steps = now_;
  out.max_wait = max_wait_;
  out.status = budget_exhausted_ ? RunStatus::budget_exhausted : RunStatus::quiescent;
  for (const auto& t : threads_) {
    if (!t->finished && !t->daemon && !crashed(t->pid)) ++out.blocked_threads;
  }
  return out;
}

void Kernel::run_local(Thread& t) {
  current_ = &t;
  t.was_enabled = false;
  t.guard = nullptr;
  if (!t.started) {
    t.started = true;
    record(t.pid, EventKind::internal, "", "start " + t.name);
  }
  auto h = t.resume_point;
  h.resume();
  current_ = nullptr;
  if (t.task.done()) {
    t.finished = true;
    t.task.rethrow_if_failed();
  }
}

void Kernel::run_delivery(std::uint64_t message_id, ProcessId to) {
  auto& box = inbox_[to.index()];
  auto node = box.extract(message_id);
  const Message& m = node.mapped();
  record(to, EventKind::deliver, m.channel, to_string(m.from) + " " + m.payload);
  auto it = receivers_.find({to, m.channel});
  if (it == receivers_.end()) {
    throw std::logic_error("no receiver for channel '" + m.channel + "' at " + to_string(to));
  }
  Process self(*this, to);
  it->second(self, m);
}

void Kernel::crash(ProcessId p) {
  check_process(p);
  if (crashed(p)) throw std::logic_error(to_string(p) + " is already crashed");
  if (current_ != nullptr && current_->pid == p) {
    throw std::logic_error("a process cannot be crashed from inside its own step");
  }
  crashed_[p.index()] = true;
  record(p, EventKind::crash, "", "");
  for (auto& t : threads_) {
    if (t->pid == p && !t->finished) {
      t->finished = true;
      t->task = Task<void>{};
    }
  }
  inbox_[p.index()].clear();
  // A broadcast issued in p's last step is cut short: each of its undelivered
  // messages survives on a coin flip drawn from the run seed.
  auto last = last_step_of_[p.index()];
  if (last == 0) return;
  for (auto& box : inbox_) {
    for (auto it = box.begin(); it != box.end();) {
      if (it->second.from == p && it->second.send_step == last && (fault_rng_() & 1U) == 0) {
        it = box.erase(it);
      } else {
        ++it;
      }
    }
  }
}

void Kernel::apply_planned_crashes() {
  for (const auto& [p, at] : config_.crash_plan) {
    if (at == now_ && p.value >= 1 && p.value <= config_.n && !crashed(p)) crash(p);
  }
}

}  // namespace seqthink::sim

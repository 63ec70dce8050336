#include "seqthink/runner.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "seqthink/abd.hpp"
#include "seqthink/agreement.hpp"
#include "seqthink/mutex.hpp"
#include "seqthink/objects/ledger.hpp"
#include "seqthink/objects/specs.hpp"
#include "seqthink/universal.hpp"

namespace seqthink::runner {

using sim::ProcessId;
using sim::Scenario;
using sim::ScenarioError;

namespace {

constexpr std::uint64_t kWorkloadSalt = 0x6a09e667f3bcc909ULL;

const std::vector<std::string> kObjects = {"register", "counter", "stack", "ledger", "consensus"};

bool is_mutex(const std::string& p) { return p == "peterson" || p == "tournament"; }
bool is_universal(const std::string& p) { return p == "universal-to" || p == "universal-llsc"; }

template <class F>
void with_spec(const std::string& object, F&& f) {
  if (object == "register") {
    f(objects::RegisterSpec{});
  } else if (object == "counter") {
    f(objects::CounterSpec{});
  } else if (object == "stack") {
    f(objects::StackSpec{});
  } else if (object == "ledger") {
    f(objects::LedgerSpec{});
  } else if (object == "consensus") {
    f(objects::ConsensusSpec{});
  } else {
    throw ScenarioError("object", "unknown object '" + object + "'");
  }
}

std::string generated_op(const std::string& object, std::mt19937_64& rng, int p, int k) {
  auto tag = std::to_string(p) + std::to_string(k);
  bool update = rng() % 2 == 0;
  if (object == "register") return update ? "write " + tag : "read";
  if (object == "counter") return update ? "inc" : "read";
  if (object == "stack") return update ? "push " + tag : "pop";
  if (object == "ledger") return update ? "append tx" + tag : "read";
  return "propose " + tag;
}

void lincheck_object(RunReport& r, const std::string& object, const auto& spec) {
  r.object = object;
  r.history = lincheck::extract_history(r.log, object);
  r.verdict = lincheck::check(*r.history, spec);
  Check c{"linearizable", Status::pass, ""};
  if (r.verdict->rejected()) {
    c.status = Status::violation;
    c.detail = r.verdict->reason;
  } else if (!r.verdict->accepted()) {
    c.status = Status::undecided;
    c.detail = r.verdict->reason;
  }
  r.checks.push_back(std::move(c));
}

void expect(RunReport& r, std::string name, bool ok, std::string detail = {}) {
  r.checks.push_back({std::move(name), ok ? Status::pass : Status::violation, ok ? std::string() : std::move(detail)});
}

// Non-crashed clients must all finish when the run is within tolerance.
void termination(RunReport& r, bool required) {
  if (!required) return;
  expect(r, "termination", r.outcome.blocked_threads == 0,
         std::to_string(r.outcome.blocked_threads) + " client thread(s) blocked at quiescence");
}

bool within_tolerance(const Scenario& s) {
  return static_cast<int>(s.crash_plan.size()) <= crash_tolerance(s.protocol, s.n);
}

void run_mutex(const Scenario& s, sim::Kernel& k, RunReport& r) {
  auto lock = mutex::make_lock(s.protocol, s.n);
  mutex::spawn_clients(k, *lock, s.rounds, s.cs_steps);
  r.outcome = k.run();
  r.log = k.log();
  auto overlap = mutex::find_overlap(mutex::cs_intervals(r.log));
  expect(r, "mutual exclusion", !overlap,
         overlap ? sim::to_string(overlap->first.pid) + " and " + sim::to_string(overlap->second.pid) +
                       " both in the critical section at seq " + std::to_string(overlap->second.enter)
                 : "");
  auto p = mutex::progress(r.log);
  if (s.fairness == sim::Fairness::fair && s.crash_plan.empty()) {
    expect(r, "deadlock freedom", p.stuck == 0 && r.outcome.status == sim::RunStatus::quiescent,
           std::to_string(p.stuck) + " acquire(s) never entered");
  }
  expect(r, "node bypass <= 1", p.max_node_bypass <= 1, "node bypass " + std::to_string(p.max_node_bypass));
}

void run_abd(const Scenario& s, sim::Kernel& k, RunReport& r) {
  abd::Options opt;
  opt.skip_read_phase2 = s.skip_read_phase2;
  abd::Register reg(k, opt);
  abd::spawn_clients(k, reg, workload(s));
  r.outcome = k.run();
  r.log = k.log();
  lincheck_object(r, opt.object, objects::RegisterSpec{});
  termination(r, within_tolerance(s));
  std::string bad;
  const auto& qs = reg.completed_quorums();
  for (std::size_t i = 0; i < qs.size() && bad.empty(); ++i) {
    for (std::size_t j = i + 1; j < qs.size(); ++j) {
      if (std::none_of(qs[i].begin(), qs[i].end(), [&](ProcessId p) { return qs[j].count(p); })) {
        bad = "quorums " + std::to_string(i) + " and " + std::to_string(j) + " are disjoint";
        break;
      }
    }
  }
  expect(r, "quorum intersection", bad.empty(), bad);
}

void run_consensus(const Scenario& s, sim::Kernel& k, RunReport& r) {
  std::map<ProcessId, std::int64_t> proposals;
  for (const auto& [p, ops] : workload(s)) {
    if (ops.empty()) continue;
    auto op = objects::parse_op(ops.front(), p);
    if (op.name != "propose" || ops.size() != 1) throw ScenarioError("ops." + std::to_string(p.value), "expected one 'propose v'");
    proposals[p] = objects::int_arg(op);
  }
  agreement::Consensus<std::int64_t> cons("M", s.n);
  agreement::spawn_proposers(k, cons, proposals);
  r.outcome = k.run();
  r.log = k.log();
  std::set<std::string> decided;
  std::map<ProcessId, int> accesses;
  for (const auto& e : r.log) {
    if (e.object == "M") ++accesses[e.pid];
    if (e.object == "consensus" && e.kind == sim::EventKind::respond) decided.insert(e.detail);
  }
  expect(r, "agreement", decided.size() <= 1, std::to_string(decided.size()) + " distinct decisions");
  bool valid = std::all_of(decided.begin(), decided.end(), [&](const std::string& d) {
    return std::any_of(proposals.begin(), proposals.end(), [&](const auto& pv) { return std::to_string(pv.second) == d; });
  });
  expect(r, "validity", valid, "decided a value nobody proposed");
  int worst = 0;
  for (const auto& [p, a] : accesses) worst = std::max(worst, a);
  expect(r, "wait-free bound", worst <= 3, "a proposer took " + std::to_string(worst) + " LL/SC steps");
  termination(r, true);
  lincheck_object(r, "consensus", objects::ConsensusSpec{});
}

void run_to(const Scenario& s, sim::Kernel& k, RunReport& r) {
  agreement::ToBroadcast to(k);
  agreement::spawn_broadcasters(k, to, s.ops);
  to.start();
  r.outcome = k.run();
  r.log = k.log();
  auto t = agreement::check_to_log(r.log, s.n);
  expect(r, "TO validity", t.validity, t.failure);
  expect(r, "TO integrity", t.integrity, t.failure);
  expect(r, "TO order", t.order, t.failure);
  expect(r, "TO termination-1", t.termination1, t.failure);
  expect(r, "TO termination-2", t.termination2, t.failure);
}

void run_universal(const Scenario& s, sim::Kernel& k, RunReport& r) {
  with_spec(s.object, [&](auto spec) {
    if (s.protocol == "universal-to") {
      universal::ToUniversal u(k, spec, s.object);
      universal::spawn_clients(k, u, workload(s));
      u.start();
      r.outcome = k.run();
      r.log = k.log();
      auto d = universal::replica_divergence(k, u);
      expect(r, "replica convergence", !d, d.value_or(""));
    } else {
      universal::LlscUniversal u(s.n, spec, s.object);
      universal::spawn_clients(k, u, workload(s));
      r.outcome = k.run();
      r.log = k.log();
      auto e = u.exactly_once_violation();
      expect(r, "exactly once", !e, e.value_or(""));
    }
    termination(r, true);
    lincheck_object(r, s.object, spec);
  });
}

}  // namespace

std::string_view to_string(Status s) noexcept {
  switch (s) {
    case Status::pass: return "pass";
    case Status::violation: return "violation";
    case Status::undecided: return "undecided";
  }
  return "?";
}

Status RunReport::status() const noexcept {
  Status worst = Status::pass;
  for (const auto& c : checks) {
    if (c.status == Status::violation) return Status::violation;
    if (c.status == Status::undecided) worst = Status::undecided;
  }
  return worst;
}

int RunReport::exit_code() const noexcept {
  switch (status()) {
    case Status::pass: return 0;
    case Status::violation: return 1;
    case Status::undecided: return 2;
  }
  return 2;
}

const Check* RunReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const std::vector<std::string>& protocols() {
  static const std::vector<std::string> all = {"peterson", "tournament",   "abd",
                                               "consensus", "to-broadcast", "universal-to",
                                               "universal-llsc"};
  return all;
}

int crash_tolerance(const std::string& protocol, int n) {
  if (is_mutex(protocol)) return 0;
  if (protocol == "abd") return (n - 1) / 2;
  return n - 1;
}

void validate(const Scenario& s) {
  sim::validate_basic(s);
  if (std::find(protocols().begin(), protocols().end(), s.protocol) == protocols().end()) {
    std::string known;
    for (const auto& p : protocols()) known += (known.empty() ? "" : ", ") + p;
    throw ScenarioError("protocol", "unknown protocol '" + s.protocol + "' (known: " + known + ")");
  }
  if (s.protocol == "peterson" && s.n != 2) throw ScenarioError("n", "peterson needs n = 2");
  if (s.protocol == "tournament" && s.n < 2) throw ScenarioError("n", "tournament needs n >= 2");
  if (!s.violating && !within_tolerance(s)) {
    throw ScenarioError("crash", std::to_string(s.crash_plan.size()) + " crashes exceed the tolerance " +
                                     std::to_string(crash_tolerance(s.protocol, s.n)) + " of " + s.protocol +
                                     " (set violating = true to allow)");
  }
  if (s.skip_read_phase2 && !s.demo) throw ScenarioError("skip_read_phase2", "only allowed in demo scenarios (demo = true)");
  if (s.skip_read_phase2 && s.protocol != "abd") throw ScenarioError("skip_read_phase2", "only applies to abd");
  if (is_universal(s.protocol) && std::find(kObjects.begin(), kObjects.end(), s.object) == kObjects.end()) {
    throw ScenarioError("object", "unknown object '" + s.object + "'");
  }
  if (s.protocol == "abd" && s.object != "register") throw ScenarioError("object", "abd implements a register");
  if (s.ops < 0) throw ScenarioError("ops", "must not be negative");
  if (s.rounds < 0) throw ScenarioError("rounds", "must not be negative");
  if (s.cs_steps < 0) throw ScenarioError("cs_steps", "must not be negative");
  auto object = s.protocol == "abd" ? std::string("register") : s.protocol == "consensus" ? "consensus" : s.object;
  for (const auto& [p, ops] : s.workload) {
    for (const auto& text : ops) {
      try {
        // Dry run on the initial state rejects names and arguments outside
        // the object's alphabet.
        with_spec(object, [&](const auto& spec) { (void)spec.apply(spec.initial(), objects::parse_op(text, p)); });
      } catch (const std::exception& e) {
        throw ScenarioError("ops." + std::to_string(p.value), e.what());
      }
    }
  }
}

std::map<ProcessId, std::vector<std::string>> workload(const Scenario& s) {
  if (!s.workload.empty()) return s.workload;
  std::mt19937_64 rng(s.seed ^ kWorkloadSalt);
  auto object = s.protocol == "abd" ? std::string("register") : s.protocol == "consensus" ? "consensus" : s.object;
  std::map<ProcessId, std::vector<std::string>> w;
  for (int p = 1; p <= s.n; ++p) {
    int count = object == "consensus" ? 1 : s.ops;
    for (int k = 0; k < count; ++k) w[sim::pid(p)].push_back(generated_op(object, rng, p, k));
  }
  return w;
}

RunReport run_scenario(const Scenario& s) {
  validate(s);
  RunReport r;
  r.scenario = s;
  sim::Kernel k(sim::kernel_config(s));
  if (is_mutex(s.protocol)) {
    run_mutex(s, k, r);
  } else if (s.protocol == "abd") {
    run_abd(s, k, r);
  } else if (s.protocol == "consensus") {
    run_consensus(s, k, r);
  } else if (s.protocol == "to-broadcast") {
    run_to(s, k, r);
  } else {
    run_universal(s, k, r);
  }
  r.digest = r.log.digest();
  if (r.outcome.status == sim::RunStatus::budget_exhausted) {
    // Liveness cannot be judged on a truncated run.
    for (auto& c : r.checks) {
      bool liveness = c.name == "deadlock freedom" || c.name == "termination" || c.name.starts_with("TO termination");
      if (liveness && c.status == Status::violation) c.status = Status::undecided;
    }
    r.checks.push_back({"step budget", Status::undecided,
                        "budget of " + std::to_string(s.step_budget) + " steps exhausted"});
  }
  return r;
}

std::vector<std::string> summary(const RunReport& r) {
  std::vector<std::string> out;
  if (r.verdict) {
    switch (r.verdict->outcome) {
      case lincheck::Outcome::accepted: out.push_back("linearizable: yes"); break;
      case lincheck::Outcome::rejected: {
        std::string core;
        for (auto id : r.verdict->violation_core) {
          core += (core.empty() ? "" : "; ") + lincheck::describe(r.history->operations().at(id));
        }
        out.push_back("linearizable: NO");
        out.push_back("violation core: " + core);
        break;
      }
      case lincheck::Outcome::undecided: out.push_back("linearizable: undecided (" + r.verdict->reason + ")"); break;
    }
  }
  for (const auto& c : r.checks) {
    if (c.name == "linearizable") continue;
    out.push_back(c.name + ": " + std::string(to_string(c.status)) + (c.detail.empty() ? "" : " (" + c.detail + ")"));
  }
  return out;
}

}  // namespace seqthink::runner

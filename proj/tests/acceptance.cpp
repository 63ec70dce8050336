// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "naive_oracle.hpp"
#include "seqthink/agreement.hpp"
#include "seqthink/lincheck/check.hpp"
#include "seqthink/mutex.hpp"
#include "seqthink/objects/ledger.hpp"
#include "seqthink/objects/specs.hpp"
#include "seqthink/runner.hpp"
#include "seqthink/universal.hpp"

using namespace seqthink;
using namespace seqthink::sim;

namespace {

struct Result {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f s", s);
  return buf;
}

// Every runner invocation is recorded so that criterion 10 can replay it.
struct Recorded {
  Scenario scenario;
  std::string digest;
  runner::Status status;
};
std::vector<Recorded> g_runs;

runner::RunReport run(const Scenario& s) {
  auto r = runner::run_scenario(s);
  g_runs.push_back({s, r.digest, r.status()});
  return r;
}

Scenario seeded(const std::string& protocol, int n, std::uint64_t seed) {
  Scenario s;
  s.protocol = protocol;
  s.n = n;
  s.seed = seed;
  s.adversary = AdversaryKind::seeded_random;
  return s;
}

// Picks up to `max_crashes` distinct victims with crash steps below `horizon`.
void plan_crashes(Scenario& s, std::mt19937_64& rng, int max_crashes, std::uint64_t horizon,
                  std::optional<ProcessId> spare = std::nullopt) {
  int count = static_cast<int>(rng() % (max_crashes + 1));
  std::vector<int> ids;
  for (int p = 1; p <= s.n; ++p) {
    if (!spare || pid(p) != *spare) ids.push_back(p);
  }
  std::shuffle(ids.begin(), ids.end(), rng);
  for (int i = 0; i < count && i < static_cast<int>(ids.size()); ++i) s.crash_plan[pid(ids[i])] = rng() % horizon;
}

std::string first_failure(const runner::RunReport& r) {
  for (const auto& c : r.checks) {
    if (c.status != runner::Status::pass) return c.name + ": " + std::string(runner::to_string(c.status)) + " " + c.detail;
  }
  return "";
}

// 1 -----------------------------------------------------------------------

Result mutual_exclusion() {
  auto t0 = Clock::now();
  std::size_t overlaps = 0, exhausted = 0, other = 0, runs = 0;
  std::string first;
  auto sweep = [&](const std::string& protocol, int n, std::uint64_t seeds) {
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
      auto s = seeded(protocol, n, seed);
      s.fairness = Fairness::fair;
      auto r = run(s);
      ++runs;
      bool overlap = r.find("mutual exclusion")->status != runner::Status::pass;
      bool budget = r.outcome.status == RunStatus::budget_exhausted;
      overlaps += overlap;
      exhausted += budget;
      if (r.status() != runner::Status::pass) {
        other += !overlap && !budget;
        if (first.empty()) first = protocol + " seed " + std::to_string(seed) + ": " + first_failure(r);
      }
    }
  };
  sweep("peterson", 2, 10'000);
  sweep("tournament", 4, 2'000);
  double secs = seconds_since(t0);
  Result res;
  res.pass = overlaps == 0 && exhausted == 0 && other == 0 && secs < 60;
  res.detail = std::to_string(runs) + " runs, " + std::to_string(overlaps) + " overlaps, " + std::to_string(exhausted) +
               " budget exhaustions, " + fmt_seconds(secs);
  if (!first.empty()) res.detail += "; first: " + first;
  return res;
}

// 2 -----------------------------------------------------------------------

KernelConfig scripted(int n, const std::vector<std::string>& script) {
  KernelConfig c;
  c.n = n;
  c.adversary = AdversaryKind::scripted;
  for (const auto& s : script) c.script.push_back(parse_script_entry(s));
  c.step_budget = script.size();
  return c;
}

std::vector<std::string> repeat(const std::string& who, int times) { return std::vector<std::string>(times, who); }

std::vector<std::string> concat(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

bool entered(const EventLog& log, ProcessId p) {
  for (const auto& e : mutex::cs_intervals(log)) {
    if (e.pid == p) return true;
  }
  return false;
}

Result peterson_wait() {
  using mutex::Flag;
  std::vector<std::string> failed;
  // Both flags up and LAST = 1: p1 spins for 40 of its own steps.
  {
    auto script = concat({repeat("p2", 3), repeat("p1", 3), repeat("p1", 40)});
    Kernel k(scripted(2, script));
    mutex::Peterson lock;
    mutex::spawn_clients(k, lock, 1, 1);
    k.run();
    bool ok = lock.pair().flag(1).peek() == Flag::up && lock.pair().flag(2).peek() == Flag::up &&
              lock.pair().last().peek() == 1 && !lock.pair().admits(1) && !entered(k.log(), pid(1));
    if (!ok) failed.push_back("waits while FLAG[2] up and LAST = 1");
  }
  // First disjunct: p2 passes through and lowers FLAG[2], then p1 enters.
  {
    auto script = concat({repeat("p2", 3), repeat("p1", 3), repeat("p1", 10), repeat("p2", 6), repeat("p1", 4)});
    Kernel k(scripted(2, script));
    mutex::Peterson lock;
    mutex::spawn_clients(k, lock, 1, 1);
    k.run();
    bool ok = lock.pair().flag(2).peek() == Flag::down && entered(k.log(), pid(1)) &&
              !mutex::find_overlap(mutex::cs_intervals(k.log()));
    if (!ok) failed.push_back("FLAG[2] = down admits");
  }
  // Second disjunct: p2 writes LAST after p1, FLAG[2] stays up.
  {
    auto script = concat({{"p1", "p1", "p2", "p2", "p1", "p2"}, repeat("p1", 3)});
    Kernel k(scripted(2, script));
    mutex::Peterson lock;
    mutex::spawn_clients(k, lock, 1, 1);
    k.run();
    bool ok = lock.pair().flag(2).peek() == Flag::up && lock.pair().last().peek() == 2 && entered(k.log(), pid(1)) &&
              !entered(k.log(), pid(2));
    if (!ok) failed.push_back("LAST = 2 admits");
  }
  Result res;
  res.pass = failed.empty();
  res.detail = res.pass ? "spin, FLAG flip and LAST flip schedules behave as the predicate says" : "failed:";
  for (const auto& f : failed) res.detail += " [" + f + "]";
  return res;
}

// 3 -----------------------------------------------------------------------

Result abd_sweep() {
  std::size_t runs = 0, accepted = 0, max_ops = 0;
  std::string first;
  for (int n : {3, 5}) {
    int t = (n - 1) / 2;
    for (std::uint64_t seed = 0; seed < 2'000; ++seed) {
      auto s = seeded("abd", n, seed);
      std::mt19937_64 rng(seed * 31 + n);
      s.ops = 1 + static_cast<int>(rng() % (12 / n));
      plan_crashes(s, rng, t, 200);
      auto r = run(s);
      ++runs;
      max_ops = std::max(max_ops, r.history ? r.history->operations().size() : 0);
      bool ok = r.verdict && r.verdict->accepted() && r.status() == runner::Status::pass;
      accepted += ok;
      if (!ok && first.empty()) first = "n=" + std::to_string(n) + " seed " + std::to_string(seed) + ": " + first_failure(r);
    }
  }
  Result res;
  res.pass = accepted == runs;
  res.detail = std::to_string(accepted) + "/" + std::to_string(runs) + " histories accepted, largest " +
               std::to_string(max_ops) + " ops";
  if (!first.empty()) res.detail += "; first: " + first;
  return res;
}

// 4 -----------------------------------------------------------------------

Result inversion() {
  auto s = load_scenario(std::string(SEQTHINK_SCENARIOS) + "/abd-inversion.scn");
  s.skip_read_phase2 = true;
  auto without = run(s);
  s.skip_read_phase2 = false;
  auto with = run(s);
  bool rejected = without.verdict && without.verdict->rejected();
  bool accepted = with.verdict && with.verdict->accepted();
  Result res;
  res.pass = rejected && accepted;
  res.detail = std::string("phase 2 off: ") + (rejected ? "REJECTED" : "not rejected") +
               ", phase 2 on: " + (accepted ? "ACCEPTED" : "not accepted");
  return res;
}

// 5 -----------------------------------------------------------------------

struct ConsensusTally {
  std::size_t schedules = 0, violations = 0;
  int max_steps = 0;
  std::string first;
};

void enumerate_consensus(int n, std::optional<std::pair<ProcessId, std::uint64_t>> crash, ConsensusTally& t) {
  KernelConfig c;
  c.n = n;
  if (crash) c.crash_plan[crash->first] = crash->second;
  std::map<ProcessId, std::int64_t> proposals;
  for (int p = 1; p <= n; ++p) proposals[pid(p)] = 10 * p;
  t.schedules += explore_schedules(c, [&](Kernel& k) {
    agreement::Consensus<std::int64_t> cons("M", n);
    agreement::spawn_proposers(k, cons, proposals);
    auto out = k.run();
    std::map<ProcessId, std::int64_t> decided;
    std::map<ProcessId, int> steps;
    for (const auto& e : k.log()) {
      if (e.object == "M") ++steps[e.pid];
      if (e.object == "consensus" && e.kind == EventKind::respond) decided[e.pid] = std::stoll(e.detail);
    }
    std::set<std::int64_t> values;
    for (const auto& [p, v] : decided) values.insert(v);
    std::string bad;
    if (out.status != RunStatus::quiescent) bad = "not quiescent";
    if (values.size() > 1) bad = "disagreement";
    for (auto v : values) {
      if (!proposals.count(pid(static_cast<int>(v / 10))) || v % 10 != 0) bad = "invalid decision";
    }
    for (const auto& [p, a] : steps) {
      t.max_steps = std::max(t.max_steps, a);
      if (a > 3) bad = "more than 3 steps";
    }
    for (int p = 1; p <= n; ++p) {
      if (!k.crashed(pid(p)) && !decided.count(pid(p))) bad = "correct proposer undecided";
    }
    if (!bad.empty()) {
      ++t.violations;
      if (t.first.empty()) t.first = "n=" + std::to_string(n) + ": " + bad;
    }
  });
}

Result consensus_exhaustive() {
  ConsensusTally t;
  for (int n : {2, 3}) {
    enumerate_consensus(n, std::nullopt, t);
    // Each proposer takes at most 4 kernel steps (start, LL, SC, LL).
    for (int victim = 1; victim <= n; ++victim) {
      for (std::uint64_t at = 0; at < 4u * n; ++at) enumerate_consensus(n, std::pair{pid(victim), at}, t);
    }
  }
  Result res;
  res.pass = t.violations == 0;
  res.detail = std::to_string(t.schedules) + " schedules (with crash variants), " + std::to_string(t.violations) +
               " violations, max " + std::to_string(t.max_steps) + " own steps";
  if (!t.first.empty()) res.detail += "; first: " + t.first;
  return res;
}

// 6 -----------------------------------------------------------------------

// Pairwise prefix check after every delivery event, independent of
// check_to_log's positional comparison.
std::optional<std::string> prefix_violation(const EventLog& log, int n) {
  std::vector<std::vector<std::string>> seq(n + 1);
  for (const auto& e : log) {
    if (e.object != "to" || !e.detail.starts_with("deliver ")) continue;
    seq[e.pid.value].push_back(e.detail.substr(8));
    for (int a = 1; a <= n; ++a) {
      for (int b = a + 1; b <= n; ++b) {
        std::size_t m = std::min(seq[a].size(), seq[b].size());
        if (!std::equal(seq[a].begin(), seq[a].begin() + m, seq[b].begin())) {
          return "p" + std::to_string(a) + " and p" + std::to_string(b) + " diverge at seq " + std::to_string(e.seq);
        }
      }
    }
  }
  return std::nullopt;
}

Result to_sweep() {
  std::size_t runs = 0, ok = 0, crashed = 0;
  std::string first;
  for (std::uint64_t seed = 0; seed < 1'000; ++seed) {
    auto s = seeded("to-broadcast", 4, seed);
    s.ops = 2;
    std::mt19937_64 rng(seed + 17);
    plan_crashes(s, rng, 1, 200);
    crashed += !s.crash_plan.empty();
    auto r = run(s);
    ++runs;
    auto pv = prefix_violation(r.log, 4);
    bool good = r.status() == runner::Status::pass && !pv;
    ok += good;
    if (!good && first.empty()) first = "seed " + std::to_string(seed) + ": " + (pv ? *pv : first_failure(r));
  }
  Result res;
  res.pass = ok == runs;
  res.detail = std::to_string(ok) + "/" + std::to_string(runs) + " runs satisfy all five properties and the prefix relation (" +
               std::to_string(crashed) + " with a crash)";
  if (!first.empty()) res.detail += "; first: " + first;
  return res;
}

// 7 -----------------------------------------------------------------------

std::vector<std::uint64_t> accesses_per_op(const EventLog& log, const std::string& object, ProcessId p) {
  std::vector<std::uint64_t> out;
  std::optional<std::uint64_t> open;
  for (const auto& e : log) {
    if (e.pid != p) continue;
    if (e.object == object && e.kind == EventKind::invoke) open = 0;
    if (open && (e.object == "STATE" || e.object.rfind("BOARD[", 0) == 0)) ++*open;
    if (e.object == object && e.kind == EventKind::respond && open) {
      out.push_back(*open);
      open.reset();
    }
  }
  return out;
}

Result universal_sweeps() {
  std::size_t to_ok = 0, llsc_ok = 0, survivor_ok = 0;
  std::uint64_t worst = 0;
  std::string first;
  auto note = [&](const std::string& what, std::uint64_t seed, const std::string& why) {
    if (first.empty()) first = what + " seed " + std::to_string(seed) + ": " + why;
  };
  auto linearizable = [](const runner::RunReport& r) {
    return r.verdict && r.verdict->accepted() && r.status() == runner::Status::pass;
  };
  for (std::uint64_t seed = 0; seed < 1'000; ++seed) {
    auto s = seeded("universal-to", 4, seed);
    s.object = "stack";
    auto r = run(s);
    if (linearizable(r)) ++to_ok; else note("to", seed, first_failure(r));
  }
  for (std::uint64_t seed = 0; seed < 1'000; ++seed) {
    auto s = seeded("universal-llsc", 4, seed);
    s.object = "stack";
    std::mt19937_64 rng(seed + 101);
    plan_crashes(s, rng, 3, 120);
    auto r = run(s);
    if (linearizable(r)) ++llsc_ok; else note("llsc", seed, first_failure(r));
  }
  const std::uint64_t bound = universal::llsc_step_bound(4);
  const std::uint64_t survivor_runs = 200;
  for (std::uint64_t seed = 0; seed < survivor_runs; ++seed) {
    auto s = seeded("universal-llsc", 4, seed);
    s.object = "stack";
    auto survivor = pid(1 + static_cast<int>(seed % 4));
    std::mt19937_64 rng(seed + 7);
    for (int p = 1; p <= 4; ++p) {
      if (pid(p) != survivor) s.crash_plan[pid(p)] = rng() % 40;
    }
    auto r = run(s);
    auto own = accesses_per_op(r.log, "stack", survivor);
    bool good = r.status() == runner::Status::pass && own.size() == static_cast<std::size_t>(s.ops);
    for (auto a : own) {
      worst = std::max(worst, a);
      good = good && a <= bound;
    }
    if (good) ++survivor_ok; else note("survivor", seed, "completed " + std::to_string(own.size()) + " ops");
  }
  Result res;
  res.pass = to_ok == 1'000 && llsc_ok == 1'000 && survivor_ok == survivor_runs;
  res.detail = "TO-based " + std::to_string(to_ok) + "/1000, LL/SC " + std::to_string(llsc_ok) +
               "/1000 linearizable; survivor " + std::to_string(survivor_ok) + "/" + std::to_string(survivor_runs) +
               " within " + std::to_string(bound) + " accesses (worst " + std::to_string(worst) + ")";
  if (!first.empty()) res.detail += "; first: " + first;
  return res;
}

// 8 -----------------------------------------------------------------------

Result checker_soundness() {
  auto t0 = Clock::now();
  lincheck::CheckOptions opts;
  opts.minimize = false;
  std::size_t total = 0, disagreements = 0;
  std::string first;
  for (bool pending : {false, true}) {
    for (int n = 1; n <= 6; ++n) {
      total += oracle::for_each_register_history(n, pending, [&](const lincheck::History& h) {
        bool fast = lincheck::check(h, objects::RegisterSpec{}, opts).accepted();
        if (fast != oracle::naive_linearizable(h, objects::RegisterSpec{})) {
          if (first.empty()) first = h.to_text();
          ++disagreements;
        }
      });
    }
  }
  Result res;
  res.pass = disagreements == 0;
  res.detail = std::to_string(total) + " histories (complete and with pending ops), " + std::to_string(disagreements) +
               " disagreements, " + fmt_seconds(seconds_since(t0));
  if (!first.empty()) res.detail += "; first:\n" + first;
  return res;
}

// 9 -----------------------------------------------------------------------

Result ledger_tamper() {
  std::size_t mutations = 0, missed = 0;
  std::string first;
  std::mt19937_64 rng(2024);
  for (std::size_t len = 1; len <= 32; ++len) {
    objects::LedgerState chain;
    for (std::size_t i = 0; i < len; ++i) chain.append("op" + std::to_string(i * 7 + len), pid(1 + static_cast<int>(i % 4)));
    for (std::size_t k = 0; k < len; ++k) {
      // A sampled bit set: every payload bit, every appender bit, and 16
      // prev_hash bits drawn per block.
      std::vector<std::function<void(objects::LedgerBlock&)>> flips;
      std::vector<std::size_t> expected;
      for (std::size_t bit = 0; bit < chain.blocks[k].payload.size() * 8; ++bit) {
        flips.push_back([bit](objects::LedgerBlock& b) { b.payload[bit / 8] ^= static_cast<char>(1 << (bit % 8)); });
        expected.push_back(k + 1);
      }
      for (int bit = 0; bit < 32; ++bit) {
        flips.push_back([bit](objects::LedgerBlock& b) { b.appender.value ^= 1 << bit; });
        expected.push_back(k + 1);
      }
      for (int i = 0; i < 16; ++i) {
        std::size_t bit = rng() % 256;
        flips.push_back([bit](objects::LedgerBlock& b) { b.prev_hash[bit / 8] ^= static_cast<std::uint8_t>(1 << (bit % 8)); });
        expected.push_back(k);
      }
      for (std::size_t f = 0; f < flips.size(); ++f) {
        auto copy = chain;
        flips[f](copy.blocks[k]);
        auto at = objects::verify_chain(copy);
        ++mutations;
        if (!at || *at < k || *at != expected[f]) {
          ++missed;
          if (first.empty()) {
            first = "length " + std::to_string(len) + " block " + std::to_string(k) + " flip " + std::to_string(f) +
                    ": " + (at ? "reported " + std::to_string(*at) : "undetected");
          }
        }
      }
    }
  }
  Result res;
  res.pass = missed == 0;
  res.detail = std::to_string(mutations) + " single-bit mutations, " + std::to_string(missed) + " missed or misplaced";
  if (!first.empty()) res.detail += "; first: " + first;
  return res;
}

// 10 ----------------------------------------------------------------------

Result determinism() {
  std::size_t replayed = 0, mismatched = 0;
  std::string first;
  for (const auto& rec : g_runs) {
    auto again = runner::run_scenario(rec.scenario);
    ++replayed;
    if (again.digest != rec.digest) {
      ++mismatched;
      if (first.empty()) first = rec.scenario.protocol + " seed " + std::to_string(rec.scenario.seed);
    }
  }
  Result res;
  res.pass = replayed > 0 && mismatched == 0;
  res.detail = std::to_string(replayed) + " of " + std::to_string(g_runs.size()) + " recorded runs replayed, " +
               std::to_string(mismatched) + " digest mismatches";
  if (!first.empty()) res.detail += "; first: " + first;
  return res;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Result (*fn)();
  };
  const Criterion all[] = {
      {1, "mutual exclusion", mutual_exclusion},
      {2, "peterson wait predicate", peterson_wait},
      {3, "abd linearizability", abd_sweep},
      {4, "new/old inversion", inversion},
      {5, "consensus exhaustive", consensus_exhaustive},
      {6, "to-broadcast properties", to_sweep},
      {7, "universal constructions", universal_sweeps},
      {8, "checker soundness", checker_soundness},
      {9, "ledger tamper evidence", ledger_tamper},
      {10, "determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : all) {
    auto t0 = Clock::now();
    Result r;
    try {
      r = c.fn();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    failed += !r.pass;
    std::printf("%s %d %s: %s [%s]\n", r.pass ? "PASS" : "FAIL", c.id, c.name, r.detail.c_str(),
                fmt_seconds(seconds_since(t0)).c_str());
    std::fflush(stdout);
  }
  std::printf("%d/10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}

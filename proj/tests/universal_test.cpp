#include <gtest/gtest.h>

#include "seqthink/lincheck/check.hpp"
#include "seqthink/objects/specs.hpp"
#include "seqthink/universal.hpp"

using namespace seqthink;
using namespace seqthink::sim;
using namespace seqthink::universal;
using objects::CounterSpec;
using objects::StackSpec;

namespace {

KernelConfig scripted(int n, const std::vector<std::string>& script) {
  KernelConfig c;
  c.n = n;
  c.adversary = AdversaryKind::scripted;
  for (const auto& s : script) c.script.push_back(parse_script_entry(s));
  return c;
}

KernelConfig random_config(int n, std::uint64_t seed) {
  KernelConfig c;
  c.n = n;
  c.adversary = AdversaryKind::seeded_random;
  c.seed = seed;
  return c;
}

std::map<ProcessId, std::string> results(const Kernel& k, const std::string& object) {
  std::map<ProcessId, std::string> out;
  for (const auto& e : k.log()) {
    if (e.object == object && e.kind == EventKind::respond) out[e.pid] = e.detail;
  }
  return out;
}

std::map<ProcessId, std::vector<std::string>> stack_workload(int n, std::uint64_t seed, int ops) {
  std::map<ProcessId, std::vector<std::string>> w;
  std::mt19937_64 rng(seed);
  for (int p = 1; p <= n; ++p) {
    for (int k = 0; k < ops; ++k) {
      w[pid(p)].push_back(rng() % 2 ? "push " + std::to_string(10 * p + k) : "pop");
    }
  }
  return w;
}

// Own register accesses (BOARD/STATE notes) of each completed invocation.
std::vector<std::uint64_t> accesses_per_op(const Kernel& k, const std::string& object, ProcessId p) {
  std::vector<std::uint64_t> out;
  std::optional<std::uint64_t> open;
  for (const auto& e : k.log()) {
    if (e.pid != p) continue;
    if (e.object == object && e.kind == EventKind::invoke) open = 0;
    if (open && (e.object == "STATE" || e.object.rfind("BOARD[", 0) == 0)) ++*open;
    if (e.object == object && e.kind == EventKind::respond) {
      out.push_back(*open);
      open.reset();
    }
  }
  return out;
}

}  // namespace

TEST(ToUniversal, SequentialPushThenPop) {
  Kernel k(random_config(1, 3));
  ToUniversal<StackSpec> u(k, StackSpec{}, "stack");
  spawn_clients(k, u, {{pid(1), {"push 3", "pop"}}});
  u.start();
  k.run();
  auto h = lincheck::extract_history(k.log(), "stack");
  ASSERT_EQ(h.operations().size(), 2u);
  EXPECT_EQ(h.operations()[1].result, "3");
}

TEST(ToUniversal, ConcurrentPushesReplicasAgree) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Kernel k(random_config(2, seed));
    ToUniversal<StackSpec> u(k, StackSpec{}, "stack");
    spawn_clients(k, u, {{pid(1), {"push 1"}}, {pid(2), {"push 2"}}});
    u.start();
    ASSERT_EQ(k.run().status, RunStatus::quiescent);
    EXPECT_EQ(replica_divergence(k, u), std::nullopt);
    EXPECT_EQ(u.applied(pid(1)), u.applied(pid(2)));
    EXPECT_EQ(u.replica_state(pid(1)).size(), 2u);
  }
}

TEST(ToUniversal, OnlyInvokerTakesResult) {
  // Counter increments return distinct values; a replica filling another
  // process's slot would hand two invokers the same count.
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Kernel k(random_config(3, seed));
    ToUniversal<CounterSpec> u(k, CounterSpec{}, "counter");
    spawn_clients(k, u, {{pid(1), {"inc"}}, {pid(2), {"inc"}}, {pid(3), {"inc"}}});
    u.start();
    k.run();
    std::set<std::string> got;
    for (const auto& [p, r] : results(k, "counter")) got.insert(r);
    EXPECT_EQ(got, (std::set<std::string>{"1", "2", "3"})) << seed;
  }
}

TEST(ToUniversal, SweepLinearizableWithOneCrash) {
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    auto c = random_config(4, seed);
    if (seed % 2) c.crash_plan[pid(1 + static_cast<int>(seed / 2 % 4))] = seed % 150;
    Kernel k(c);
    ToUniversal<StackSpec> u(k, StackSpec{}, "stack");
    spawn_clients(k, u, stack_workload(4, seed, 3));
    u.start();
    ASSERT_EQ(k.run().status, RunStatus::quiescent);
    auto v = lincheck::check(lincheck::extract_history(k.log(), "stack"), StackSpec{});
    ASSERT_EQ(v.outcome, lincheck::Outcome::accepted) << "seed " << seed << ": " << v.reason;
    ASSERT_EQ(replica_divergence(k, u), std::nullopt) << seed;
  }
}

TEST(LlscUniversal, SoloIncrement) {
  Kernel k(random_config(1, 0));
  LlscUniversal<CounterSpec> u(1, CounterSpec{}, "counter");
  spawn_clients(k, u, {{pid(1), {"inc"}}});
  k.run();
  EXPECT_EQ(u.state().sn[0], 1u);
  EXPECT_EQ(u.state().value, 1);
  EXPECT_EQ(results(k, "counter")[pid(1)], "1");
  EXPECT_EQ(accesses_per_op(k, "counter", pid(1)), (std::vector<std::uint64_t>{5}));
}

TEST(LlscUniversal, LoserReturnsResultAppliedByWinner) {
  // p1 announces and LLs; p2 runs its whole apply() and folds both ops; p1's
  // SC fails, its re-LL shows its op applied, so it skips the second SC.
  Kernel k(scripted(2, {"p1", "p1", "p1", "p2", "p2", "p2", "p2", "p2", "p2"}));
  LlscUniversal<CounterSpec> u(2, CounterSpec{}, "counter");
  spawn_clients(k, u, {{pid(1), {"inc"}}, {pid(2), {"inc"}}});
  k.run();
  auto r = results(k, "counter");
  EXPECT_EQ(r[pid(1)], "1");
  EXPECT_EQ(r[pid(2)], "2");
  EXPECT_EQ(u.commits(pid(1), 1), 1u);
  std::vector<std::string> p1_scs;
  for (const auto& e : k.log()) {
    if (e.pid == pid(1) && e.object == "STATE" && e.detail.rfind("sc", 0) == 0) p1_scs.push_back(e.detail.substr(0, 8));
  }
  EXPECT_EQ(p1_scs, (std::vector<std::string>{"sc false"}));
  EXPECT_EQ(u.exactly_once_violation(), std::nullopt);
}

TEST(LlscUniversal, LoserAppliesItselfOnSecondSc) {
  // p2 reads BOARD[1] before p1 announces, so p2's winning SC leaves p1's op
  // out; p1 recovers with lines A and B for itself.
  Kernel k(scripted(2, {"p2", "p2", "p2", "p2", "p1", "p1", "p1", "p2", "p2"}));
  LlscUniversal<CounterSpec> u(2, CounterSpec{}, "counter");
  spawn_clients(k, u, {{pid(1), {"inc"}}, {pid(2), {"inc"}}});
  k.run();
  auto r = results(k, "counter");
  EXPECT_EQ(r[pid(2)], "1");
  EXPECT_EQ(r[pid(1)], "2");
  std::vector<std::string> p1_scs;
  for (const auto& e : k.log()) {
    if (e.pid == pid(1) && e.object == "STATE" && e.detail.rfind("sc", 0) == 0) p1_scs.push_back(e.detail.substr(0, 8));
  }
  EXPECT_EQ(p1_scs, (std::vector<std::string>{"sc false", "sc true "}));
  // Worst-case path: exactly the bound (BOARD is read twice).
  EXPECT_EQ(accesses_per_op(k, "counter", pid(1)), (std::vector<std::uint64_t>{llsc_step_bound(2)}));
  EXPECT_EQ(u.exactly_once_violation(), std::nullopt);
}

TEST(LlscUniversal, HelpedAndSelfAppliedResultsMatch) {
  LlscUniversal<CounterSpec>::Cell helped_state, solo_state;
  std::map<ProcessId, std::string> helped, solo;
  {
    Kernel k(scripted(2, {"p1", "p1", "p1", "p2", "p2", "p2", "p2", "p2", "p2"}));
    LlscUniversal<CounterSpec> u(2, CounterSpec{}, "counter");
    spawn_clients(k, u, {{pid(1), {"inc"}}, {pid(2), {"inc"}}});
    k.run();
    helped = results(k, "counter");
    helped_state = u.state();
  }
  {
    Kernel k(scripted(2, {"p1", "p1", "p1", "p1", "p1", "p1", "p1"}));
    LlscUniversal<CounterSpec> u(2, CounterSpec{}, "counter");
    spawn_clients(k, u, {{pid(1), {"inc"}}, {pid(2), {"inc"}}});
    k.run();
    solo = results(k, "counter");
    solo_state = u.state();
  }
  EXPECT_EQ(helped, solo);
  EXPECT_EQ(helped_state, solo_state);
}

TEST(LlscUniversal, EntryTwoAheadIsSkipped) {
  // p2 LLs STATE with sn[1] = 0, then p1 completes op 1 and announces op 2
  // before p2 reads BOARD[1]: sn 2 is not sn[1] + 1, so p2 folds only itself.
  std::vector<std::string> script = {"p2", "p2", "p2"};
  for (int i = 0; i < 7; ++i) script.push_back("p1");  // start .. final LL of op 1
  script.push_back("p1");                              // next operation step
  script.push_back("p1");                              // BOARD[1] <- <inc, 2>
  for (int i = 0; i < 3; ++i) script.push_back("p2");  // read BOARD[1], BOARD[2], SC
  Kernel k(scripted(2, script));
  LlscUniversal<CounterSpec> u(2, CounterSpec{}, "counter");
  spawn_clients(k, u, {{pid(1), {"inc", "inc"}}, {pid(2), {"inc"}}});
  k.run();
  bool seen = false;
  for (const auto& e : k.log()) {
    if (e.pid == pid(2) && e.object == "STATE" && e.detail.rfind("sc", 0) == 0) {
      EXPECT_EQ(e.detail, "sc false 1 sn=[0,1] res=[⊥,1]");
      seen = true;
      break;
    }
  }
  EXPECT_TRUE(seen);
  EXPECT_EQ(u.state().value, 3);
  EXPECT_EQ(u.exactly_once_violation(), std::nullopt);
}

TEST(LlscUniversal, SecondOutstandingInvocationRejected) {
  // Two client threads of p1; the second starts while the first is parked
  // before its BOARD write.
  Kernel k(random_config(1, 0));
  LlscUniversal<CounterSpec> u(1, CounterSpec{}, "counter");
  auto body = [&](Process self) -> Task<void> { (void)co_await u.invoke(self, objects::parse_op("inc")); };
  k.spawn(pid(1), "a", body(k.process(pid(1))));
  k.spawn(pid(1), "b", body(k.process(pid(1))));
  EXPECT_THROW(k.run(), OutstandingInvocation);
}

TEST(LlscUniversal, PublishedRecoveryCanLoseAnOperation) {
  // Seed 0 of the sweep below: p1's self-only recovery SC loses to p2's
  // self-only recovery SC, p1 returns a stale res[1], and its push is never
  // applied. sn gating then skips its later announcement too.
  auto run = [](Recovery r) {
    Kernel k(random_config(4, 0));
    LlscUniversal<StackSpec> u(4, StackSpec{}, "stack", r);
    spawn_clients(k, u, stack_workload(4, 0, 3));
    k.run();
    auto v = lincheck::check(lincheck::extract_history(k.log(), "stack"), StackSpec{});
    return std::pair{v.outcome, u.exactly_once_violation()};
  };
  auto [published, lost] = run(Recovery::as_published);
  EXPECT_EQ(published, lincheck::Outcome::rejected);
  ASSERT_TRUE(lost);
  EXPECT_EQ(*lost, "p1 returned from operation 3 but STATE.sn[1] = 1");
  auto [reread, none] = run(Recovery::reread);
  EXPECT_EQ(reread, lincheck::Outcome::accepted);
  EXPECT_EQ(none, std::nullopt);
}

TEST(LlscUniversal, SweepLinearizableExactlyOnceBounded) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto c = random_config(4, seed);
    std::mt19937_64 rng(seed);
    int crashes = static_cast<int>(seed % 4);
    for (int j = 0; j < crashes; ++j) c.crash_plan[pid(1 + static_cast<int>(rng() % 4))] = rng() % 80;
    Kernel k(c);
    LlscUniversal<StackSpec> u(4, StackSpec{}, "stack");
    spawn_clients(k, u, stack_workload(4, seed, 3));
    auto out = k.run();
    ASSERT_EQ(out.status, RunStatus::quiescent);
    ASSERT_EQ(out.blocked_threads, 0u);
    auto v = lincheck::check(lincheck::extract_history(k.log(), "stack"), StackSpec{});
    ASSERT_EQ(v.outcome, lincheck::Outcome::accepted) << "seed " << seed << ": " << v.reason;
    ASSERT_EQ(u.exactly_once_violation(), std::nullopt) << seed;
    for (int p = 1; p <= 4; ++p) {
      for (auto a : accesses_per_op(k, "stack", pid(p))) ASSERT_LE(a, llsc_step_bound(4)) << seed;
    }
  }
}

TEST(LlscUniversal, SurvivorCompletesWhenOthersCrash) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto c = random_config(4, seed);
    std::mt19937_64 rng(seed);
    auto survivor = pid(1 + static_cast<int>(seed % 4));
    for (int p = 1; p <= 4; ++p) {
      if (pid(p) != survivor) c.crash_plan[pid(p)] = rng() % 40;
    }
    Kernel k(c);
    LlscUniversal<StackSpec> u(4, StackSpec{}, "stack");
    spawn_clients(k, u, stack_workload(4, seed, 3));
    ASSERT_EQ(k.run().status, RunStatus::quiescent);
    auto own = accesses_per_op(k, "stack", survivor);
    ASSERT_EQ(own.size(), 3u) << seed;
    for (auto a : own) ASSERT_LE(a, llsc_step_bound(4));
  }
}

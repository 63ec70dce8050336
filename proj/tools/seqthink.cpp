// seqthink: run scenarios, sweeps, demos and history checks.
//
// Exit status: 0 every check passed, 1 a property was violated, 2 undecided
// or step budget exhausted, 3 usage error.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <thread>

#include "demos.hpp"
#include "seqthink/lincheck/check.hpp"
#include "seqthink/objects/ledger.hpp"
#include "seqthink/objects/specs.hpp"
#include "seqthink/mutex.hpp"
#include "seqthink/runner.hpp"

namespace fs = std::filesystem;
using namespace seqthink;

namespace {

constexpr int kUsage = 3;

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& text) {
  auto dots = text.find("..");
  if (dots == std::string::npos) throw Usage("--sweep expects A..B, got '" + text + "'");
  try {
    std::size_t used = 0;
    auto a = std::stoull(text.substr(0, dots), &used);
    if (used != dots) throw Usage("");
    auto rest = text.substr(dots + 2);
    auto b = std::stoull(rest, &used);
    if (used != rest.size() || b < a) throw Usage("");
    return {a, b};
  } catch (const std::exception&) {
    throw Usage("--sweep expects A..B with A <= B, got '" + text + "'");
  }
}

void write_log(const sim::EventLog& log, const std::string& path, const std::string& format) {
  std::ofstream out(path);
  if (!out) throw Usage("cannot write " + path);
  if (format == "records") {
    log.write_records(out);
  } else {
    out << log.to_text();
  }
}

void print_report(const runner::RunReport& r) {
  for (const auto& line : runner::summary(r)) std::cout << line << '\n';
  std::cout << "steps: " << r.outcome.steps << " (" << sim::to_string(r.outcome.status) << ")\n";
  std::cout << "seed: " << r.scenario.seed << '\n';
  std::cout << "digest: " << r.digest << '\n';
}

struct LogOptions {
  std::string out;
  std::string format = "text";
};

int run_one(const sim::Scenario& s, const LogOptions& lo) {
  auto r = runner::run_scenario(s);
  if (!lo.out.empty()) write_log(r.log, lo.out, lo.format);
  print_report(r);
  if (!lo.out.empty()) std::cout << "log: " << lo.out << '\n';
  return r.exit_code();
}

int run_sweep(const sim::Scenario& base, std::uint64_t from, std::uint64_t to, const LogOptions& lo, unsigned jobs) {
  std::size_t count = static_cast<std::size_t>(to - from + 1);
  std::vector<runner::RunReport> reports(count);
  std::vector<std::string> errors(count);
  auto work = [&](unsigned worker) {
    for (std::size_t i = worker; i < count; i += jobs) {
      auto s = base;
      s.seed = from + i;
      try {
        reports[i] = runner::run_scenario(s);
        reports[i].log = {};  // keep memory flat over long sweeps
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(work, w);
  for (auto& t : pool) t.join();

  std::size_t pass = 0, violation = 0, undecided = 0, budget = 0;
  std::map<std::string, std::size_t> failures;
  std::vector<std::string> check_order;
  for (std::size_t i = 0; i < count; ++i) {
    if (!errors[i].empty()) throw Usage("seed " + std::to_string(from + i) + ": " + errors[i]);
    const auto& r = reports[i];
    for (const auto& c : r.checks) {
      if (!failures.count(c.name)) check_order.push_back(c.name);
      failures[c.name] += c.status == runner::Status::violation;
    }
    bool exhausted = r.outcome.status == sim::RunStatus::budget_exhausted;
    budget += exhausted;
    switch (r.status()) {
      case runner::Status::pass: ++pass; break;
      case runner::Status::violation: ++violation; break;
      case runner::Status::undecided: undecided += !exhausted; break;
    }
    if (r.status() != runner::Status::pass) {
      std::cout << "seed " << r.scenario.seed << ": " << runner::to_string(r.status());
      for (const auto& c : r.checks) {
        if (c.status != runner::Status::pass) std::cout << " [" << c.name << (c.detail.empty() ? "" : ": " + c.detail) << "]";
      }
      std::cout << " digest " << r.digest << '\n';
      if (!lo.out.empty()) {
        auto s = base;
        s.seed = r.scenario.seed;
        auto path = lo.out + "-seed" + std::to_string(s.seed) + (lo.format == "records" ? ".jsonl" : ".log");
        write_log(runner::run_scenario(s).log, path, lo.format);
      }
    }
  }
  for (const auto& name : check_order) {
    std::cout << name << " violations: " << failures[name] << "/" << count << '\n';
  }
  std::cout << "runs: " << count << "  accepted: " << pass << "  rejected: " << violation << "  undecided: " << undecided
            << "  budget-exhausted: " << budget << '\n';
  if (violation) return 1;
  if (undecided || budget) return 2;
  return 0;
}

int cmd_check(const std::string& path, std::string object, std::string spec_name) {
  std::ifstream in(path);
  if (!in) throw Usage("cannot open " + path);
  auto log = sim::EventLog::from_records(in);
  if (object.empty()) {
    auto objs = lincheck::objects_in(log);
    if (objs.size() != 1) {
      std::string list;
      for (const auto& o : objs) list += " " + o;
      throw Usage("the log has " + std::to_string(objs.size()) + " objects; pick one with --object:" + list);
    }
    object = objs.front();
  }
  if (spec_name.empty()) spec_name = object == "REG" ? "register" : object;
  static const std::set<std::string> known = {"register", "counter", "stack", "ledger", "consensus"};
  if (!known.count(spec_name)) {
    throw Usage("no spec for '" + spec_name + "'; pass --spec register, counter, stack, ledger or consensus");
  }
  auto history = lincheck::extract_history(log, object);
  std::cout << "object: " << object << " (" << history.size() << " operations, spec " << spec_name << ")\n";
  auto report = [&](const auto& spec) {
    auto v = lincheck::check(history, spec);
    switch (v.outcome) {
      case lincheck::Outcome::accepted:
        std::cout << "linearizable: yes\nwitness:\n";
        for (auto id : v.witness) std::cout << "  " << lincheck::describe(history.operations().at(id)) << '\n';
        return 0;
      case lincheck::Outcome::rejected:
        std::cout << "linearizable: NO (" << v.reason << ")\nviolation core:\n";
        for (auto id : v.violation_core) std::cout << "  " << lincheck::describe(history.operations().at(id)) << '\n';
        return 1;
      case lincheck::Outcome::undecided:
        std::cout << "linearizable: undecided (" << v.reason << ")\n";
        return 2;
    }
    return 2;
  };
  if (spec_name == "register") return report(objects::RegisterSpec{});
  if (spec_name == "counter") return report(objects::CounterSpec{});
  if (spec_name == "stack") return report(objects::StackSpec{});
  if (spec_name == "ledger") return report(objects::LedgerSpec{});
  return report(objects::ConsensusSpec{});
}

int cmd_mutex(const sim::Scenario& s) {
  auto r = runner::run_scenario(s);
  std::map<sim::ProcessId, std::string> rows;
  for (const auto& iv : mutex::cs_intervals(r.log)) {
    rows[iv.pid] += " [" + std::to_string(iv.enter) + ", " + (iv.exit ? std::to_string(*iv.exit) : "open") + "]";
  }
  std::cout << "critical sections (log seq of entry, exit):\n";
  for (int p = 1; p <= s.n; ++p) std::cout << "  p" << p << ":" << rows[sim::pid(p)] << '\n';
  auto prog = mutex::progress(r.log);
  std::cout << "acquires: " << prog.acquires << "  entries: " << prog.entries << "  max bypass: " << prog.max_bypass
            << "  max node bypass: " << prog.max_node_bypass << '\n';
  print_report(r);
  return r.exit_code();
}

int cmd_universal(const sim::Scenario& s, const LogOptions& lo) {
  auto r = runner::run_scenario(s);
  if (!lo.out.empty()) write_log(r.log, lo.out, lo.format);
  std::cout << "history:\n" << r.history->to_text();
  print_report(r);
  return r.exit_code();
}

fs::path demo_dir() {
  if (const char* env = std::getenv("SEQTHINK_DEMO_DIR")) return env;
  return SEQTHINK_SCENARIO_DIR;
}

void parse_crashes(const std::vector<std::string>& items, sim::Scenario& s) {
  for (const auto& item : items) {
    auto at = item.find('@');
    if (at == std::string::npos) throw Usage("--crash expects P@STEP, got '" + item + "'");
    try {
      s.crash_plan[sim::pid(std::stoi(item.substr(0, at)))] = std::stoull(item.substr(at + 1));
    } catch (const std::invalid_argument&) {
      throw Usage("--crash expects P@STEP, got '" + item + "'");
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic simulation and checking of concurrent objects"};
  app.require_subcommand(1);

  LogOptions lo;
  auto add_log_flags = [&](CLI::App* cmd) {
    cmd->add_option("--out", lo.out, "Write the event log to this file");
    cmd->add_option("--format", lo.format, "Log format")->check(CLI::IsMember({"text", "records"}));
  };

  std::string scenario_path, sweep;
  std::optional<std::uint64_t> seed, budget;
  unsigned jobs = 1;
  auto* run = app.add_subcommand("run", "Run a scenario file once or over a seed range");
  run->add_option("scenario", scenario_path, "Scenario file")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--sweep", sweep, "Run every seed in A..B");
  run->add_option("--budget", budget, "Override the step budget");
  run->add_option("--jobs", jobs, "Worker threads for sweeps")->check(CLI::Range(1u, 256u));
  add_log_flags(run);

  std::string demo_name;
  auto* demo = app.add_subcommand("demo", "Run a canned scenario and narrate it");
  demo->add_option("name", demo_name, "abd-inversion, ledger-tamper, llsc-help or to-prefix")->required();

  std::string history_path, object, spec;
  auto* check = app.add_subcommand("check", "Check a logged history for linearizability");
  check->add_option("log", history_path, "Event log in records format")->required();
  check->add_option("--object", object, "Object id in the log (default: the only one)");
  check->add_option("--spec", spec, "register, counter, stack, ledger or consensus (default: from object)");

  sim::Scenario ms;
  ms.protocol = "peterson";
  std::string fairness = "fair";
  auto* mutex_cmd = app.add_subcommand("mutex", "Run a lock and print critical-section intervals");
  mutex_cmd->add_option("--protocol", ms.protocol)->check(CLI::IsMember({"peterson", "tournament"}));
  mutex_cmd->add_option("-n", ms.n, "Processes");
  mutex_cmd->add_option("--seed", ms.seed);
  mutex_cmd->add_option("--rounds", ms.rounds);
  mutex_cmd->add_option("--cs-steps", ms.cs_steps);
  mutex_cmd->add_option("--budget", ms.step_budget);
  mutex_cmd->add_option("--fairness", fairness)->check(CLI::IsMember({"fair", "unfair"}));

  sim::Scenario us;
  us.n = 4;
  us.object = "stack";
  std::string alg = "llsc";
  std::vector<std::string> crashes;
  auto* uni = app.add_subcommand("universal", "Run a universal construction and check its history");
  uni->add_option("--alg", alg)->check(CLI::IsMember({"to", "llsc"}));
  uni->add_option("--object", us.object)->check(CLI::IsMember({"stack", "counter", "register", "ledger", "consensus"}));
  uni->add_option("-n", us.n, "Processes");
  uni->add_option("--seed", us.seed);
  uni->add_option("--ops", us.ops, "Operations per process");
  uni->add_option("--budget", us.step_budget);
  uni->add_option("--crash", crashes, "Crash P after kernel step S, as P@S");
  add_log_flags(uni);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*run) {
      auto s = sim::load_scenario(scenario_path);
      if (seed) s.seed = *seed;
      if (budget) s.step_budget = *budget;
      if (!sweep.empty()) {
        auto [a, b] = parse_range(sweep);
        runner::validate(s);
        return run_sweep(s, a, b, lo, jobs);
      }
      return run_one(s, lo);
    }
    if (*demo) return demos::run(demo_name, demo_dir(), std::cout);
    if (*check) return cmd_check(history_path, object, spec);
    if (*mutex_cmd) {
      ms.fairness = fairness == "fair" ? sim::Fairness::fair : sim::Fairness::unfair;
      return cmd_mutex(ms);
    }
    if (*uni) {
      us.protocol = alg == "to" ? "universal-to" : "universal-llsc";
      parse_crashes(crashes, us);
      return cmd_universal(us, lo);
    }
  } catch (const sim::ScenarioError& e) {
    std::cerr << "invalid scenario: " << e.what() << '\n';
    return kUsage;
  } catch (const Usage& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const demos::UnknownDemo& e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

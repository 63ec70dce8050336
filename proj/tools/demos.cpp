#include "demos.hpp"

#include <map>

#include "seqthink/lincheck/history.hpp"
#include "seqthink/objects/ledger.hpp"
#include "seqthink/runner.hpp"

namespace seqthink::demos {

namespace {

runner::RunReport run_file(const std::filesystem::path& dir, const std::string& file, bool phase2 = true) {
  auto s = sim::load_scenario(dir / file);
  if (!phase2) s.skip_read_phase2 = true;
  else s.skip_read_phase2 = false;
  return runner::run_scenario(s);
}

void print_verdict(const runner::RunReport& r, std::ostream& out) {
  for (const auto& line : runner::summary(r)) out << "  " << line << '\n';
}

int abd_inversion(const std::filesystem::path& dir, std::ostream& out) {
  out << "New/old inversion on an ABD register, n = 3.\n"
      << "p3 writes 1 but only p3 stores it; read1 (p1) asks {p1, p3}; read2 (p2) starts after read1 returns and asks "
         "{p2, p1}.\n\n";
  auto without = run_file(dir, "abd-inversion.scn", false);
  auto with = run_file(dir, "abd-inversion.scn", true);
  out << "read phase 2 disabled:\n" << without.history->to_text();
  print_verdict(without, out);
  out << "\nread phase 2 enabled (same schedule):\n" << with.history->to_text();
  print_verdict(with, out);
  bool shown = without.verdict->rejected() && with.verdict->accepted();
  out << "\n" << (shown ? "The write-back makes p1 store 1 before read1 returns, so read2's quorum sees it."
                        : "unexpected verdicts")
      << '\n';
  return shown ? 0 : 1;
}

int ledger_tamper(std::ostream& out) {
  objects::LedgerState ledger;
  for (int i = 1; i <= 5; ++i) ledger.append("tx" + std::to_string(i), sim::pid(1 + i % 3));
  out << objects::to_text(ledger);
  out << "verify_chain: " << (objects::verify_chain(ledger) ? "violation" : "ok") << "\n\n";

  auto bytes = objects::serialize(ledger);
  auto payload_offset = [&](std::size_t block) {
    std::size_t off = 4;
    for (std::size_t j = 0; j < block; ++j) off += 8 + ledger.blocks[j].payload.size() + 32;
    return off + 8;
  };
  int failures = 0;
  for (std::size_t block : {std::size_t{2}, ledger.size() - 1}) {
    auto tampered = bytes;
    auto off = payload_offset(block);
    tampered[off] = static_cast<char>(tampered[off] ^ 0x01);
    auto copy = objects::deserialize(tampered);
    auto at = objects::verify_chain(copy);
    out << "flip bit 0 of block " << block << " payload ('" << ledger.blocks[block].payload << "' -> '"
        << copy.blocks[block].payload << "'): ";
    if (!at) {
      out << "NOT detected\n";
      ++failures;
      continue;
    }
    out << "detected at index " << *at;
    out << (*at == copy.size() ? " (head digest no longer matches)" : " (its prev_hash no longer matches)") << '\n';
    failures += *at < block;
  }
  return failures ? 1 : 0;
}

int llsc_help(const std::filesystem::path& dir, std::ostream& out) {
  auto r = run_file(dir, "llsc-help.scn");
  out << "Two increments on the LL/SC universal construction, n = 2.\n\n";
  std::string helper_sc;
  std::map<sim::ProcessId, std::string> result;
  bool p1_failed = false;
  for (const auto& e : r.log) {
    if (e.object != "STATE" && e.object.rfind("BOARD", 0) != 0 && e.object != "counter") continue;
    out << "  step " << e.step << "  " << sim::to_string(e.pid) << "  " << e.object << "  " << e.detail;
    if (e.object == "STATE" && e.detail.rfind("sc true", 0) == 0 && e.pid == sim::pid(2)) {
      out << "   <- p2 folds both announcements";
      helper_sc = e.detail;
    }
    if (e.object == "STATE" && e.detail.rfind("sc false", 0) == 0 && e.pid == sim::pid(1)) {
      out << "   <- p1 loses; its re-LL shows sn[1] already 1";
      p1_failed = true;
    }
    if (e.kind == sim::EventKind::respond) result[e.pid] = e.detail;
    out << '\n';
  }
  out << "\np1 returned " << result[sim::pid(1)] << ", the result p2 computed for it; p2 returned "
      << result[sim::pid(2)] << ".\n";
  print_verdict(r, out);
  return p1_failed && !helper_sc.empty() && r.exit_code() == 0 ? 0 : 1;
}

int to_prefix(const std::filesystem::path& dir, std::ostream& out) {
  auto r = run_file(dir, "to-prefix.scn");
  auto n = r.scenario.n;
  std::vector<std::vector<std::string>> seqs(static_cast<std::size_t>(n));
  bool ok = true;
  auto prefix = [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
  };
  std::size_t checked = 0;
  for (const auto& e : r.log) {
    if (e.object != "to" || e.detail.rfind("deliver ", 0) != 0) continue;
    seqs[e.pid.index()].push_back(e.detail.substr(8));
    for (const auto& a : seqs) {
      for (const auto& b : seqs) ok = ok && (prefix(a, b) || prefix(b, a));
    }
    ++checked;
  }
  out << "TO-broadcast, n = " << n << ", crash plan:";
  for (const auto& [p, at] : r.scenario.crash_plan) out << " " << sim::to_string(p) << "@" << at;
  out << "\n\ndelivery sequences at the end of the run:\n";
  for (int p = 1; p <= n; ++p) {
    out << "  p" << p << (r.scenario.crash_plan.count(sim::pid(p)) ? " (crashed)" : "") << ":";
    for (const auto& id : seqs[static_cast<std::size_t>(p - 1)]) out << " " << id;
    out << '\n';
  }
  out << "\n";
  for (int p = 1; p <= n; ++p) {
    for (int q = 1; q <= n; ++q) {
      const auto& a = seqs[static_cast<std::size_t>(p - 1)];
      const auto& b = seqs[static_cast<std::size_t>(q - 1)];
      if (p != q && a.size() < b.size() && prefix(a, b)) out << "  p" << p << " is a prefix of p" << q << '\n';
    }
  }
  out << "\nprefix-related after each of the " << checked << " deliveries: " << (ok ? "yes" : "NO") << '\n';
  print_verdict(r, out);
  return ok && r.exit_code() == 0 ? 0 : 1;
}

}  // namespace

int run(const std::string& name, const std::filesystem::path& dir, std::ostream& out) {
  if (name == "abd-inversion") return abd_inversion(dir, out);
  if (name == "ledger-tamper") return ledger_tamper(out);
  if (name == "llsc-help") return llsc_help(dir, out);
  if (name == "to-prefix") return to_prefix(dir, out);
  throw UnknownDemo("unknown demo '" + name + "'; available: abd-inversion, ledger-tamper, llsc-help, to-prefix");
}

}  // namespace seqthink::demos

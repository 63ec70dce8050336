#include "seqthink/sim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace seqthink::sim {

namespace {

std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    auto piece = trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (!piece.empty()) out.push_back(piece);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class Int>
std::optional<Int> parse_int(std::string_view s) {
  Int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<ProcessId> parse_pid(std::string_view s) {
  if (!s.empty() && (s.front() == 'p' || s.front() == 'P')) s.remove_prefix(1);
  auto v = parse_int<int>(s);
  if (!v) return std::nullopt;
  return ProcessId{*v};
}

bool parse_bool(const std::string& field, std::string_view v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ScenarioError(field, "expected true or false, got '" + std::string(v) + "'");
}

template <class Int>
Int require_int(const std::string& field, std::string_view v) {
  auto parsed = parse_int<Int>(v);
  if (!parsed) throw ScenarioError(field, "expected an integer, got '" + std::string(v) + "'");
  return *parsed;
}

}  // namespace

std::string_view to_string(Fairness f) noexcept { return f == Fairness::fair ? "fair" : "unfair"; }

std::string_view to_string(AdversaryKind k) noexcept {
  switch (k) {
    case AdversaryKind::round_robin: return "round-robin";
    case AdversaryKind::seeded_random: return "seeded-random";
    case AdversaryKind::scripted: return "scripted";
  }
  return "?";
}

std::string to_string(const ScriptEntry& entry) {
  std::string out = to_string(entry.pid);
  switch (entry.target) {
    case ScriptEntry::Target::any: break;
    case ScriptEntry::Target::local: out += ":local"; break;
    case ScriptEntry::Target::deliver:
      out += "<";
      out += entry.from ? to_string(*entry.from) : std::string("*");
      if (!entry.message_kind.empty()) out += ":" + entry.message_kind;
      break;
  }
  return out;
}

ScriptEntry parse_script_entry(std::string_view text) {
  text = trim(text);
  ScriptEntry entry;
  auto bad = [&] { return std::invalid_argument("bad script entry '" + std::string(text) + "'"); };
  if (auto lt = text.find('<'); lt != std::string_view::npos) {
    auto who = parse_pid(text.substr(0, lt));
    if (!who) throw bad();
    entry.pid = *who;
    entry.target = ScriptEntry::Target::deliver;
    auto rest = text.substr(lt + 1);
    auto colon = rest.find(':');
    auto from_text = rest.substr(0, colon);
    if (from_text != "*") {
      auto from = parse_pid(from_text);
      if (!from) throw bad();
      entry.from = *from;
    }
    if (colon != std::string_view::npos) {
      entry.message_kind = std::string(rest.substr(colon + 1));
      if (entry.message_kind.empty()) throw bad();
    }
    return entry;
  }
  auto colon = text.find(':');
  auto who = parse_pid(text.substr(0, colon));
  if (!who) throw bad();
  entry.pid = *who;
  if (colon != std::string_view::npos) {
    if (text.substr(colon + 1) != "local") throw bad();
    entry.target = ScriptEntry::Target::local;
  }
  return entry;
}

Scenario parse_scenario(std::istream& in) {
  Scenario s;
  std::set<std::string> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ScenarioError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    if (key != "script" && !seen.insert(key).second) throw ScenarioError(key, "given twice");

    if (key == "n") {
      s.n = require_int<int>(key, value);
    } else if (key == "protocol") {
      if (value.empty()) throw ScenarioError(key, "must not be empty");
      s.protocol = std::string(value);
    } else if (key == "crash") {
      std::set<ProcessId> crashed;
      for (auto item : split(value, ',')) {
        auto at = item.find('@');
        auto who = parse_pid(trim(item.substr(0, at)));
        if (at == std::string_view::npos || !who) {
          throw ScenarioError(key, "expected entries like 3@5 or 3@never, got '" +
                                       std::string(item) + "'");
        }
        if (!crashed.insert(*who).second) {
          throw ScenarioError(key, "process " + to_string(*who) + " is crashed twice");
        }
        auto when = trim(item.substr(at + 1));
        if (when == "never") continue;
        s.crash_plan[*who] = require_int<std::uint64_t>(key, when);
      }
    } else if (key == "fairness") {
      if (value == "fair") s.fairness = Fairness::fair;
      else if (value == "unfair") s.fairness = Fairness::unfair;
      else throw ScenarioError(key, "expected fair or unfair");
    } else if (key == "adversary") {
      if (value == "round-robin") s.adversary = AdversaryKind::round_robin;
      else if (value == "seeded-random") s.adversary = AdversaryKind::seeded_random;
      else if (value == "scripted") s.adversary = AdversaryKind::scripted;
      else throw ScenarioError(key, "expected round-robin, seeded-random or scripted");
    } else if (key == "seed") {
      s.seed = require_int<std::uint64_t>(key, value);
    } else if (key == "step_budget") {
      s.step_budget = require_int<std::uint64_t>(key, value);
    } else if (key == "script") {
      for (auto item : split(value, ',')) {
        try {
          s.script.push_back(parse_script_entry(item));
        } catch (const std::invalid_argument& err) {
          throw ScenarioError(key, err.what());
        }
      }
    } else if (key == "violating") {
      s.violating = parse_bool(key, value);
    } else if (key == "demo") {
      s.demo = parse_bool(key, value);
    } else if (key == "object") {
      s.object = std::string(value);
    } else if (key == "ops") {
      s.ops = require_int<int>(key, value);
    } else if (key == "rounds") {
      s.rounds = require_int<int>(key, value);
    } else if (key == "cs_steps") {
      s.cs_steps = require_int<int>(key, value);
    } else if (key == "skip_read_phase2") {
      s.skip_read_phase2 = parse_bool(key, value);
    } else if (key.rfind("ops.", 0) == 0) {
      auto who = parse_pid(std::string_view(key).substr(4));
      if (!who) throw ScenarioError(key, "expected ops.<process id>");
      auto& list = s.workload[*who];
      for (auto op : split(value, ';')) list.emplace_back(op);
    } else {
      throw ScenarioError(key, "unknown field");
    }
  }
  validate_basic(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("file", "cannot open " + path.string());
  return parse_scenario(in);
}

std::string to_text(const Scenario& s) {
  std::ostringstream out;
  out << "n = " << s.n << '\n';
  out << "protocol = " << s.protocol << '\n';
  if (!s.crash_plan.empty()) {
    out << "crash = ";
    bool first = true;
    for (const auto& [who, at] : s.crash_plan) {
      out << (first ? "" : ", ") << who.value << '@' << at;
      first = false;
    }
    out << '\n';
  }
  out << "fairness = " << to_string(s.fairness) << '\n';
  out << "adversary = " << to_string(s.adversary) << '\n';
  out << "seed = " << s.seed << '\n';
  out << "step_budget = " << s.step_budget << '\n';
  if (!s.script.empty()) {
    out << "script = ";
    for (std::size_t i = 0; i < s.script.size(); ++i) {
      out << (i ? ", " : "") << to_string(s.script[i]);
    }
    out << '\n';
  }
  out << "violating = " << (s.violating ? "true" : "false") << '\n';
  out << "demo = " << (s.demo ? "true" : "false") << '\n';
  out << "object = " << s.object << '\n';
  out << "ops = " << s.ops << '\n';
  out << "rounds = " << s.rounds << '\n';
  out << "cs_steps = " << s.cs_steps << '\n';
  for (const auto& [who, list] : s.workload) {
    out << "ops." << who.value << " = ";
    for (std::size_t i = 0; i < list.size(); ++i) out << (i ? "; " : "") << list[i];
    out << '\n';
  }
  out << "skip_read_phase2 = " << (s.skip_read_phase2 ? "true" : "false") << '\n';
  return out.str();
}

void validate_basic(const Scenario& s) {
  if (s.n < 1) throw ScenarioError("n", "must be at least 1");
  if (s.step_budget == 0) throw ScenarioError("step_budget", "must be positive");
  auto in_range = [&](ProcessId p) { return p.value >= 1 && p.value <= s.n; };
  for (const auto& [who, at] : s.crash_plan) {
    if (!in_range(who)) throw ScenarioError("crash", to_string(who) + " is not in [1, n]");
  }
  for (const auto& entry : s.script) {
    if (!in_range(entry.pid) || (entry.from && !in_range(*entry.from))) {
      throw ScenarioError("script", to_string(entry) + " names a process outside [1, n]");
    }
  }
  for (const auto& [who, list] : s.workload) {
    if (!in_range(who)) throw ScenarioError("ops." + std::to_string(who.value), "not in [1, n]");
  }
  if (s.ops < 0) throw ScenarioError("ops", "must not be negative");
  if (s.rounds < 0) throw ScenarioError("rounds", "must not be negative");
  if (s.cs_steps < 0) throw ScenarioError("cs_steps", "must not be negative");
  if (s.adversary == AdversaryKind::scripted && s.script.empty()) {
    throw ScenarioError("script", "scripted adversary needs a script");
  }
}

}  // namespace seqthink::sim

#include "seqthink/objects/specs.hpp"

#include <charconv>

namespace seqthink::objects {

std::string to_string(const Op& op) { return op.arg.empty() ? op.name : op.name + " " + op.arg; }

Op parse_op(std::string_view text, sim::ProcessId caller) {
  auto b = text.find_first_not_of(' ');
  if (b == std::string_view::npos) throw UnknownOp("empty operation");
  text.remove_prefix(b);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  auto space = text.find(' ');
  Op op;
  op.caller = caller;
  op.name = std::string(text.substr(0, space));
  if (space != std::string_view::npos) {
    auto rest = text.substr(space + 1);
    auto a = rest.find_first_not_of(' ');
    if (a != std::string_view::npos) op.arg = std::string(rest.substr(a));
  }
  return op;
}

std::int64_t int_arg(const Op& op) {
  std::int64_t v = 0;
  const auto* first = op.arg.data();
  const auto* last = first + op.arg.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (op.arg.empty() || ec != std::errc{} || ptr != last) {
    throw UnknownOp(op.name + " needs an integer argument, got '" + op.arg + "'");
  }
  return v;
}

namespace {
[[noreturn]] void unknown(std::string_view spec, const Op& op) {
  throw UnknownOp(std::string(spec) + " has no operation '" + to_string(op) + "'");
}

void expect_no_arg(std::string_view spec, const Op& op) {
  if (!op.arg.empty()) unknown(spec, op);
}
}  // namespace

Transition<RegisterSpec::State> RegisterSpec::apply(const State& state, const Op& op) const {
  if (op.name == "write") return {int_arg(op), "ok"};
  if (op.name == "read") {
    expect_no_arg(name(), op);
    return {state, std::to_string(state)};
  }
  unknown(name(), op);
}

Transition<CounterSpec::State> CounterSpec::apply(const State& state, const Op& op) const {
  expect_no_arg(name(), op);
  if (op.name == "inc") return {state + 1, std::to_string(state + 1)};
  if (op.name == "read") return {state, std::to_string(state)};
  unknown(name(), op);
}

StackSpec::StackSpec(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("stack capacity must be positive");
}

Transition<StackSpec::State> StackSpec::apply(const State& state, const Op& op) const {
  if (op.name == "push") {
    auto v = int_arg(op);
    if (state.size() >= capacity_) return {state, "full"};
    auto next = state;
    next.push_back(v);
    return {std::move(next), "ok"};
  }
  if (op.name == "pop") {
    expect_no_arg(name(), op);
    if (state.empty()) return {state, "empty"};
    auto next = state;
    auto top = next.back();
    next.pop_back();
    return {std::move(next), std::to_string(top)};
  }
  unknown(name(), op);
}

std::string StackSpec::describe(const State& state) const {
  std::string out = "[";
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(state[i]);
  }
  return out + "]";
}

Transition<ConsensusSpec::State> ConsensusSpec::apply(const State& state, const Op& op) const {
  if (op.name != "propose") unknown(name(), op);
  auto v = int_arg(op);
  State decided = state ? state : State{v};
  return {decided, std::to_string(*decided)};
}

std::string ConsensusSpec::describe(const State& state) const {
  return state ? std::to_string(*state) : std::string("⊥");
}

}  // namespace seqthink::objects

#include "seqthink/sim/adversary.hpp"

#include <stdexcept>

#include "seqthink/sim/kernel.hpp"

namespace seqthink::sim {

Adversary::Adversary(AdversaryKind kind, Fairness fairness, std::uint64_t seed, int n,
                     std::vector<ScriptEntry> script)
    : kind_(kind),
      fairness_(fairness),
      n_(n),
      window_(fairness_window(n)),
      rng_(seed),
      script_(std::move(script)) {}

Adversary Adversary::explorer(int n, std::vector<std::size_t> prefix) {
  Adversary a(AdversaryKind::round_robin, Fairness::unfair, 0, n);
  a.exploring_ = true;
  a.prefix_ = std::move(prefix);
  return a;
}

std::size_t Adversary::choose(std::span<const ProcessStep> enabled, std::uint64_t now) {
  if (enabled.empty()) throw std::logic_error("adversary asked to choose from nothing");

  if (exploring_) {
    std::size_t d = choices_.size();
    std::size_t pick = d < prefix_.size() ? prefix_[d] : 0;
    if (pick >= enabled.size()) throw std::logic_error("exploration prefix out of range");
    choices_.push_back(pick);
    branching_.push_back(enabled.size());
    return pick;
  }

  switch (kind_) {
    case AdversaryKind::round_robin:
      return round_robin(enabled);
    case AdversaryKind::scripted:
      if (auto pick = scripted(enabled)) return *pick;
      return round_robin(enabled);
    case AdversaryKind::seeded_random: {
      if (fairness_ == Fairness::fair) {
        std::size_t oldest = 0;
        for (std::size_t i = 1; i < enabled.size(); ++i) {
          if (enabled[i].enabled_since < enabled[oldest].enabled_since) oldest = i;
        }
        // Force before the wait reaches the window: the chosen step runs at now + 1.
        if (now + 1 - enabled[oldest].enabled_since >= window_) {
          last_pid_ = enabled[oldest].pid.value;
          return oldest;
        }
      }
      auto pick = static_cast<std::size_t>(rng_() % enabled.size());
      last_pid_ = enabled[pick].pid.value;
      return pick;
    }
  }
  return 0;
}

std::size_t Adversary::round_robin(std::span<const ProcessStep> enabled) {
  // Next process after the last one served, cyclically, that has a step.
  int best_pid = 0;
  int best_distance = n_ + 1;
  for (const auto& s : enabled) {
    int distance = ((s.pid.value - last_pid_ - 1) % n_ + n_) % n_;
    if (distance < best_distance) {
      best_distance = distance;
      best_pid = s.pid.value;
    }
  }
  std::size_t pick = enabled.size();
  for (std::size_t i = 0; i < enabled.size(); ++i) {
    if (enabled[i].pid.value != best_pid) continue;
    if (pick == enabled.size() || enabled[i].enabled_since < enabled[pick].enabled_since) pick = i;
  }
  last_pid_ = best_pid;
  return pick;
}

namespace {

std::string_view first_token(std::string_view payload) {
  auto end = payload.find(' ');
  return payload.substr(0, end);
}

bool matches(const ScriptEntry& entry, const ProcessStep& step) {
  if (step.pid != entry.pid) return false;
  switch (entry.target) {
    case ScriptEntry::Target::any:
      return true;
    case ScriptEntry::Target::local:
      return step.kind == StepKind::local;
    case ScriptEntry::Target::deliver:
      if (step.kind != StepKind::deliver || step.message == nullptr) return false;
      if (entry.from && step.message->from != *entry.from) return false;
      if (!entry.message_kind.empty() && first_token(step.message->payload) != entry.message_kind) {
        return false;
      }
      return true;
  }
  return false;
}

}  // namespace

std::optional<std::size_t> Adversary::scripted(std::span<const ProcessStep> enabled) {
  while (cursor_ < script_.size()) {
    const auto& entry = script_[cursor_++];
    std::optional<std::size_t> pick;
    // Local steps come first in the enabled order, and deliveries are ordered
    // by message id, so the first match is the local step or oldest message.
    for (std::size_t i = 0; i < enabled.size(); ++i) {
      if (matches(entry, enabled[i])) {
        pick = i;
        break;
      }
    }
    if (pick) {
      last_pid_ = enabled[*pick].pid.value;
      return pick;
    }
    ++skipped_;
  }
  return std::nullopt;
}

}  // namespace seqthink::sim

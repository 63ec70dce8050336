#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "seqthink/crypto.hpp"
#include "seqthink/objects/op.hpp"

namespace seqthink::objects {

/// One ledger record. `payload` is opaque bytes (a command, when the ledger
/// backs a universal object).
struct LedgerBlock {
  std::string payload;
  Digest prev_hash{};
  sim::ProcessId appender;

  auto operator<=>(const LedgerBlock&) const = default;
};

/// prev_hash of the first block.
inline constexpr Digest kGenesisHash{};

/// SHA-256 over u32be(appender) || u32be(len) || payload || prev_hash.
Digest block_hash(const LedgerBlock& block);

/// Hash-linked list of blocks. `head` is the hash of the last block (genesis
/// when empty); it anchors the tail so that the last block is covered too.
struct LedgerState {
  std::vector<LedgerBlock> blocks;
  Digest head = kGenesisHash;

  auto operator<=>(const LedgerState&) const = default;

  std::size_t size() const noexcept { return blocks.size(); }
  /// Appends a correctly linked block and advances head.
  void append(std::string payload, sim::ProcessId appender);
  /// Snapshot copy of the blocks.
  std::vector<LedgerBlock> read() const { return blocks; }
};

/// nullopt when every link holds, else the smallest violating index: k if
/// blocks[k].prev_hash is wrong, size() if head does not match the last block.
std::optional<std::size_t> verify_chain(const LedgerState& state);

/// Ledger as a sequential object. `append X` -> ok, `read` -> whole list.
class LedgerSpec {
 public:
  using State = LedgerState;

  static constexpr std::string_view name() { return "ledger"; }
  State initial() const { return {}; }
  Transition<State> apply(const State& state, const Op& op) const;
  std::string describe(const State& state) const;
};

/// Renders a list of payloads as `[a,b,c]`, the ledger read() result.
std::string render_payloads(const std::vector<LedgerBlock>& blocks);

struct LedgerFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Binary form: u32be count, then per block u32be appender, u32be len,
/// payload, prev_hash (32 bytes); then head (32 bytes).
std::string serialize(const LedgerState& state);
LedgerState deserialize(std::string_view bytes);

/// Text dump, one block per line: `index pN prev_hex len:payload`, preceded
/// by `ledger <count> <head_hex>`.
std::string to_text(const LedgerState& state);
LedgerState from_text(std::string_view text);

/// Thrown by replay when a payload is not a valid command of the spec.
struct ReplayError : std::runtime_error {
  ReplayError(std::size_t index, const std::string& what)
      : std::runtime_error("block " + std::to_string(index) + ": " + what), index(index) {}
  std::size_t index;
};

template <class State>
struct Replay {
  State state;
  std::optional<std::string> last_result;
};

/// Replays the ledger's payloads, in order, as commands of `spec` starting
/// from its initial state. Each command is invoked by its block's appender.
template <SequentialSpec S>
Replay<typename S::State> replay(const LedgerState& ledger, const S& spec) {
  Replay<typename S::State> out{spec.initial(), std::nullopt};
  for (std::size_t i = 0; i < ledger.blocks.size(); ++i) {
    const auto& b = ledger.blocks[i];
    try {
      auto t = spec.apply(out.state, parse_op(b.payload, b.appender));
      out.state = std::move(t.state);
      out.last_result = std::move(t.result);
    } catch (const UnknownOp& e) {
      throw ReplayError(i, e.what());
    }
  }
  return out;
}

}  // namespace seqthink::objects

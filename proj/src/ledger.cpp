#include "seqthink/objects/ledger.hpp"

#include <charconv>
#include <sstream>

namespace seqthink::objects {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

void put_digest(std::string& out, const Digest& d) { out.append(reinterpret_cast<const char*>(d.data()), d.size()); }

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::uint32_t u32() {
    auto b = take(4);
    std::uint32_t v = 0;
    for (char c : b) v = (v << 8) | static_cast<std::uint8_t>(c);
    return v;
  }

  Digest digest() {
    auto b = take(32);
    Digest d;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<std::uint8_t>(b[i]);
    return d;
  }

  std::string_view take(std::size_t len) {
    if (in_.size() - pos_ < len) throw LedgerFormatError("truncated ledger at byte " + std::to_string(pos_));
    auto s = in_.substr(pos_, len);
    pos_ += len;
    return s;
  }

  bool at_end() const noexcept { return pos_ == in_.size(); }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

std::uint32_t appender_word(sim::ProcessId p) { return static_cast<std::uint32_t>(p.value); }

}  // namespace

Digest block_hash(const LedgerBlock& block) {
  std::string buf;
  buf.reserve(8 + block.payload.size() + 32);
  put_u32(buf, appender_word(block.appender));
  put_u32(buf, static_cast<std::uint32_t>(block.payload.size()));
  buf += block.payload;
  put_digest(buf, block.prev_hash);
  return sha256(buf);
}

void LedgerState::append(std::string payload, sim::ProcessId appender) {
  LedgerBlock b{std::move(payload), head, appender};
  head = block_hash(b);
  blocks.push_back(std::move(b));
}

std::optional<std::size_t> verify_chain(const LedgerState& state) {
  Digest expected = kGenesisHash;
  for (std::size_t k = 0; k < state.blocks.size(); ++k) {
    if (state.blocks[k].prev_hash != expected) return k;
    expected = block_hash(state.blocks[k]);
  }
  if (state.head != expected) return state.blocks.size();
  return std::nullopt;
}

std::string render_payloads(const std::vector<LedgerBlock>& blocks) {
  std::string out = "[";
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i) out += ",";
    out += blocks[i].payload;
  }
  return out + "]";
}

Transition<LedgerState> LedgerSpec::apply(const State& state, const Op& op) const {
  if (op.name == "append") {
    if (op.arg.empty()) throw UnknownOp("append needs a payload");
    auto next = state;
    next.append(op.arg, op.caller);
    return {std::move(next), "ok"};
  }
  if (op.name == "read" && op.arg.empty()) return {state, render_payloads(state.read())};
  throw UnknownOp("ledger has no operation '" + to_string(op) + "'");
}

std::string LedgerSpec::describe(const State& state) const { return render_payloads(state.blocks); }

std::string serialize(const LedgerState& state) {
  std::string out;
  put_u32(out, static_cast<std::uint32_t>(state.blocks.size()));
  for (const auto& b : state.blocks) {
    put_u32(out, appender_word(b.appender));
    put_u32(out, static_cast<std::uint32_t>(b.payload.size()));
    out += b.payload;
    put_digest(out, b.prev_hash);
  }
  put_digest(out, state.head);
  return out;
}

LedgerState deserialize(std::string_view bytes) {
  Reader r(bytes);
  LedgerState s;
  auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    LedgerBlock b;
    b.appender = sim::pid(static_cast<int>(r.u32()));
    auto len = r.u32();
    b.payload = std::string(r.take(len));
    b.prev_hash = r.digest();
    s.blocks.push_back(std::move(b));
  }
  s.head = r.digest();
  if (!r.at_end()) throw LedgerFormatError("trailing bytes after ledger");
  return s;
}

std::string to_text(const LedgerState& state) {
  std::ostringstream out;
  out << "ledger " << state.blocks.size() << " " << to_hex(state.head) << "\n";
  for (std::size_t i = 0; i < state.blocks.size(); ++i) {
    const auto& b = state.blocks[i];
    out << i << " " << sim::to_string(b.appender) << " " << to_hex(b.prev_hash) << " " << b.payload.size() << ":"
        << b.payload << "\n";
  }
  return out.str();
}

LedgerState from_text(std::string_view text) {
  auto fail = [](std::size_t line, const std::string& why) -> LedgerFormatError {
    return LedgerFormatError("line " + std::to_string(line) + ": " + why);
  };
  auto next_field = [](std::string_view& s) {
    auto sp = s.find(' ');
    auto f = s.substr(0, sp);
    s = sp == std::string_view::npos ? std::string_view{} : s.substr(sp + 1);
    return f;
  };
  auto to_size = [](std::string_view f, std::size_t& v) {
    auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    return !f.empty() && ec == std::errc{} && p == f.data() + f.size();
  };

  LedgerState s;
  std::size_t pos = 0, line = 0, count = 0;
  auto next_line = [&]() -> std::optional<std::string_view> {
    if (pos >= text.size()) return std::nullopt;
    ++line;
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto l = text.substr(pos, nl - pos);
    pos = nl + 1;
    return l;
  };

  auto header = next_line();
  if (!header) throw fail(1, "empty ledger dump");
  auto h = *header;
  if (next_field(h) != "ledger" || !to_size(next_field(h), count)) throw fail(line, "bad header");
  try {
    s.head = digest_from_hex(h);
  } catch (const std::invalid_argument&) {
    throw fail(line, "bad head digest");
  }

  for (std::size_t i = 0; i < count; ++i) {
    // Payloads may contain newlines; the length prefix decides where they end.
    if (pos >= text.size()) throw fail(line + 1, "missing block " + std::to_string(i));
    ++line;
    std::string_view rest = text.substr(pos);
    std::size_t index = 0, len = 0;
    if (!to_size(next_field(rest), index) || index != i) throw fail(line, "bad block index");
    auto who = next_field(rest);
    std::size_t pnum = 0;
    if (who.size() < 2 || who[0] != 'p' || !to_size(who.substr(1), pnum)) throw fail(line, "bad appender");
    LedgerBlock b;
    b.appender = sim::pid(static_cast<int>(pnum));
    try {
      b.prev_hash = digest_from_hex(next_field(rest));
    } catch (const std::invalid_argument&) {
      throw fail(line, "bad prev_hash");
    }
    auto colon = rest.find(':');
    if (colon == std::string_view::npos || !to_size(rest.substr(0, colon), len)) throw fail(line, "bad payload length");
    if (rest.size() < colon + 1 + len + 1 || rest[colon + 1 + len] != '\n') throw fail(line, "payload length mismatch");
    b.payload = std::string(rest.substr(colon + 1, len));
    pos = static_cast<std::size_t>(rest.data() - text.data()) + colon + 1 + len + 1;
    s.blocks.push_back(std::move(b));
  }
  if (pos < text.size()) throw fail(line + 1, "trailing data");
  return s;
}

}  // namespace seqthink::objects

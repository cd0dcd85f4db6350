#include "cmx/codec.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <string>

namespace cmx::codec {

namespace {

constexpr std::uint8_t kMagic[4] = {0x43, 0x4D, 0x58, 0x31};  // "CMX1"
constexpr std::size_t kHeaderSize = 12;
constexpr std::size_t kTokenWireSize = 5;

void put_u16be(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u64be(Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8)
    out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint16_t read_u16be(ByteView b, std::size_t at) {
  return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

std::uint64_t read_u64be(ByteView b, std::size_t at) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i) v = (v << 8) | b[at + i];
  return v;
}

bool token_shape_ok(const Token& t) {
  return (t.offset == 0) == (t.length == 0);
}

// Hash-chained match finder over the whole input span. Chains enumerate
// candidate positions in increasing-offset order, so taking strictly longer
// matches preserves the smallest-offset tie-break of search_buffer. Every
// match of length >= min_match_len shares its first key_len bytes with the
// lookahead, so no candidate is ever missed; hash collisions only add
// candidates, which the byte-wise verification filters out.
class MatchFinder {
 public:
  MatchFinder(ByteView data, const CodecParams& params)
      : data_(data),
        window_(params.window_size),
        min_match_(params.min_match_len),
        key_len_(std::min<std::size_t>(params.min_match_len, 3)),
        head_(std::size_t{1} << kHashBits, kNil),
        prev_(kRingSize, kNil) {}

  void insert_up_to(std::size_t pos) {
    for (; next_insert_ < pos; ++next_insert_) {
      if (next_insert_ + key_len_ > data_.size()) continue;
      const std::uint32_t h = hash_at(next_insert_);
      prev_[next_insert_ & kRingMask] = head_[h];
      head_[h] = static_cast<std::uint32_t>(next_insert_);
    }
  }

  Match find(std::size_t pos, std::size_t look_len) const {
    const std::size_t cap = look_len - 1;
    if (cap < min_match_ || pos + key_len_ > data_.size()) return {};
    const std::size_t min_pos = pos > window_ ? pos - window_ : 0;
    std::size_t best_len = 0;
    std::size_t best_off = 0;
    std::uint32_t cand = head_[hash_at(pos)];
    while (cand != kNil && cand >= min_pos && cand < pos) {
      const std::size_t len = match_len(cand, pos, cap);
      if (len > best_len) {
        best_len = len;
        best_off = pos - cand;
        if (best_len == cap) break;
      }
      const std::uint32_t next = prev_[cand & kRingMask];
      if (next >= cand) break;  // stale ring slot
      cand = next;
    }
    if (best_len < min_match_) return {};
    return {static_cast<std::uint32_t>(best_off),
            static_cast<std::uint32_t>(best_len)};
  }

 private:
  static constexpr unsigned kHashBits = 15;
  static constexpr std::size_t kRingSize = std::size_t{1} << 17;
  static constexpr std::uint32_t kRingMask = kRingSize - 1;
  static constexpr std::uint32_t kNil = 0xFFFFFFFFu;

  std::uint32_t hash_at(std::size_t at) const {
    std::uint32_t h = 0;
    for (std::size_t i = 0; i < key_len_; ++i) h = h * 257u + data_[at + i];
    return (h * 2654435761u) >> (32 - kHashBits);
  }

  std::size_t match_len(std::size_t cand, std::size_t pos,
                        std::size_t cap) const {
    std::size_t len = 0;
    while (len < cap && data_[cand + len] == data_[pos + len]) ++len;
    return len;
  }

  ByteView data_;
  std::size_t window_;
  std::size_t min_match_;
  std::size_t key_len_;
  std::vector<std::uint32_t> head_;
  std::vector<std::uint32_t> prev_;
  std::size_t next_insert_ = 0;
};

}  // namespace

void CodecParams::validate() const {
  if (window_size < 1 || window_size > 65535)
    throw CmxError(ErrorKind::validation,
                   "window_size must be in [1, 65535]");
  if (lookahead_size < 1 || lookahead_size > 65535)
    throw CmxError(ErrorKind::validation,
                   "lookahead_size must be in [1, 65535]");
  if (min_match_len < 2)
    throw CmxError(ErrorKind::validation, "min_match_len must be >= 2");
  if (min_match_len > lookahead_size)
    throw CmxError(ErrorKind::validation,
                   "min_match_len must not exceed lookahead_size");
  if (initial_read_capacity < 1)
    throw CmxError(ErrorKind::validation,
                   "initial_read_capacity must be >= 1");
}

GrowableBuffer::GrowableBuffer(std::size_t initial_capacity,
                               std::size_t max_capacity)
    : storage_(std::max<std::size_t>(initial_capacity, 1)),
      max_capacity_(max_capacity) {}

GrowableBuffer& increase_buffer(GrowableBuffer& buf, std::size_t needed) {
  const std::size_t required = buf.fill_ + needed;
  if (required <= buf.storage_.size()) return buf;
  std::size_t cap = buf.storage_.size();
  while (cap < required) cap *= 2;
  if (buf.max_capacity_ != 0 && cap > buf.max_capacity_)
    throw CmxError(ErrorKind::capacity_overflow,
                   "growth to " + std::to_string(cap) +
                       " exceeds maximum of " +
                       std::to_string(buf.max_capacity_));
  buf.storage_.resize(cap);
  return buf;
}

GrowableBuffer& append_buffer(GrowableBuffer& accumulator, ByteView fragment) {
  if (fragment.empty()) return accumulator;
  increase_buffer(accumulator, fragment.size());
  std::memcpy(accumulator.storage_.data() + accumulator.fill_, fragment.data(),
              fragment.size());
  accumulator.fill_ += fragment.size();
  return accumulator;
}

void append_back_reference(GrowableBuffer& buf, std::size_t offset,
                           std::size_t length) {
  if (length == 0) return;
  increase_buffer(buf, length);
  std::uint8_t* d = buf.storage_.data();
  for (std::size_t i = 0; i < length; ++i, ++buf.fill_)
    d[buf.fill_] = d[buf.fill_ - offset];
}

void drop_front(GrowableBuffer& buf, std::size_t count) {
  if (count >= buf.fill_) {
    buf.fill_ = 0;
    return;
  }
  std::memmove(buf.storage_.data(), buf.storage_.data() + count,
               buf.fill_ - count);
  buf.fill_ -= count;
}

std::size_t read_buffer(std::istream& source, GrowableBuffer& lookahead,
                        const CodecParams& params) {
  if (source.bad())
    throw CmxError(ErrorKind::io_error, "source stream in failed state");
  if (lookahead.fill() >= params.lookahead_size) return 0;
  const std::size_t want = params.lookahead_size - lookahead.fill();
  std::vector<char> chunk(want);
  source.read(chunk.data(), static_cast<std::streamsize>(want));
  if (source.bad())
    throw CmxError(ErrorKind::io_error, "read failure on source stream");
  const auto got = static_cast<std::size_t>(source.gcount());
  append_buffer(lookahead,
                ByteView(reinterpret_cast<const std::uint8_t*>(chunk.data()),
                         got));
  return got;
}

Match search_buffer(ByteView window, ByteView lookahead,
                    const CodecParams& params) {
  if (lookahead.empty()) return {};
  const std::size_t reach = std::min(window.size(), params.window_size);
  const std::size_t cap = lookahead.size() - 1;
  std::size_t best_len = 0;
  std::size_t best_off = 0;
  for (std::size_t d = 1; d <= reach; ++d) {
    std::size_t len = 0;
    while (len < cap) {
      // Sources past the window edge wrap into the bytes being produced.
      const std::uint8_t src = len < d ? window[window.size() - d + len]
                                       : lookahead[len - d];
      if (src != lookahead[len]) break;
      ++len;
    }
    if (len > best_len) {
      best_len = len;
      best_off = d;
      if (best_len == cap) break;
    }
  }
  if (best_len < params.min_match_len) return {};
  return {static_cast<std::uint32_t>(best_off),
          static_cast<std::uint32_t>(best_len)};
}

TokenStream compress(ByteView data, const CodecParams& params) {
  params.validate();
  TokenStream out;
  out.original_length = data.size();
  if (data.empty()) return out;
  MatchFinder finder(data, params);
  std::size_t pos = 0;
  while (pos < data.size()) {
    const std::size_t look_len =
        std::min(params.lookahead_size, data.size() - pos);
    Match m{};
    if (look_len > params.min_match_len) {
      finder.insert_up_to(pos);
      m = finder.find(pos, look_len);
    }
    out.tokens.push_back(Token{static_cast<std::uint16_t>(m.offset),
                               static_cast<std::uint16_t>(m.length),
                               data[pos + m.length]});
    pos += m.length + 1;
  }
  return out;
}

TokenStream compress(std::istream& source, const CodecParams& params) {
  params.validate();
  GrowableBuffer consumed(params.initial_read_capacity);
  GrowableBuffer look(params.lookahead_size);
  TokenStream out;
  for (;;) {
    read_buffer(source, look, params);
    if (look.fill() == 0) break;
    const ByteView window =
        consumed.view().last(std::min(consumed.fill(), params.window_size));
    Match m{};
    if (look.fill() > params.min_match_len)
      m = search_buffer(window, look.view(), params);
    out.tokens.push_back(Token{static_cast<std::uint16_t>(m.offset),
                               static_cast<std::uint16_t>(m.length),
                               look.view()[m.length]});
    append_buffer(consumed, look.view().first(m.length + 1));
    drop_front(look, m.length + 1);
  }
  out.original_length = consumed.fill();
  return out;
}

bool compare_buffer(std::uint64_t reconstructed_fill, const Token& token) {
  return token_shape_ok(token) && token.offset <= reconstructed_fill;
}

Bytes decompress(const TokenStream& stream, const CodecParams& params) {
  params.validate();
  GrowableBuffer out(params.initial_read_capacity);
  for (const Token& t : stream.tokens) {
    if (!compare_buffer(out.fill(), t))
      throw CmxError(ErrorKind::malformed_stream,
                     "back-reference at offset " + std::to_string(t.offset) +
                         " with only " + std::to_string(out.fill()) +
                         " bytes reconstructed");
    append_back_reference(out, t.offset, t.length);
    const std::uint8_t lit = t.literal;
    append_buffer(out, ByteView(&lit, 1));
  }
  if (out.fill() != stream.original_length)
    throw CmxError(ErrorKind::malformed_stream,
                   "reconstructed " + std::to_string(out.fill()) +
                       " bytes, header says " +
                       std::to_string(stream.original_length));
  return Bytes(out.view().begin(), out.view().end());
}

Bytes serialize_tokens(const TokenStream& stream) {
  std::uint64_t accounted = 0;
  for (const Token& t : stream.tokens) {
    if (!token_shape_ok(t))
      throw CmxError(ErrorKind::token_invariant,
                     "offset and length must be zero together");
    accounted += std::uint64_t{t.length} + 1;
  }
  if (accounted != stream.original_length)
    throw CmxError(ErrorKind::token_invariant,
                   "tokens account for " + std::to_string(accounted) +
                       " bytes, header says " +
                       std::to_string(stream.original_length));
  Bytes out;
  out.reserve(kHeaderSize + kTokenWireSize * stream.tokens.size());
  for (std::uint8_t b : kMagic) out.push_back(b);
  put_u64be(out, stream.original_length);
  for (const Token& t : stream.tokens) {
    put_u16be(out, t.offset);
    put_u16be(out, t.length);
    out.push_back(t.literal);
  }
  return out;
}

TokenStream deserialize_tokens(ByteView bytes) {
  if (bytes.size() < kHeaderSize)
    throw CmxError(ErrorKind::truncated_stream,
                   "need at least " + std::to_string(kHeaderSize) +
                       " bytes, got " + std::to_string(bytes.size()));
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
    throw CmxError(ErrorKind::bad_magic, "stream does not begin with CMX1");
  if ((bytes.size() - kHeaderSize) % kTokenWireSize != 0)
    throw CmxError(ErrorKind::truncated_stream,
                   "partial token at end of stream");
  TokenStream out;
  out.original_length = read_u64be(bytes, 4);
  const std::size_t count = (bytes.size() - kHeaderSize) / kTokenWireSize;
  out.tokens.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = kHeaderSize + i * kTokenWireSize;
    Token t;
    t.offset = read_u16be(bytes, at);
    t.length = read_u16be(bytes, at + 2);
    t.literal = bytes[at + 4];
    if (!token_shape_ok(t))
      throw CmxError(ErrorKind::token_invariant,
                     "token " + std::to_string(i) +
                         " has offset/length zero mismatch");
    out.tokens.push_back(t);
  }
  return out;
}

}  // namespace cmx::codec

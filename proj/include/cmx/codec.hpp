#pragma once

#include <cstdint>
#include <istream>
#include <vector>

#include "cmx/bytes.hpp"
#include "cmx/errors.hpp"

namespace cmx::codec {

/// Buffer dimensions for the sliding-window codec. Defaults are sized so
/// offsets and lengths fit the 2-byte wire fields with headroom.
struct CodecParams {
  std::size_t window_size = 4096;        // search window, bytes
  std::size_t lookahead_size = 16;       // look-ahead buffer, bytes
  std::size_t min_match_len = 3;         // shortest match worth a back-reference
  std::size_t initial_read_capacity = 8192;

  /// Throws CmxError(validation) if any invariant is broken.
  void validate() const;
};

/// One unit of compressed output: copy `length` bytes from `offset` back,
/// then emit `literal`. offset == 0 and length == 0 together mean "no match".
struct Token {
  std::uint16_t offset = 0;
  std::uint16_t length = 0;
  std::uint8_t literal = 0;

  bool operator==(const Token&) const = default;
};

struct TokenStream {
  std::uint64_t original_length = 0;
  std::vector<Token> tokens;

  bool operator==(const TokenStream&) const = default;
};

struct Match {
  std::uint32_t offset = 0;
  std::uint32_t length = 0;
};

/// Byte accumulator whose capacity only ever doubles. Contents are preserved
/// in order across growths.
class GrowableBuffer {
 public:
  /// max_capacity 0 means unbounded.
  explicit GrowableBuffer(std::size_t initial_capacity = 64,
                          std::size_t max_capacity = 0);

  const std::uint8_t* data() const { return storage_.data(); }
  std::size_t capacity() const { return storage_.size(); }
  std::size_t fill() const { return fill_; }
  std::size_t max_capacity() const { return max_capacity_; }
  ByteView view() const { return ByteView(storage_.data(), fill_); }

  void clear() { fill_ = 0; }

 private:
  std::vector<std::uint8_t> storage_;
  std::size_t fill_ = 0;
  std::size_t max_capacity_ = 0;

  friend GrowableBuffer& append_buffer(GrowableBuffer&, ByteView);
  friend GrowableBuffer& increase_buffer(GrowableBuffer&, std::size_t);
  friend void append_back_reference(GrowableBuffer&, std::size_t, std::size_t);
  friend void drop_front(GrowableBuffer&, std::size_t);
};

/// Appends fragment to the accumulator, growing capacity by doubling when
/// needed. Throws CmxError(capacity_overflow) if a configured maximum would
/// be exceeded.
GrowableBuffer& append_buffer(GrowableBuffer& accumulator, ByteView fragment);

/// Doubles capacity repeatedly until fill + needed fits. No-op when the
/// request already fits.
GrowableBuffer& increase_buffer(GrowableBuffer& buf, std::size_t needed);

/// Copies `length` bytes starting `offset` back from the write position,
/// byte by byte so self-overlapping references replicate runs.
void append_back_reference(GrowableBuffer& buf, std::size_t offset,
                           std::size_t length);

/// Removes the first `count` bytes, shifting the remainder down.
void drop_front(GrowableBuffer& buf, std::size_t count);

/// Refills the lookahead buffer from the source up to lookahead_size or end
/// of stream. Returns the number of bytes added. A stream in a failed state
/// raises CmxError(io_error).
std::size_t read_buffer(std::istream& source, GrowableBuffer& lookahead,
                        const CodecParams& params);

/// Longest match of a lookahead prefix within the window. Matches may
/// self-overlap past the window edge (offset < length). Ties on length go to
/// the smallest offset. Returns {0,0} when the best length is below
/// min_match_len. One lookahead byte is always left over for the literal, so
/// length <= lookahead.size() - 1.
Match search_buffer(ByteView window, ByteView lookahead,
                    const CodecParams& params);

/// Greedy left-to-right tokenization of the whole input. Deterministic:
/// identical input and params give identical streams.
TokenStream compress(ByteView data, const CodecParams& params = {});

/// Stream variant built on read_buffer/append_buffer/search_buffer. Emits
/// exactly the same tokens as the span overload.
TokenStream compress(std::istream& source, const CodecParams& params = {});

/// Reconstructs the original bytes. Throws CmxError(malformed_stream) when a
/// back-reference reaches before the start of output or the reconstructed
/// length disagrees with the header.
Bytes decompress(const TokenStream& stream, const CodecParams& params = {});

/// Validity check for one token against the current amount of reconstructed
/// output: structural invariant plus offset <= reconstructed_fill.
bool compare_buffer(std::uint64_t reconstructed_fill, const Token& token);

/// Wire format: "CMX1", original_length as 8-byte big-endian, then per token
/// offset u16be, length u16be, literal u8.
Bytes serialize_tokens(const TokenStream& stream);

/// Inverse of serialize_tokens. Throws CmxError with kind bad_magic,
/// truncated_stream or token_invariant.
TokenStream deserialize_tokens(ByteView bytes);

}  // namespace cmx::codec

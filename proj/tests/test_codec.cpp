#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "cmx/codec.hpp"
#include "reference_codec.hpp"
#include "test_support.hpp"

using namespace cmx;
using namespace cmx::codec;

namespace {

Bytes B(std::string_view s) { return to_bytes(s); }

TokenStream stream_of(std::uint64_t original,
                      std::initializer_list<Token> toks) {
  TokenStream s;
  s.original_length = original;
  s.tokens = toks;
  return s;
}

}  // namespace

TEST_CASE("append_buffer basics") {
  GrowableBuffer buf(4);
  append_buffer(buf, ByteView{});
  CHECK(buf.fill() == 0);

  Bytes abc = B("abc");
  append_buffer(buf, abc);
  CHECK(buf.fill() == 3);
  CHECK(to_string(buf.view()) == "abc");

  GrowableBuffer small(2);
  append_buffer(small, B("ab"));
  CHECK(small.capacity() == 2);
  append_buffer(small, B("cd"));
  CHECK(to_string(small.view()) == "abcd");
  CHECK(small.capacity() == 4);  // one doubling
}

TEST_CASE("append_buffer respects a configured maximum") {
  GrowableBuffer capped(4, 8);
  append_buffer(capped, B("12345678"));
  CHECK(capped.fill() == 8);
  CHECK_THROWS_AS(append_buffer(capped, B("9")), CmxError);
  try {
    append_buffer(capped, B("9"));
  } catch (const CmxError& e) {
    CHECK(e.kind() == ErrorKind::capacity_overflow);
  }
  // contents untouched by the failed append
  CHECK(to_string(capped.view()) == "12345678");
}

TEST_CASE("increase_buffer doubles until the request fits") {
  GrowableBuffer buf(8);
  append_buffer(buf, B("12345678"));
  increase_buffer(buf, 1);
  CHECK(buf.capacity() == 16);

  GrowableBuffer buf2(8);
  append_buffer(buf2, B("12345678"));
  increase_buffer(buf2, 9);
  CHECK(buf2.capacity() == 32);
  CHECK(to_string(buf2.view()) == "12345678");

  GrowableBuffer empty(1);
  increase_buffer(empty, 1);  // already fits: no-op
  CHECK(empty.capacity() == 1);
}

TEST_CASE("growable buffer capacity follows initial * 2^k and preserves prefix") {
  testsup::Rng rng(11);
  GrowableBuffer buf(16);
  Bytes mirror;
  std::size_t growths = 0;
  std::size_t last_cap = buf.capacity();
  for (int i = 0; i < 500; ++i) {
    Bytes chunk = testsup::make_input(rng, 1 + rng.below(50),
                                      testsup::Alphabet::binary);
    append_buffer(buf, chunk);
    mirror.insert(mirror.end(), chunk.begin(), chunk.end());
    if (buf.capacity() != last_cap) {
      CHECK(buf.capacity() % last_cap == 0);
      while (last_cap < buf.capacity()) {
        last_cap *= 2;
        ++growths;
      }
    }
    REQUIRE(buf.fill() == mirror.size());
  }
  CHECK(buf.capacity() == std::size_t{16} << growths);
  CHECK(to_string(buf.view()) == to_string(ByteView(mirror)));
}

TEST_CASE("read_buffer fills the lookahead from a stream") {
  CodecParams p;
  p.lookahead_size = 4;

  std::istringstream src("abcdef");
  GrowableBuffer look(p.lookahead_size);
  read_buffer(src, look, p);
  CHECK(to_string(look.view()) == "abcd");

  std::istringstream exhausted("");
  exhausted.get();  // force eof
  GrowableBuffer kept(p.lookahead_size);
  append_buffer(kept, B("xy"));
  read_buffer(exhausted, kept, p);
  CHECK(to_string(kept.view()) == "xy");

  CodecParams wide;
  wide.lookahead_size = 16;
  std::istringstream shortsrc("abc");
  GrowableBuffer look2(wide.lookahead_size);
  read_buffer(shortsrc, look2, wide);
  CHECK(look2.fill() == 3);
  CHECK(to_string(look2.view()) == "abc");
}

TEST_CASE("read_buffer propagates stream failure") {
  CodecParams p;
  std::istringstream src("abc");
  src.setstate(std::ios::badbit);
  GrowableBuffer look(p.lookahead_size);
  CHECK_THROWS_AS(read_buffer(src, look, p), CmxError);
}

TEST_CASE("search_buffer examples") {
  CodecParams p;

  SUBCASE("empty window") {
    Bytes look = B("a");
    Match m = search_buffer(ByteView{}, look, p);
    CHECK(m.offset == 0);
    CHECK(m.length == 0);
  }

  SUBCASE("tie on length breaks to the smallest offset") {
    CodecParams p2;
    p2.min_match_len = 2;
    Bytes win = B("abcab");
    Bytes look = B("abx");
    Match m = search_buffer(win, look, p2);
    CHECK(m.offset == 2);
    CHECK(m.length == 2);
  }

  SUBCASE("overlapping run reserves one literal byte") {
    Bytes win = B("a");
    Bytes look = B("aaaa");
    Match m = search_buffer(win, look, p);
    CHECK(m.offset == 1);
    CHECK(m.length == 3);
  }

  SUBCASE("below min_match_len yields no match") {
    Bytes win = B("ab");
    Bytes look = B("abZZZ");
    Match m = search_buffer(win, look, p);  // "ab" is length 2 < 3
    CHECK(m.offset == 0);
    CHECK(m.length == 0);
  }
}

TEST_CASE("search_buffer agrees with a brute scan on random slices") {
  testsup::Rng rng(23);
  CodecParams p;
  p.min_match_len = 2;
  for (int i = 0; i < 300; ++i) {
    Bytes data = testsup::make_input(
        rng, 30 + rng.below(200),
        i % 2 == 0 ? testsup::Alphabet::runs : testsup::Alphabet::ascii);
    const std::size_t pos = 1 + rng.below(data.size() - 2);
    const std::size_t look_len =
        std::min<std::size_t>(1 + rng.below(15), data.size() - pos);
    ByteView win(data.data(), pos);
    ByteView look(data.data() + pos, look_len);
    Match m = search_buffer(win, look, p);
    // reference: scan every offset directly on the flat array
    std::size_t best_len = 0, best_off = 0;
    const std::size_t cap = look_len - 1;
    for (std::size_t d = 1; d <= std::min(pos, p.window_size); ++d) {
      std::size_t len = 0;
      while (len < cap && data[pos - d + len] == data[pos + len]) ++len;
      if (len > best_len) {
        best_len = len;
        best_off = d;
      }
    }
    if (best_len < p.min_match_len) best_len = best_off = 0;
    REQUIRE(m.offset == best_off);
    REQUIRE(m.length == best_len);
  }
}

TEST_CASE("compress examples") {
  CodecParams p;

  TokenStream empty = compress(ByteView{}, p);
  CHECK(empty.original_length == 0);
  CHECK(empty.tokens.empty());

  TokenStream one = compress(B("A"), p);
  CHECK(one.tokens == std::vector<Token>{Token{0, 0, 'A'}});

  TokenStream runs = compress(B("AAAAAAAA"), p);
  CHECK(runs.original_length == 8);
  REQUIRE(runs.tokens.size() == 2);
  CHECK(runs.tokens[0] == Token{0, 0, 'A'});
  CHECK(runs.tokens[1] == Token{1, 6, 'A'});
}

TEST_CASE("compress is deterministic") {
  testsup::Rng rng(7);
  Bytes data = testsup::make_input(rng, 4096, testsup::Alphabet::motif);
  CHECK(compress(data) == compress(data));
}

TEST_CASE("decompress examples") {
  CodecParams p;

  CHECK(decompress(stream_of(0, {}), p).empty());

  Bytes eight = decompress(stream_of(8, {{0, 0, 'A'}, {1, 6, 'A'}}), p);
  CHECK(to_string(eight) == "AAAAAAAA");

  CHECK_THROWS_AS(decompress(stream_of(3, {{5, 2, 'x'}}), p), CmxError);
  try {
    decompress(stream_of(3, {{5, 2, 'x'}}), p);
  } catch (const CmxError& e) {
    CHECK(e.kind() == ErrorKind::malformed_stream);
  }
}

TEST_CASE("decompress rejects a length that disagrees with the header") {
  TokenStream s = stream_of(5, {{0, 0, 'A'}});  // tokens account for 1 byte
  CHECK_THROWS_AS(decompress(s), CmxError);
}

TEST_CASE("compare_buffer verdicts") {
  CHECK(compare_buffer(0, Token{0, 0, 'a'}));
  CHECK_FALSE(compare_buffer(3, Token{4, 2, 'b'}));
  CHECK(compare_buffer(3, Token{3, 10, 'b'}));  // overlap copy is legal
  CHECK_FALSE(compare_buffer(9, Token{0, 2, 'b'}));
  CHECK_FALSE(compare_buffer(9, Token{2, 0, 'b'}));
}

TEST_CASE("wire format golden bytes") {
  const Bytes header_only = serialize_tokens(stream_of(0, {}));
  const Bytes expect_empty = {0x43, 0x4D, 0x58, 0x31, 0, 0, 0, 0,
                              0,    0,    0,    0};
  CHECK(header_only == expect_empty);

  const Bytes one = serialize_tokens(stream_of(1, {{0, 0, 'A'}}));
  const Bytes expect_one = {0x43, 0x4D, 0x58, 0x31, 0, 0, 0,    0,
                            0,    0,    0,    1,    0, 0, 0,    0,
                            0x41};
  CHECK(one == expect_one);

  Bytes bad = expect_empty;
  bad[0] = 'X';
  bad[1] = 'M';
  bad[2] = 'C';
  CHECK_THROWS_AS(deserialize_tokens(bad), CmxError);
  try {
    deserialize_tokens(bad);
  } catch (const CmxError& e) {
    CHECK(e.kind() == ErrorKind::bad_magic);
  }
}

TEST_CASE("deserialize_tokens error kinds") {
  Bytes ok = serialize_tokens(stream_of(2, {{0, 0, 'h'}, {0, 0, 'i'}}));

  SUBCASE("short input is truncated") {
    Bytes cut(ok.begin(), ok.begin() + 7);
    try {
      deserialize_tokens(cut);
      FAIL("expected throw");
    } catch (const CmxError& e) {
      CHECK(e.kind() == ErrorKind::truncated_stream);
    }
  }

  SUBCASE("partial trailing token is truncated") {
    Bytes cut(ok.begin(), ok.end() - 2);
    try {
      deserialize_tokens(cut);
      FAIL("expected throw");
    } catch (const CmxError& e) {
      CHECK(e.kind() == ErrorKind::truncated_stream);
    }
  }

  SUBCASE("offset without length violates the token invariant") {
    Bytes bad = ok;
    bad[12] = 0;
    bad[13] = 9;  // offset 9, length stays 0
    try {
      deserialize_tokens(bad);
      FAIL("expected throw");
    } catch (const CmxError& e) {
      CHECK(e.kind() == ErrorKind::token_invariant);
    }
  }
}

TEST_CASE("serialize_tokens validates its input stream") {
  TokenStream bad_shape = stream_of(1, {{4, 0, 'x'}});
  CHECK_THROWS_AS(serialize_tokens(bad_shape), CmxError);

  TokenStream bad_sum = stream_of(7, {{0, 0, 'x'}});
  CHECK_THROWS_AS(serialize_tokens(bad_sum), CmxError);
}

TEST_CASE("wire round-trip and size bound") {
  testsup::Rng rng(99);
  for (int i = 0; i < 200; ++i) {
    const auto kind = static_cast<testsup::Alphabet>(i % 4);
    Bytes data = testsup::make_input(rng, rng.below(3000), kind);
    TokenStream s = compress(data);
    Bytes wire = serialize_tokens(s);
    CHECK(deserialize_tokens(wire) == s);
    REQUIRE(wire.size() <= 12 + 5 * data.size());
  }
}

TEST_CASE("round-trip across parameter choices") {
  testsup::Rng rng(42);
  const CodecParams variants[] = {
      {},
      {.window_size = 1, .lookahead_size = 4, .min_match_len = 2,
       .initial_read_capacity = 1},
      {.window_size = 65535, .lookahead_size = 255, .min_match_len = 4,
       .initial_read_capacity = 16},
      {.window_size = 64, .lookahead_size = 8, .min_match_len = 2,
       .initial_read_capacity = 32},
      {.window_size = 512, .lookahead_size = 18, .min_match_len = 18,
       .initial_read_capacity = 8192},
  };
  for (const auto& p : variants) {
    for (int i = 0; i < 60; ++i) {
      const auto kind = static_cast<testsup::Alphabet>(i % 4);
      Bytes data = testsup::make_input(rng, rng.below(4000), kind);
      REQUIRE(decompress(compress(data, p), p) == data);
    }
  }
}

TEST_CASE("compress matches the naive reference encoder") {
  testsup::Rng rng(1234);
  CodecParams p;
  for (int i = 0; i < 150; ++i) {
    const auto kind = static_cast<testsup::Alphabet>(i % 4);
    Bytes data = testsup::make_input(rng, rng.below(2048), kind);
    TokenStream mine = compress(data, p);
    TokenStream ref = refcodec::encode(data, p);
    REQUIRE(mine == ref);
    REQUIRE(refcodec::decode(mine) == data);
  }
}

TEST_CASE("stream compress emits the same tokens as the span path") {
  testsup::Rng rng(555);
  CodecParams p;
  p.lookahead_size = 12;
  p.initial_read_capacity = 4;
  for (int i = 0; i < 40; ++i) {
    const auto kind = static_cast<testsup::Alphabet>(i % 4);
    Bytes data = testsup::make_input(rng, rng.below(1500), kind);
    std::istringstream src(to_string(data));
    REQUIRE(compress(src, p) == compress(data, p));
  }
}

TEST_CASE("token accounting holds on encoder output") {
  testsup::Rng rng(77);
  for (int i = 0; i < 100; ++i) {
    const auto kind = static_cast<testsup::Alphabet>(i % 4);
    Bytes data = testsup::make_input(rng, rng.below(5000), kind);
    TokenStream s = compress(data);
    std::uint64_t sum = 0;
    for (const auto& t : s.tokens) sum += std::uint64_t{t.length} + 1;
    REQUIRE(sum == s.original_length);
  }
}

TEST_CASE("repeated single byte compresses below its plain size") {
  for (std::size_t n : {64, 100, 1000, 4096}) {
    Bytes data(n, 'Q');
    CHECK(serialize_tokens(compress(data)).size() < n);
  }
}

TEST_CASE("codec params are validated") {
  CodecParams p;
  p.min_match_len = 1;
  CHECK_THROWS_AS(p.validate(), CmxError);
  p = {};
  p.lookahead_size = 2;
  p.min_match_len = 3;
  CHECK_THROWS_AS(p.validate(), CmxError);
  p = {};
  p.window_size = 0;
  CHECK_THROWS_AS(p.validate(), CmxError);
  p = {};
  p.window_size = 70000;
  CHECK_THROWS_AS(p.validate(), CmxError);
  p = {};
  p.initial_read_capacity = 0;
  CHECK_THROWS_AS(p.validate(), CmxError);
}

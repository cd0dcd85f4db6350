#include "cmx/xml.hpp"

#include <cctype>
#include <cstdint>

namespace cmx::xml {

namespace {

[[noreturn]] void fail(const std::string& why, std::size_t at) {
  throw CmxError(ErrorKind::not_xml,
                 why + " at byte " + std::to_string(at));
}

bool name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':';
}

bool name_char(char c) {
  return name_start(c) || std::isdigit(static_cast<unsigned char>(c)) ||
         c == '-' || c == '.';
}

class Parser {
 public:
  explicit Parser(std::string_view doc) : doc_(doc) {}

  Node run() {
    skip_prolog();
    Node root = element();
    skip_misc();
    if (pos_ != doc_.size()) fail("trailing content after document element", pos_);
    return root;
  }

 private:
  char peek() const { return pos_ < doc_.size() ? doc_[pos_] : '\0'; }
  bool starts_with(std::string_view s) const {
    return doc_.substr(pos_, s.size()) == s;
  }

  void skip_ws() {
    while (pos_ < doc_.size() &&
           (doc_[pos_] == ' ' || doc_[pos_] == '\t' || doc_[pos_] == '\n' ||
            doc_[pos_] == '\r'))
      ++pos_;
  }

  void skip_comment() {
    const std::size_t start = pos_;
    pos_ += 4;  // "<!--"
    const std::size_t end = doc_.find("-->", pos_);
    if (end == std::string_view::npos) fail("unterminated comment", start);
    pos_ = end + 3;
  }

  void skip_misc() {
    for (;;) {
      skip_ws();
      if (starts_with("<!--")) {
        skip_comment();
        continue;
      }
      break;
    }
  }

  void skip_prolog() {
    skip_ws();
    if (starts_with("<?xml")) {
      const std::size_t end = doc_.find("?>", pos_);
      if (end == std::string_view::npos) fail("unterminated declaration", pos_);
      pos_ = end + 2;
    }
    skip_misc();
    if (peek() != '<') fail("expected document element", pos_);
  }

  std::string name() {
    if (!name_start(peek())) fail("expected name", pos_);
    const std::size_t start = pos_;
    while (pos_ < doc_.size() && name_char(doc_[pos_])) ++pos_;
    return std::string(doc_.substr(start, pos_ - start));
  }

  std::string decode_entities(std::string_view raw, std::size_t base) {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size();) {
      if (raw[i] != '&') {
        out += raw[i++];
        continue;
      }
      const std::size_t semi = raw.find(';', i);
      if (semi == std::string_view::npos) fail("unterminated entity", base + i);
      const std::string_view ent = raw.substr(i + 1, semi - i - 1);
      if (ent == "amp") out += '&';
      else if (ent == "lt") out += '<';
      else if (ent == "gt") out += '>';
      else if (ent == "quot") out += '"';
      else if (ent == "apos") out += '\'';
      else if (!ent.empty() && ent[0] == '#') {
        std::uint32_t code = 0;
        bool ok = ent.size() > 1;
        if (ent.size() > 2 && (ent[1] == 'x' || ent[1] == 'X')) {
          for (std::size_t k = 2; k < ent.size(); ++k) {
            const char c = ent[k];
            if (!std::isxdigit(static_cast<unsigned char>(c))) { ok = false; break; }
            code = code * 16 + (std::isdigit(static_cast<unsigned char>(c))
                                    ? c - '0'
                                    : (std::tolower(c) - 'a' + 10));
          }
          ok = ok && ent.size() > 2;
        } else {
          for (std::size_t k = 1; k < ent.size(); ++k) {
            if (!std::isdigit(static_cast<unsigned char>(ent[k]))) { ok = false; break; }
            code = code * 10 + (ent[k] - '0');
          }
        }
        if (!ok || code == 0 || code > 0x10FFFF)
          fail("bad character reference", base + i);
        // encode as UTF-8
        if (code < 0x80) {
          out += static_cast<char>(code);
        } else if (code < 0x800) {
          out += static_cast<char>(0xC0 | (code >> 6));
          out += static_cast<char>(0x80 | (code & 0x3F));
        } else if (code < 0x10000) {
          out += static_cast<char>(0xE0 | (code >> 12));
          out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
          out += static_cast<char>(0x80 | (code & 0x3F));
        } else {
          out += static_cast<char>(0xF0 | (code >> 18));
          out += static_cast<char>(0x80 | ((code >> 12) & 0x3F));
          out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
          out += static_cast<char>(0x80 | (code & 0x3F));
        }
      } else {
        fail("unknown entity &" + std::string(ent) + ";", base + i);
      }
      i = semi + 1;
    }
    return out;
  }

  Node element() {
    if (peek() != '<') fail("expected element", pos_);
    ++pos_;
    Node node;
    node.name = name();
    for (;;) {
      skip_ws();
      if (starts_with("/>")) {
        pos_ += 2;
        return node;
      }
      if (peek() == '>') {
        ++pos_;
        break;
      }
      // attribute
      std::string key = name();
      skip_ws();
      if (peek() != '=') fail("expected '=' after attribute name", pos_);
      ++pos_;
      skip_ws();
      const char quote = peek();
      if (quote != '"' && quote != '\'') fail("expected quoted value", pos_);
      ++pos_;
      const std::size_t vstart = pos_;
      while (pos_ < doc_.size() && doc_[pos_] != quote) ++pos_;
      if (pos_ == doc_.size()) fail("unterminated attribute value", vstart);
      node.attributes.emplace_back(
          std::move(key),
          decode_entities(doc_.substr(vstart, pos_ - vstart), vstart));
      ++pos_;
    }
    // content
    for (;;) {
      const std::size_t tstart = pos_;
      while (pos_ < doc_.size() && doc_[pos_] != '<') ++pos_;
      if (pos_ > tstart)
        node.text +=
            decode_entities(doc_.substr(tstart, pos_ - tstart), tstart);
      if (pos_ == doc_.size()) fail("unterminated element " + node.name, tstart);
      if (starts_with("<!--")) {
        skip_comment();
        continue;
      }
      if (starts_with("</")) {
        pos_ += 2;
        const std::string closing = name();
        if (closing != node.name)
          fail("mismatched closing tag " + closing + " for " + node.name, pos_);
        skip_ws();
        if (peek() != '>') fail("malformed closing tag", pos_);
        ++pos_;
        return node;
      }
      node.children.push_back(element());
    }
  }

  std::string_view doc_;
  std::size_t pos_ = 0;
};

}  // namespace

const std::string* Node::attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes)
    if (k == key) return &v;
  return nullptr;
}

const Node* Node::child(std::string_view qname) const {
  for (const Node& c : children)
    if (c.name == qname) return &c;
  return nullptr;
}

std::string Node::local_name() const {
  const auto colon = name.find(':');
  return colon == std::string::npos ? name : name.substr(colon + 1);
}

std::string Node::prefix() const {
  const auto colon = name.find(':');
  return colon == std::string::npos ? std::string() : name.substr(0, colon);
}

Node parse(std::string_view doc) { return Parser(doc).run(); }

std::string escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

bool is_xml_text(std::string_view bytes) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = p[i];
    if (c < 0x20) {
      if (c != 0x09 && c != 0x0A && c != 0x0D) return false;
      ++i;
    } else if (c < 0x80) {
      ++i;
    } else {
      // multi-byte UTF-8 sequence
      std::size_t len;
      std::uint32_t code;
      if ((c & 0xE0) == 0xC0) { len = 2; code = c & 0x1F; }
      else if ((c & 0xF0) == 0xE0) { len = 3; code = c & 0x0F; }
      else if ((c & 0xF8) == 0xF0) { len = 4; code = c & 0x07; }
      else return false;
      if (i + len > n) return false;
      for (std::size_t k = 1; k < len; ++k) {
        if ((p[i + k] & 0xC0) != 0x80) return false;
        code = (code << 6) | (p[i + k] & 0x3F);
      }
      static constexpr std::uint32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
      if (code < kMin[len] || code > 0x10FFFF) return false;
      if (code >= 0xD800 && code <= 0xDFFF) return false;  // surrogates
      if (code == 0xFFFE || code == 0xFFFF) return false;
      i += len;
    }
  }
  return true;
}

}  // namespace cmx::xml

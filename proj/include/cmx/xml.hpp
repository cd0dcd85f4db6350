#pragma once

// Minimal non-validating XML reader and text helpers, enough for the SOAP
// and WSDL dialects this project speaks. No DTDs, no CDATA, no processing
// instructions beyond the leading declaration.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cmx/errors.hpp"

namespace cmx::xml {

struct Node {
  std::string name;  // qualified name as written, e.g. "soap:Envelope"
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Node> children;
  std::string text;  // concatenated character data directly under this node

  const std::string* attribute(std::string_view key) const;
  const Node* child(std::string_view qname) const;
  std::string local_name() const;
  std::string prefix() const;
};

/// Parses a complete document into its root element. Throws
/// CmxError(not_xml) on any lexical or structural problem, including
/// trailing garbage and mismatched tags.
Node parse(std::string_view doc);

/// Escapes the five XML-special characters.
std::string escape(std::string_view text);

/// True when the bytes are well-formed UTF-8 restricted to characters legal
/// in XML 1.0 (tab, newline, carriage return, and 0x20 upward).
bool is_xml_text(std::string_view bytes);

}  // namespace cmx::xml

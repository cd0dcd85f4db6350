#include "cmx/envelope.hpp"

#include <array>
#include <cctype>
#include <map>

#include "cmx/xml.hpp"

namespace cmx::envelope {

namespace {

constexpr std::string_view kDecl = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";

using NsMap = std::map<std::string, std::string>;  // prefix -> namespace URI

NsMap with_bindings(const xml::Node& node, NsMap inherited) {
  for (const auto& [key, value] : node.attributes) {
    if (key == "xmlns")
      inherited[""] = value;
    else if (key.rfind("xmlns:", 0) == 0)
      inherited[key.substr(6)] = value;
  }
  return inherited;
}

std::string ns_of(const xml::Node& node, const NsMap& bindings) {
  const auto it = bindings.find(node.prefix());
  return it == bindings.end() ? std::string() : it->second;
}

bool is_name(const xml::Node& node, const NsMap& bindings,
             std::string_view ns, std::string_view local) {
  return node.local_name() == local && ns_of(node, bindings) == ns;
}

[[noreturn]] void missing(const std::string& what) {
  throw CmxError(ErrorKind::missing_envelope, what);
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  if (text.empty()) missing(what + " is empty");
  std::uint64_t v = 0;
  for (char c : text) {
    if (!std::isdigit(static_cast<unsigned char>(c)))
      missing(what + " is not a number: " + text);
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

bool valid_xml_name(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
    return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
          c == '-' || c == '.'))
      return false;
  return true;
}

void validate(const SoapEnvelope& env) {
  const int present = (env.payload.has_value() ? 1 : 0) +
                      (env.compressed_block.has_value() ? 1 : 0) +
                      (env.fault.has_value() ? 1 : 0);
  if (present != 1)
    throw CmxError(ErrorKind::validation,
                   "exactly one of payload, compressed block or fault must "
                   "be present");
  if (env.compressed != env.compressed_block.has_value())
    throw CmxError(ErrorKind::validation,
                   "compressed flag must track the compressed block");
  if (env.original_size.has_value() != env.compressed)
    throw CmxError(ErrorKind::validation,
                   "original_size is present iff compressed");
  if (env.payload) {
    if (env.payload->content_type.empty())
      throw CmxError(ErrorKind::validation, "content_type must be non-empty");
    const std::string_view text(
        reinterpret_cast<const char*>(env.payload->bytes.data()),
        env.payload->bytes.size());
    if (!xml::is_xml_text(text))
      throw CmxError(ErrorKind::unrepresentable_payload,
                     "plain payload contains bytes outside the XML character "
                     "set; use the compressed path");
  }
  if (!env.operation.empty() && !valid_xml_name(env.operation))
    throw CmxError(ErrorKind::validation,
                   "operation is not a valid XML name: " + env.operation);
}

std::string envelope_shell(const std::string& header_inner,
                           const std::string& body_inner) {
  std::string out(kDecl);
  out += "<soap:Envelope xmlns:soap=\"";
  out += kSoapNs;
  out += "\" xmlns:cmx=\"";
  out += kCmxNs;
  out += "\"><soap:Header>";
  out += header_inner;
  out += "</soap:Header><soap:Body>";
  out += body_inner;
  out += "</soap:Body></soap:Envelope>";
  return out;
}

}  // namespace

SoapEnvelope plain_envelope(MessagePayload payload, std::string operation) {
  SoapEnvelope env;
  env.payload = std::move(payload);
  env.operation = std::move(operation);
  return env;
}

SoapEnvelope compressed_envelope(Bytes block, std::uint64_t original_size,
                                 std::string operation) {
  SoapEnvelope env;
  env.compressed = true;
  env.compressed_block = std::move(block);
  env.original_size = original_size;
  env.operation = std::move(operation);
  return env;
}

SoapEnvelope fault_envelope(std::string code, std::string reason) {
  SoapEnvelope env;
  env.fault = SoapFault{std::move(code), std::move(reason)};
  return env;
}

std::string build_envelope(const SoapEnvelope& env) {
  validate(env);
  std::string header = "<cmx:Compressed>";
  header += env.compressed ? "true" : "false";
  header += "</cmx:Compressed>";
  if (!env.operation.empty())
    header += "<cmx:Operation>" + xml::escape(env.operation) +
              "</cmx:Operation>";

  std::string body;
  if (env.fault) {
    body = "<soap:Fault><faultcode>soap:" + xml::escape(env.fault->code) +
           "</faultcode><faultstring>" + xml::escape(env.fault->reason) +
           "</faultstring></soap:Fault>";
  } else if (env.compressed) {
    body = "<cmx:CompressedPayload encoding=\"base64\" algorithm=\"CMX1-LZ77\""
           " originalSize=\"" +
           std::to_string(*env.original_size) + "\">" +
           encode_base64(*env.compressed_block) + "</cmx:CompressedPayload>";
  } else {
    const std::string_view text(
        reinterpret_cast<const char*>(env.payload->bytes.data()),
        env.payload->bytes.size());
    body = "<cmx:Payload contentType=\"" +
           xml::escape(env.payload->content_type) + "\">" +
           xml::escape(text) + "</cmx:Payload>";
  }
  return envelope_shell(header, body);
}

SoapEnvelope parse_envelope(std::string_view xml_text) {
  const xml::Node root = xml::parse(xml_text);
  const NsMap top = with_bindings(root, {});
  if (!is_name(root, top, kSoapNs, "Envelope"))
    missing("document element is not a SOAP Envelope");

  const xml::Node* header = nullptr;
  const xml::Node* body = nullptr;
  for (const xml::Node& child : root.children) {
    const NsMap m = with_bindings(child, top);
    if (is_name(child, m, kSoapNs, "Header")) {
      if (header != nullptr) missing("more than one Header");
      if (body != nullptr) missing("Header after Body");
      header = &child;
    } else if (is_name(child, m, kSoapNs, "Body")) {
      if (body != nullptr) missing("more than one Body");
      body = &child;
    } else {
      missing("unexpected element " + child.name + " under Envelope");
    }
  }
  if (body == nullptr) missing("no Body element");

  SoapEnvelope env;
  bool header_compressed = false;
  if (header != nullptr) {
    const NsMap hm = with_bindings(*header, top);
    for (const xml::Node& h : header->children) {
      const NsMap m = with_bindings(h, hm);
      if (is_name(h, m, kCmxNs, "Compressed")) {
        if (h.text == "true") header_compressed = true;
        else if (h.text == "false") header_compressed = false;
        else missing("Compressed header must be true or false");
      } else if (is_name(h, m, kCmxNs, "Operation")) {
        env.operation = h.text;
      }
      // other header entries are ignored
    }
  }

  const NsMap bm = with_bindings(*body, top);
  if (body->children.size() != 1)
    missing("Body must contain exactly one element");
  const xml::Node& content = body->children.front();
  const NsMap cm = with_bindings(content, bm);

  if (is_name(content, cm, kCmxNs, "Payload")) {
    if (header_compressed)
      missing("compression flag set but Body carries a plain payload");
    MessagePayload payload;
    const std::string* ct = content.attribute("contentType");
    payload.content_type = ct != nullptr ? *ct : "text/xml";
    payload.bytes = to_bytes(content.text);
    env.payload = std::move(payload);
  } else if (is_name(content, cm, kCmxNs, "CompressedPayload")) {
    if (!header_compressed)
      missing("Body carries a compressed payload but the flag is false");
    const std::string* size = content.attribute("originalSize");
    if (size == nullptr) missing("CompressedPayload without originalSize");
    const std::string* enc = content.attribute("encoding");
    if (enc != nullptr && *enc != "base64")
      missing("unsupported encoding " + *enc);
    env.compressed = true;
    env.original_size = parse_u64(*size, "originalSize");
    env.compressed_block = decode_base64(content.text);
  } else if (is_name(content, cm, kSoapNs, "Fault")) {
    if (header_compressed) missing("fault envelopes are never compressed");
    SoapFault fault;
    for (const xml::Node& f : content.children) {
      if (f.local_name() == "faultcode") {
        const auto colon = f.text.find(':');
        fault.code =
            colon == std::string::npos ? f.text : f.text.substr(colon + 1);
      } else if (f.local_name() == "faultstring") {
        fault.reason = f.text;
      }
    }
    env.fault = std::move(fault);
  } else {
    throw CmxError(ErrorKind::unknown_body_element,
                   "unexpected body element " + content.name);
  }
  return env;
}

std::string generate_wsdl(const ServiceDescriptor& desc) {
  if (!valid_xml_name(desc.service_name))
    throw CmxError(ErrorKind::validation,
                   "service name must be a valid XML name");
  if (desc.endpoint_url.rfind("http://", 0) != 0 &&
      desc.endpoint_url.rfind("https://", 0) != 0)
    throw CmxError(ErrorKind::validation, "endpoint URL must be absolute");
  if (desc.operations.empty())
    throw CmxError(ErrorKind::validation,
                   "descriptor needs at least one operation");
  for (const std::string& op : desc.operations)
    if (!valid_xml_name(op))
      throw CmxError(ErrorKind::validation,
                     "operation is not a valid XML name: " + op);

  const std::string& name = desc.service_name;
  std::string out(kDecl);
  out += "<wsdl:definitions name=\"" + name + "\" targetNamespace=\"urn:cmx:" +
         name + "\" xmlns:wsdl=\"http://schemas.xmlsoap.org/wsdl/\""
         " xmlns:soap=\"http://schemas.xmlsoap.org/wsdl/soap/\""
         " xmlns:tns=\"urn:cmx:" + name + "\">";
  for (const std::string& op : desc.operations) {
    out += "<wsdl:message name=\"" + op + "Request\"/>";
    out += "<wsdl:message name=\"" + op + "Response\"/>";
  }
  out += "<wsdl:portType name=\"" + name + "PortType\">";
  for (const std::string& op : desc.operations) {
    out += "<wsdl:operation name=\"" + op + "\">";
    out += "<wsdl:input message=\"tns:" + op + "Request\"/>";
    out += "<wsdl:output message=\"tns:" + op + "Response\"/>";
    out += "</wsdl:operation>";
  }
  out += "</wsdl:portType>";
  out += "<wsdl:binding name=\"" + name + "Binding\" type=\"tns:" + name +
         "PortType\">";
  out += "<soap:binding style=\"document\""
         " transport=\"http://schemas.xmlsoap.org/soap/http\"/>";
  for (const std::string& op : desc.operations) {
    out += "<wsdl:operation name=\"" + op + "\">";
    out += "<soap:operation soapAction=\"urn:cmx:" + name + "#" + op + "\"/>";
    out += "<wsdl:input><soap:body use=\"literal\"/></wsdl:input>";
    out += "<wsdl:output><soap:body use=\"literal\"/></wsdl:output>";
    out += "</wsdl:operation>";
  }
  out += "</wsdl:binding>";
  out += "<wsdl:service name=\"" + name + "\">";
  out += "<wsdl:port name=\"" + name + "Port\" binding=\"tns:" + name +
         "Binding\">";
  out += "<soap:address location=\"" + xml::escape(desc.endpoint_url) +
         "\"/>";
  out += "</wsdl:port></wsdl:service></wsdl:definitions>";
  return out;
}

std::string encode_base64(ByteView data) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= data.size(); i += 3) {
    const std::uint32_t n = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += kAlphabet[n & 63];
  }
  const std::size_t rest = data.size() - i;
  if (rest == 1) {
    const std::uint32_t n = data[i] << 16;
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t n = (data[i] << 16) | (data[i + 1] << 8);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += '=';
  }
  return out;
}

Bytes decode_base64(std::string_view text) {
  static const std::array<std::int8_t, 256> kInverse = [] {
    std::array<std::int8_t, 256> t{};
    t.fill(-1);
    const std::string_view alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    for (std::size_t i = 0; i < alphabet.size(); ++i)
      t[static_cast<unsigned char>(alphabet[i])] = static_cast<std::int8_t>(i);
    return t;
  }();

  if (text.size() % 4 != 0)
    throw CmxError(ErrorKind::base64_invalid,
                   "length must be a multiple of four");
  Bytes out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int pad = 0;
    std::uint32_t n = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=') {
        if (i + 4 != text.size() || k < 2)
          throw CmxError(ErrorKind::base64_invalid, "misplaced padding");
        ++pad;
        n <<= 6;
        continue;
      }
      if (pad > 0)
        throw CmxError(ErrorKind::base64_invalid, "data after padding");
      const std::int8_t v = kInverse[static_cast<unsigned char>(c)];
      if (v < 0)
        throw CmxError(ErrorKind::base64_invalid,
                       std::string("invalid character '") + c + "'");
      n = (n << 6) | static_cast<std::uint32_t>(v);
    }
    out.push_back(static_cast<std::uint8_t>(n >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(n >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(n));
  }
  return out;
}

std::string build_request(const SoapRequest& req) {
  if (!valid_xml_name(req.operation))
    throw CmxError(ErrorKind::validation,
                   "operation is not a valid XML name: " + req.operation);
  const std::string header = "<cmx:TransactionId>" +
                             std::to_string(req.transaction_id) +
                             "</cmx:TransactionId>";
  const std::string body = "<cmx:" + req.operation + "/>";
  return envelope_shell(header, body);
}

SoapRequest parse_request(std::string_view xml_text) {
  const xml::Node root = xml::parse(xml_text);
  const NsMap top = with_bindings(root, {});
  if (!is_name(root, top, kSoapNs, "Envelope"))
    missing("request is not a SOAP Envelope");
  SoapRequest req;
  const xml::Node* body = nullptr;
  for (const xml::Node& child : root.children) {
    const NsMap m = with_bindings(child, top);
    if (is_name(child, m, kSoapNs, "Header")) {
      for (const xml::Node& h : child.children) {
        const NsMap hm = with_bindings(h, m);
        if (is_name(h, hm, kCmxNs, "TransactionId"))
          req.transaction_id = parse_u64(h.text, "TransactionId");
      }
    } else if (is_name(child, m, kSoapNs, "Body")) {
      body = &child;
    }
  }
  if (body == nullptr || body->children.size() != 1)
    missing("request Body must contain exactly the operation element");
  req.operation = body->children.front().local_name();
  return req;
}

}  // namespace cmx::envelope

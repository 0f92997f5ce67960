#include "audreg/value.hpp"

#include <charconv>

#include "audreg/errors.hpp"

namespace audreg {

std::int64_t Value::payload() const {
  if (!present_) throw UsageError("bottom has no payload");
  return payload_;
}

std::string to_string(ProcessId p) { return std::to_string(p.index); }

std::string to_string(const Value& v) {
  return v.is_bottom() ? std::string(kBottomToken) : std::to_string(v.payload());
}

namespace {

std::int64_t parse_int(std::string_view text, std::string_view what) {
  std::int64_t out = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw InputError("invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
  return out;
}

}  // namespace

Value parse_value(std::string_view text) {
  if (text == kBottomToken) return Value::bottom();
  return Value::of(parse_int(text, "value"));
}

std::string to_string(const AuditSet& set) {
  std::string out = "{";
  bool first = true;
  for (const auto& [reader, value] : set) {
    if (!first) out += ',';
    first = false;
    out += '(' + to_string(reader) + ',' + to_string(value) + ')';
  }
  out += '}';
  return out;
}

AuditSet parse_audit_set(std::string_view text) {
  if (text.size() < 2 || text.front() != '{' || text.back() != '}') {
    throw InputError("invalid audit set '" + std::string(text) + "'");
  }
  AuditSet out;
  std::string_view body = text.substr(1, text.size() - 2);
  while (!body.empty()) {
    if (body.front() != '(') throw InputError("invalid audit set '" + std::string(text) + "'");
    const auto close = body.find(')');
    const auto comma = body.find(',');
    if (close == std::string_view::npos || comma == std::string_view::npos || comma > close) {
      throw InputError("invalid audit set '" + std::string(text) + "'");
    }
    const auto pid = parse_int(body.substr(1, comma - 1), "process id");
    if (pid < 0) throw InputError("negative process id in audit set");
    out.insert({ProcessId(static_cast<std::uint32_t>(pid)),
                parse_value(body.substr(comma + 1, close - comma - 1))});
    body.remove_prefix(close + 1);
    if (!body.empty()) {
      if (body.front() != ',') throw InputError("invalid audit set '" + std::string(text) + "'");
      body.remove_prefix(1);
    }
  }
  return out;
}

}  // namespace audreg

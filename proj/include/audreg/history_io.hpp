#pragma once

#include <istream>
#include <string>
#include <string_view>

#include "audreg/errors.hpp"
#include "audreg/history.hpp"

namespace audreg {

/// Line-delimited history format, one record per line:
///
///   object <id> initial <v> writer <p|-> readers <p,..|-> auditors <p,..|->
///   <seq> <process> <object> <op_id> inv|res write|read|audit <arg|-> <result|->
///   <seq> <process> <cell> <op_id|-> prim <primitive> <args> <result>
///
/// Values are integers or `_|_`; audit results are `{(p,v),...}`. Lines that
/// are blank or start with `#` are ignored, and `prim` records are skipped
/// when parsing a history.
class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

std::string format_event(const Event& e);
std::string format_object(ObjectId id, const ObjectRoles& roles);

/// Object metadata lines followed by one line per event.
std::string to_lines(const History& h);

/// Parses and validates. Throws ParseError naming the offending line.
History parse_history(std::istream& in);
History parse_history(std::string_view text);

}  // namespace audreg

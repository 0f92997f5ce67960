#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "audreg/scheduler.hpp"

namespace audreg {

/// Workload text format, one declaration per line, `#` starts a comment:
///
///   register 0 a4 initial 0 writer 0 readers 1,2 auditors 0
///   process 0: write 1; write 2; audit
///   process 1: read; read@1
///
/// `kind@object` targets a register other than 0. Throws ParseError.
Workload parse_workload(std::istream& in);
Workload parse_workload(std::string_view text);
std::string format_workload(const Workload& w);

/// Built-in workload `name` (demo, standard, large) for an algorithm tag;
/// mutant tags reuse the base algorithm's workload. Throws UsageError.
Workload builtin_workload(std::string_view tag, std::string_view name);
std::vector<std::string> builtin_workload_names();

}  // namespace audreg

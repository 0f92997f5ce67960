#include "audreg/history_io.hpp"

#include <charconv>
#include <sstream>
#include <vector>

namespace audreg {

namespace {

std::string format_process_set(const std::set<ProcessId>& ps) {
  if (ps.empty()) return "-";
  std::string out;
  for (auto p : ps) {
    if (!out.empty()) out += ',';
    out += to_string(p);
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::uint64_t parse_u64(std::string_view text, std::size_t line, std::string_view what) {
  std::uint64_t out = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ParseError(line, "invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
  return out;
}

ProcessId parse_pid(std::string_view text, std::size_t line) {
  const auto v = parse_u64(text, line, "process id");
  if (v > UINT32_MAX) throw ParseError(line, "process id out of range");
  return ProcessId(static_cast<std::uint32_t>(v));
}

std::set<ProcessId> parse_process_set(std::string_view text, std::size_t line) {
  std::set<ProcessId> out;
  if (text == "-") return out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.insert(parse_pid(text.substr(0, comma), line));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

void parse_object_line(const std::vector<std::string_view>& f, std::size_t line, History& h) {
  if (f.size() != 10 || f[2] != "initial" || f[4] != "writer" || f[6] != "readers" ||
      f[8] != "auditors") {
    throw ParseError(line, "malformed object record");
  }
  const auto id = parse_u64(f[1], line, "object id");
  ObjectRoles roles;
  try {
    roles.initial = parse_value(f[3]);
  } catch (const InputError& e) {
    throw ParseError(line, e.what());
  }
  if (f[5] != "-") roles.writer = parse_pid(f[5], line);
  roles.readers = parse_process_set(f[7], line);
  roles.auditors = parse_process_set(f[9], line);
  h.set_roles(static_cast<ObjectId>(id), std::move(roles));
}

Event parse_event_line(const std::vector<std::string_view>& f, std::size_t line) {
  if (f.size() != 8) {
    throw ParseError(line, "expected 8 fields, found " + std::to_string(f.size()));
  }
  Event e;
  e.seq = parse_u64(f[0], line, "sequence number");
  e.process = parse_pid(f[1], line);
  e.object = static_cast<ObjectId>(parse_u64(f[2], line, "object id"));
  e.op = parse_u64(f[3], line, "op id");
  if (f[4] == "inv") {
    e.phase = Phase::Invoke;
  } else if (f[4] == "res") {
    e.phase = Phase::Respond;
  } else {
    throw ParseError(line, "unknown phase '" + std::string(f[4]) + "'");
  }
  if (f[5] == "write") {
    e.kind = OpKind::Write;
  } else if (f[5] == "read") {
    e.kind = OpKind::Read;
  } else if (f[5] == "audit") {
    e.kind = OpKind::Audit;
  } else {
    throw ParseError(line, "unknown operation kind '" + std::string(f[5]) + "'");
  }
  try {
    if (f[6] != "-") e.argument = parse_value(f[6]);
    if (f[7] != "-") {
      if (f[7].front() == '{') {
        e.result = parse_audit_set(f[7]);
      } else {
        e.result = parse_value(f[7]);
      }
    }
  } catch (const ParseError&) {
    throw;
  } catch (const InputError& err) {
    throw ParseError(line, err.what());
  }
  return e;
}

}  // namespace

std::string format_event(const Event& e) {
  std::string result = std::visit(
      [](const auto& r) -> std::string {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "-";
        } else {
          return to_string(r);
        }
      },
      e.result);
  return std::to_string(e.seq) + ' ' + to_string(e.process) + ' ' + std::to_string(e.object) +
         ' ' + std::to_string(e.op) + ' ' + std::string(to_string(e.phase)) + ' ' +
         std::string(to_string(e.kind)) + ' ' + (e.argument ? to_string(*e.argument) : "-") + ' ' +
         result;
}

std::string format_object(ObjectId id, const ObjectRoles& roles) {
  return "object " + std::to_string(id) + " initial " + to_string(roles.initial) + " writer " +
         (roles.writer ? to_string(*roles.writer) : "-") + " readers " +
         format_process_set(roles.readers) + " auditors " + format_process_set(roles.auditors);
}

std::string to_lines(const History& h) {
  std::string out;
  for (const auto& [id, roles] : h.objects()) out += format_object(id, roles) + '\n';
  for (const auto& e : h.events()) out += format_event(e) + '\n';
  return out;
}

History parse_history(std::istream& in) {
  History h;
  std::string raw;
  std::size_t line = 0;
  bool seen_event = false;
  while (std::getline(in, raw)) {
    ++line;
    const auto fields = split_ws(raw);
    if (fields.empty() || fields.front().front() == '#') continue;
    if (fields.front() == "object") {
      if (seen_event) throw ParseError(line, "object records must precede events");
      parse_object_line(fields, line, h);
      continue;
    }
    if (fields.size() > 4 && fields[4] == "prim") continue;
    h.append(parse_event_line(fields, line));
    seen_event = true;
  }
  try {
    h.validate();
  } catch (const ParseError&) {
    throw;
  } catch (const InputError& e) {
    throw ParseError(line, e.what());
  }
  return h;
}

History parse_history(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_history(in);
}

}  // namespace audreg

#include "audreg/workload.hpp"

#include <charconv>
#include <sstream>

#include "audreg/errors.hpp"
#include "audreg/history_io.hpp"

namespace audreg {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto at = s.find(sep);
    out.push_back(trim(s.substr(0, at)));
    if (at == std::string_view::npos) break;
    s.remove_prefix(at + 1);
  }
  return out;
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  for (auto w : split(trim(s), ' ')) {
    if (!w.empty()) out.push_back(w);
  }
  return out;
}

std::uint32_t parse_u32(std::string_view text, std::size_t line, std::string_view what) {
  std::uint32_t out = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ParseError(line, "invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
  return out;
}

std::vector<ProcessId> parse_pids(std::string_view text, std::size_t line) {
  std::vector<ProcessId> out;
  if (text == "-") return out;
  for (auto item : split(text, ',')) out.emplace_back(parse_u32(item, line, "process id"));
  return out;
}

std::string join_pids(const auto& ps) {
  if (ps.empty()) return "-";
  std::string out;
  for (auto p : ps) {
    if (!out.empty()) out += ',';
    out += to_string(p);
  }
  return out;
}

RegisterConfig parse_register(const std::vector<std::string_view>& f, std::size_t line) {
  // register <id> <tag> initial <v> writer <p> readers <list> auditors <list>
  if (f.size() != 11 || f[3] != "initial" || f[5] != "writer" || f[7] != "readers" || f[9] != "auditors") {
    throw ParseError(line, "malformed register declaration");
  }
  RegisterConfig cfg;
  try {
    std::tie(cfg.algorithm, cfg.mutant) = parse_algorithm_tag(f[2]);
    cfg.initial = parse_value(f[4]);
  } catch (const std::exception& e) {
    throw ParseError(line, e.what());
  }
  cfg.writer = ProcessId(parse_u32(f[6], line, "process id"));
  cfg.readers = parse_pids(f[8], line);
  for (auto p : parse_pids(f[10], line)) cfg.auditors.insert(p);
  return cfg;
}

ScriptedOp parse_op(std::string_view text, std::size_t line) {
  const auto f = words(text);
  if (f.empty() || f.size() > 2) throw ParseError(line, "malformed operation '" + std::string(text) + "'");
  ScriptedOp op;
  std::string_view kind = f[0];
  if (const auto at = kind.find('@'); at != std::string_view::npos) {
    op.object = parse_u32(kind.substr(at + 1), line, "object id");
    kind = kind.substr(0, at);
  }
  if (kind == "write") {
    op.kind = OpKind::Write;
    if (f.size() != 2) throw ParseError(line, "write needs a value");
    try {
      op.argument = parse_value(f[1]);
    } catch (const std::exception& e) {
      throw ParseError(line, e.what());
    }
  } else if (kind == "read" || kind == "audit") {
    op.kind = kind == "read" ? OpKind::Read : OpKind::Audit;
    if (f.size() != 1) throw ParseError(line, std::string(kind) + " takes no argument");
  } else {
    throw ParseError(line, "unknown operation '" + std::string(kind) + "'");
  }
  return op;
}

}  // namespace

Workload parse_workload(std::istream& in) {
  Workload w;
  std::map<ObjectId, RegisterConfig> regs;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view text = raw;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    if (text.starts_with("register ")) {
      const auto f = words(text);
      const ObjectId id = parse_u32(f.size() > 1 ? f[1] : "", line, "object id");
      if (!regs.emplace(id, parse_register(f, line)).second) {
        throw ParseError(line, "register " + std::to_string(id) + " declared twice");
      }
    } else if (text.starts_with("process ")) {
      const auto colon = text.find(':');
      if (colon == std::string_view::npos) throw ParseError(line, "process declaration needs ':'");
      ProcessScript script;
      script.process = ProcessId(parse_u32(trim(text.substr(8, colon - 8)), line, "process id"));
      const auto body = trim(text.substr(colon + 1));
      if (!body.empty()) {
        for (auto item : split(body, ';')) {
          if (!item.empty()) script.ops.push_back(parse_op(item, line));
        }
      }
      w.scripts.push_back(std::move(script));
    } else {
      throw ParseError(line, "expected 'register' or 'process'");
    }
  }
  ObjectId expect = 0;
  for (auto& [id, cfg] : regs) {
    if (id != expect++) throw ParseError(line, "register ids must be 0,1,2,... without gaps");
    w.registers.push_back(std::move(cfg));
  }
  if (w.registers.empty()) throw ParseError(line, "workload declares no register");
  try {
    w.validate();
  } catch (const std::exception& e) {
    throw ParseError(line, e.what());
  }
  return w;
}

Workload parse_workload(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_workload(in);
}

std::string format_workload(const Workload& w) {
  std::string out;
  for (std::size_t i = 0; i < w.registers.size(); ++i) {
    const auto& r = w.registers[i];
    out += "register " + std::to_string(i) + ' ' + algorithm_tag(r.algorithm, r.mutant) + " initial " +
           to_string(r.initial) + " writer " + to_string(r.writer) + " readers " + join_pids(r.readers) +
           " auditors " + join_pids(r.auditors) + '\n';
  }
  for (const auto& s : w.scripts) {
    out += "process " + to_string(s.process) + ':';
    bool first = true;
    for (const auto& op : s.ops) {
      out += first ? " " : "; ";
      first = false;
      out += to_string(op.kind);
      if (op.object != 0) out += '@' + std::to_string(op.object);
      if (op.argument) out += ' ' + to_string(*op.argument);
    }
    out += '\n';
  }
  return out;
}

namespace {

// Built-in workloads, indexed by algorithm and size.
constexpr std::string_view kBuiltins[5][3] = {
    // A3: single reader p1, writer p0 audits.
    {
        "register 0 a3 initial 0 writer 0 readers 1 auditors 0\n"
        "process 0: write 1; audit\n"
        "process 1: read\n",
        "register 0 a3 initial 0 writer 0 readers 1 auditors 0\n"
        "process 0: write 1; write 2; audit\n"
        "process 1: read; read; read\n",
        // Two registers, so the writer takes steps between a write and
        // its audit and a read can slip in between.
        "register 0 a3 initial 0 writer 0 readers 1 auditors 0\n"
        "register 1 a3 initial 0 writer 1 readers 0 auditors 1\n"
        "process 0: write 1; read@1; audit; write 2; read@1; audit\n"
        "process 1: read; write@1 5; read; audit@1; read; write@1 6\n",
    },
    // A4: readers p1 (bit 0) and p2 (bit 1).
    {
        "register 0 a4 initial 0 writer 0 readers 1,2 auditors 0\n"
        "process 0: write 1; audit\n"
        "process 1: read\n"
        "process 2: read\n",
        "register 0 a4 initial 0 writer 0 readers 1,2 auditors 0\n"
        "process 0: write 1; write 2; audit\n"
        "process 1: read; read\n"
        "process 2: read\n",
        "register 0 a4 initial 0 writer 0 readers 1,2 auditors 0\n"
        "process 0: write 1; audit; write 2; write 3; audit\n"
        "process 1: read; read; read; read\n"
        "process 2: read; read; read\n",
    },
    // A5: reader p1, auditors p0 and p2.
    {
        "register 0 a5 initial 0 writer 0 readers 1 auditors 0,2\n"
        "process 0: write 1\n"
        "process 1: read\n"
        "process 2: audit\n",
        "register 0 a5 initial 0 writer 0 readers 1 auditors 0,2\n"
        "process 0: write 1; write 2\n"
        "process 1: read; read\n"
        "process 2: audit; audit\n",
        "register 0 a5 initial 0 writer 0 readers 1 auditors 0,2\n"
        "process 0: write 1; write 2; audit; write 3\n"
        "process 1: read; read; read; read\n"
        "process 2: audit; audit; audit; audit\n",
    },
    // A6: readers p1, p2; auditors p0 and p3.
    {
        "register 0 a6 initial 0 writer 0 readers 1,2 auditors 0,3\n"
        "process 0: write 1\n"
        "process 1: read\n"
        "process 3: audit\n",
        "register 0 a6 initial 0 writer 0 readers 1,2 auditors 0,3\n"
        "process 0: write 1; write 2\n"
        "process 1: read; read\n"
        "process 2: read\n"
        "process 3: audit\n",
        "register 0 a6 initial 0 writer 0 readers 1,2 auditors 0,3\n"
        "process 0: write 1; write 2; write 3\n"
        "process 1: read; read; read\n"
        "process 2: read; read; read\n"
        "process 3: audit; audit; audit\n",
    },
    // A7: readers p1, p2; auditors p0 and p3.
    {
        "register 0 a7 initial 0 writer 0 readers 1 auditors 0\n"
        "process 0: write 1; audit\n"
        "process 1: read\n",
        "register 0 a7 initial 0 writer 0 readers 1,2 auditors 0,3\n"
        "process 0: write 1; write 2\n"
        "process 1: read\n"
        "process 2: read\n"
        "process 3: audit; audit\n",
        "register 0 a7 initial 0 writer 0 readers 1,2 auditors 0,3\n"
        "process 0: write 1; write 2; write 3\n"
        "process 1: read; read; read\n"
        "process 2: read; read; read\n"
        "process 3: audit; audit; audit\n",
    },
};

}  // namespace

std::vector<std::string> builtin_workload_names() { return {"demo", "standard", "large"}; }

Workload builtin_workload(std::string_view tag, std::string_view name) {
  const auto [algorithm, mutant] = parse_algorithm_tag(tag);
  std::size_t size = 0;
  if (name == "demo") {
    size = 0;
  } else if (name == "standard") {
    size = 1;
  } else if (name == "large") {
    size = 2;
  } else {
    throw UsageError("unknown workload '" + std::string(name) + "' (demo, standard, large)");
  }
  Workload w = parse_workload(kBuiltins[static_cast<std::size_t>(algorithm)][size]);
  for (auto& r : w.registers) r.mutant = mutant;
  w.validate();
  return w;
}

}  // namespace audreg

// audreg: run workloads, explore schedules, check histories and run
// consensus campaigns. Exit codes: 0 ok, 1 violation found, 2 usage error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_map>

#include "audreg/checker.hpp"
#include "audreg/consensus.hpp"
#include "audreg/errors.hpp"
#include "audreg/history_io.hpp"
#include "audreg/workload.hpp"

namespace {

using namespace audreg;

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

struct WorkloadFlags {
  std::string algorithm = "a3";
  std::string script = "standard";
  std::string workload_file;
};

void add_workload_flags(CLI::App* cmd, WorkloadFlags& f, const std::string& default_script) {
  f.script = default_script;
  cmd->add_option("--algorithm,-a", f.algorithm, "a3..a7 or a mutant such as a4-mutant-nobitreset")
      ->capture_default_str();
  cmd->add_option("--script", f.script, "built-in workload: demo, standard, large")->capture_default_str();
  cmd->add_option("--workload", f.workload_file, "workload description file (overrides --algorithm/--script)");
}

Workload load_workload(const WorkloadFlags& f) {
  if (f.workload_file.empty()) return builtin_workload(f.algorithm, f.script);
  std::ifstream in(f.workload_file);
  if (!in) throw UsageError("cannot open " + f.workload_file);
  return parse_workload(in);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::uint32_t parse_index(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoul(text, &used);
    if (used != text.size() || v > UINT32_MAX) throw std::invalid_argument(text);
    return static_cast<std::uint32_t>(v);
  } catch (const std::exception&) {
    throw UsageError(std::string("invalid ") + what + " '" + text + "'");
  }
}

Definition definition_for(const Workload& w) {
  for (const auto& r : w.registers) {
    if (r.algorithm == Algorithm::A7) return Definition::RegularAudit;
  }
  return Definition::AtomicAudit;
}

std::string format_text(const Simulation& sim) {
  std::ostringstream out;
  const auto& h = sim.history();
  for (const auto& [id, roles] : h.objects()) {
    out << "object " << id << ": " << to_string(sim.register_at(id).config().algorithm) << " initial "
        << to_string(roles.initial) << '\n';
  }
  for (const auto& op : h.operations()) {
    std::string call(to_string(op.kind));
    if (op.argument) call += "(" + to_string(*op.argument) + ")";
    if (h.objects().size() > 1) call += "@" + std::to_string(op.object);
    out << "op " << op.id << "  p" << to_string(op.process) << "  " << call << "  [" << op.invoked_at << ", "
        << (op.complete() ? std::to_string(*op.responded_at) : "-") << "]  ";
    if (!op.complete()) {
      out << "pending";
    } else if (op.kind == OpKind::Read) {
      out << "-> " << to_string(op.read_value());
    } else if (op.kind == OpKind::Audit) {
      out << "-> " << to_string(op.audit_value());
    } else {
      out << "-> ok";
    }
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------

struct RunFlags {
  WorkloadFlags workload;
  std::optional<std::uint64_t> seed;
  std::string schedule;
  std::vector<std::string> crashes;
  bool trace = false;
  std::string format = "lines";
};

int cmd_run(const RunFlags& f) {
  const Workload w = load_workload(f.workload);
  w.validate();
  auto sim = instantiate(w);
  if (!f.schedule.empty()) {
    Schedule s;
    for (const auto& item : split_list(f.schedule)) s.order.emplace_back(parse_index(item, "process"));
    for (const auto& c : f.crashes) {
      const auto at = c.find('@');
      if (at == std::string::npos) throw UsageError("crash points look like <process>@<steps>");
      s.crashes.push_back({ProcessId(parse_index(c.substr(0, at), "process")), parse_index(c.substr(at + 1), "step")});
    }
    run(*sim, s);
  } else if (!f.crashes.empty()) {
    throw UsageError("--crash needs an explicit --schedule");
  } else if (f.seed) {
    run_random(*sim, *f.seed);
  } else {
    run_round_robin(*sim);
  }
  std::cout << (f.format == "text" ? format_text(*sim) : sim->dump(f.trace));
  return kOk;
}

// ---------------------------------------------------------------------------

struct ExploreFlags {
  WorkloadFlags workload;
  bool random = false;
  std::uint64_t seed = 1;
  std::size_t count = 1000;
  std::size_t max_schedules = 1'000'000;
  std::size_t step_bound = 512;
  bool crash = false;
  std::size_t max_crashes = 1;
  std::optional<std::size_t> preemption_bound;
  std::string definition;
};

/// Extra structural checks on one run besides the history verdict.
std::optional<std::string> structural_problem(const Simulation& sim) {
  for (std::size_t i = 0; i < sim.register_count(); ++i) {
    const auto& reg = sim.register_at(static_cast<ObjectId>(i));
    if (reg.config().mutant != Mutant::None || !reg.word_cell()) continue;
    const auto& cell = sim.memory().cell(*reg.word_cell());
    if (reg.config().algorithm == Algorithm::A4 || reg.config().algorithm == Algorithm::A6) {
      if (auto msg = check_reader_bits(cell, *reg.codec(), reg.config())) return "object " + std::to_string(i) + ": " + *msg;
    }
    if (reg.config().algorithm == Algorithm::A6) {
      for (const auto& [op, fails] : cas_failures_by_op(cell)) {
        if (fails > reg.reader_count()) {
          return "object " + std::to_string(i) + ": write " + std::to_string(op) + " failed compare&swap " +
                 std::to_string(fails) + " times";
        }
      }
    }
  }
  return std::nullopt;
}

int cmd_explore(const ExploreFlags& f) {
  if (f.max_schedules == 0) throw UsageError("--max-schedules must be at least 1");
  const Workload w = load_workload(f.workload);
  const Definition def = f.definition.empty() ? definition_for(w) : parse_definition(f.definition);
  const auto factory = make_factory(w);

  std::unordered_map<std::string, bool> cache;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t distinct = 0;
  std::optional<std::string> report;
  const RunVisitor visit = [&](const RunRecord& run) {
    const std::string lines = to_lines(run.sim.history());
    auto it = cache.find(lines);
    std::optional<Verdict> verdict;
    if (it == cache.end()) {
      verdict = check(run.sim.history(), def);
      it = cache.emplace(lines, verdict->accepted).first;
      ++distinct;
    }
    std::optional<std::string> structural = structural_problem(run.sim);
    if (it->second && !structural) {
      ++accepted;
      return true;
    }
    ++rejected;
    if (!verdict) verdict = check(run.sim.history(), def);
    std::ostringstream out;
    out << "counterexample at schedule " << run.index << ":";
    for (const auto& c : run.choices) out << (c.crash ? " crash:" : " ") << to_string(c.process);
    out << '\n';
    if (!verdict->accepted) {
      out << format_verdict(*verdict, def) << '\n' << "# " << verdict->violation->detail << '\n';
    }
    if (structural) out << "# invariant: " << *structural << '\n';
    out << run.sim.dump();
    report = out.str();
    return false;
  };

  if (f.random) {
    RandomOptions opts;
    opts.step_bound = f.step_bound;
    opts.crash_probability = f.crash ? 0.02 : 0.0;
    opts.max_crashes = f.max_crashes;
    explore_random(factory, f.seed, std::min(f.count, f.max_schedules), opts, visit);
  } else {
    ExploreOptions opts;
    opts.step_bound = f.step_bound;
    opts.crashes = f.crash;
    opts.max_crashes = f.max_crashes;
    opts.preemption_bound = f.preemption_bound;
    opts.max_runs = f.max_schedules;
    explore_exhaustive(factory, opts, visit);
  }
  std::cout << "schedules: " << accepted + rejected << " distinct-histories: " << distinct
            << " accepted: " << accepted << " rejected: " << rejected << " definition: " << static_cast<int>(def)
            << '\n';
  if (report) {
    std::cout << *report;
    return kViolation;
  }
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_check(const std::string& file, const std::string& definition, bool oracle) {
  const Definition def = parse_definition(definition);
  History h;
  if (file == "-") {
    h = parse_history(std::cin);
  } else {
    std::ifstream in(file);
    if (!in) throw UsageError("cannot open " + file);
    h = parse_history(in);
  }
  const Verdict v = oracle ? brute_force_oracle(h, def) : check(h, def);
  std::cout << format_verdict(v, def) << '\n';
  if (!v.accepted) {
    std::cout << "# " << v.violation->detail << '\n';
    return kViolation;
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct ConsensusFlags {
  bool two = false;
  std::optional<std::size_t> n;
  std::string inputs;
  std::string backend;
  bool exhaustive = false;
  std::uint64_t seed = 1;
  std::size_t count = 10'000;
  std::size_t crashes = 1;
  std::optional<std::size_t> preemption_bound;
  std::size_t step_bound = 4096;
};

int cmd_consensus(const ConsensusFlags& f) {
  const std::size_t n = f.two ? 2 : f.n.value_or(3);
  if (f.two && f.n && *f.n != 2) throw UsageError("--two pairs exactly 2 processes");
  if (n < 1) throw UsageError("--n must be at least 1");
  std::vector<Value> inputs;
  if (f.inputs.empty()) {
    for (std::size_t i = 0; i < n; ++i) inputs.push_back(Value::of(static_cast<std::int64_t>(((i + 1) * 37) % 101)));
  } else {
    for (const auto& item : split_list(f.inputs)) inputs.push_back(parse_value(item));
    if (inputs.size() != n) throw UsageError("expected " + std::to_string(n) + " inputs");
  }
  ConsensusConfig config;
  auto backend = parse_algorithm_tag(f.backend.empty() ? (f.two ? "a5" : "a6") : f.backend);
  if (!f.two && !f.backend.empty() && backend.first != Algorithm::A6) {
    throw UsageError("the n-process protocol runs over a6 registers");
  }
  if (f.two) {
    config = two_process_config(inputs[0], inputs[1], backend.first);
  } else {
    config = n_process_config(inputs);
  }
  config.mutant = backend.second;
  config.validate();

  ConsensusTally t;
  std::string mode;
  if (f.exhaustive) {
    ExploreOptions opts;
    opts.step_bound = f.step_bound;
    opts.crashes = f.crashes > 0;
    opts.max_crashes = f.crashes;
    opts.preemption_bound = f.preemption_bound;
    if (!f.two && !opts.preemption_bound) opts.preemption_bound = 2;
    t = consensus_exhaustive(config, opts);
    mode = "exhaustive";
    if (opts.preemption_bound) mode += " preemption-bound=" + std::to_string(*opts.preemption_bound);
  } else {
    if (f.count == 0) throw UsageError("--count must be at least 1");
    RandomOptions opts;
    opts.step_bound = f.step_bound;
    opts.crash_probability = f.crashes > 0 ? 0.02 : 0.0;
    opts.max_crashes = f.crashes;
    t = consensus_random(config, f.seed, f.count, opts);
    mode = "random seed=" + std::to_string(f.seed);
  }
  std::cout << "protocol: " << (f.two ? "two-process" : "n-process") << " n=" << n << " backend "
            << to_string(config.backend) << " inputs";
  for (const auto& v : inputs) std::cout << ' ' << to_string(v);
  std::cout << "\nmode: " << mode << "\nruns: " << t.runs << " (with a crash: " << t.crashed_runs << ")\n"
            << "agreement: " << t.agreement_violations << "\nvalidity: " << t.validity_violations
            << "\ntermination: " << t.termination_violations << "\nsafe-values: " << t.safe_values_mismatches
            << "\nviolations: " << t.violations() << '\n';
  if (t.first_violation) {
    std::cout << *t.first_violation;
    return kViolation;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Auditable register simulator, checker and consensus harness"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "Run one workload under one schedule and print its history");
  add_workload_flags(run_cmd, run_flags.workload, "demo");
  run_cmd->add_option("--seed", run_flags.seed, "random schedule seed (default: round robin)");
  run_cmd->add_option("--schedule", run_flags.schedule, "comma-separated process ids, one per step");
  run_cmd->add_option("--crash", run_flags.crashes, "crash point <process>@<steps> (with --schedule)");
  run_cmd->add_flag("--trace", run_flags.trace, "include primitive records");
  run_cmd->add_option("--format", run_flags.format, "lines or text")
      ->check(CLI::IsMember({"lines", "text"}))
      ->capture_default_str();

  ExploreFlags ex;
  auto* explore_cmd = app.add_subcommand("explore", "Explore schedules and check every history");
  add_workload_flags(explore_cmd, ex.workload, "standard");
  explore_cmd->add_flag("--exhaustive", "enumerate every interleaving (default)");
  explore_cmd->add_flag("--random", ex.random, "seeded random schedules instead");
  explore_cmd->add_option("--seed", ex.seed, "seed for --random")->capture_default_str();
  explore_cmd->add_option("--count", ex.count, "schedules for --random")->capture_default_str();
  explore_cmd->add_option("--max-schedules", ex.max_schedules, "refuse to explore more schedules than this")
      ->capture_default_str();
  explore_cmd->add_option("--step-bound", ex.step_bound, "primitive steps per schedule")->capture_default_str();
  explore_cmd->add_flag("--crash", ex.crash, "inject process crashes");
  explore_cmd->add_option("--max-crashes", ex.max_crashes, "crashes per schedule")->capture_default_str();
  explore_cmd->add_option("--preemption-bound", ex.preemption_bound, "limit context switches (exhaustive)");
  explore_cmd->add_option("--definition", ex.definition, "1 or 2 (default: 2 for a7, else 1)");

  std::string check_file;
  std::string check_def = "1";
  bool check_oracle = false;
  auto* check_cmd = app.add_subcommand("check", "Check a history file ('-' for stdin)");
  check_cmd->add_option("file", check_file, "history in the line format")->required();
  check_cmd->add_option("--definition", check_def, "1 (atomic audit) or 2 (regular audit)")->capture_default_str();
  check_cmd->add_flag("--oracle", check_oracle, "use the brute-force oracle (at most 8 operations)");

  ConsensusFlags cf;
  auto* cons_cmd = app.add_subcommand("consensus", "Run a consensus campaign");
  cons_cmd->add_flag("--two", cf.two, "two-process protocol over a5/a3 registers");
  cons_cmd->add_option("--n", cf.n, "process count for the n-process protocol over a6 registers");
  cons_cmd->add_option("--inputs", cf.inputs, "comma-separated distinct proposals");
  cons_cmd->add_option("--backend", cf.backend, "registers: a5 or a3 with --two (default a5), a6 otherwise; mutants allowed");
  cons_cmd->add_flag("--exhaustive", cf.exhaustive, "enumerate schedules (bounded by preemptions for --n)");
  cons_cmd->add_option("--seed", cf.seed, "seed for random schedules")->capture_default_str();
  cons_cmd->add_option("--count", cf.count, "random schedules")->capture_default_str();
  cons_cmd->add_option("--crashes", cf.crashes, "maximum crashed processes per schedule")->capture_default_str();
  cons_cmd->add_option("--preemption-bound", cf.preemption_bound, "context switch limit for --exhaustive");
  cons_cmd->add_option("--step-bound", cf.step_bound, "primitive steps per schedule")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run_flags);
    if (*explore_cmd) return cmd_explore(ex);
    if (*check_cmd) return cmd_check(check_file, check_def, check_oracle);
    if (*cons_cmd) return cmd_consensus(cf);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const BoundExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

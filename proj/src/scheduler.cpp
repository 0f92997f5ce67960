#include "audreg/scheduler.hpp"

#include <algorithm>
#include <random>

#include "audreg/errors.hpp"
#include "audreg/history_io.hpp"

namespace audreg {

Simulation::Simulation(unsigned width_guard_bits)
    : memory_(clock_, width_guard_bits), recorder_(clock_) {}

Simulation::~Simulation() {
  // Coroutine frames go first; they refer to contexts and registers.
  for (auto& s : slots_) s.task = Task<void>();
}

AuditableRegister& Simulation::add_register(RegisterConfig config) {
  const auto id = static_cast<ObjectId>(registers_.size());
  recorder_.set_roles(id, config.roles());
  registers_.push_back(make_register(id, std::move(config), memory_));
  return *registers_.back();
}

void Simulation::add_process(ProcessId id, Program program) {
  for (const auto& s : slots_) {
    if (s.id == id) throw UsageError("duplicate process " + to_string(id));
  }
  Slot s;
  s.id = id;
  s.program = std::move(program);
  s.ctx = std::make_unique<ProcessContext>(id, memory_, recorder_);
  slots_.push_back(std::move(s));
}

Simulation::Slot& Simulation::slot(ProcessId p) {
  for (auto& s : slots_) {
    if (s.id == p) return s;
  }
  throw UsageError("unknown process " + to_string(p));
}

const Simulation::Slot& Simulation::slot(ProcessId p) const {
  return const_cast<Simulation*>(this)->slot(p);
}

std::vector<ProcessId> Simulation::processes() const {
  std::vector<ProcessId> out;
  for (const auto& s : slots_) out.push_back(s.id);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ProcessId> Simulation::enabled() const {
  std::vector<ProcessId> out;
  for (const auto& s : slots_) {
    if (!s.crashed && !(s.started && s.task.done())) out.push_back(s.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool Simulation::finished(ProcessId p) const {
  const auto& s = slot(p);
  return s.started && s.task.done();
}

bool Simulation::crashed(ProcessId p) const { return slot(p).crashed; }
bool Simulation::started(ProcessId p) const { return slot(p).started; }
std::size_t Simulation::steps_taken(ProcessId p) const { return slot(p).steps; }

StepOutcome Simulation::step(ProcessId p) {
  auto& s = slot(p);
  if (s.crashed) throw UsageError("process " + to_string(p) + " has crashed");
  if (s.started && s.task.done()) throw UsageError("process " + to_string(p) + " has finished");

  s.ctx->responded_flag = false;
  if (!s.started) {
    s.started = true;
    s.task = s.program(*s.ctx);
    // Local computation up to the first primitive.
    s.task.resume();
  }
  if (!s.task.done()) {
    auto parked = s.ctx->take_parked();
    if (!parked) throw UsageError("process " + to_string(p) + " is not parked at a primitive");
    parked.resume();
  }
  ++s.steps;
  ++total_steps_;
  if (s.task.done()) {
    s.task.rethrow_if_failed();
    return StepOutcome::Finished;
  }
  return s.ctx->responded_flag ? StepOutcome::Responded : StepOutcome::Continue;
}

void Simulation::crash(ProcessId p) {
  auto& s = slot(p);
  if (s.crashed) throw UsageError("process " + to_string(p) + " already crashed");
  if (s.started && s.task.done()) throw UsageError("process " + to_string(p) + " has finished");
  s.crashed = true;
}

std::string Simulation::dump(bool with_trace) const {
  const auto& h = history();
  std::string out;
  for (const auto& [id, roles] : h.objects()) out += format_object(id, roles) + '\n';
  if (!with_trace) {
    for (const auto& e : h.events()) out += format_event(e) + '\n';
    return out;
  }
  const auto prims = memory_.trace();
  std::size_t i = 0;
  std::size_t j = 0;
  const auto& events = h.events();
  while (i < events.size() || j < prims.size()) {
    if (j == prims.size() || (i < events.size() && events[i].seq < prims[j].seq)) {
      out += format_event(events[i++]) + '\n';
    } else {
      out += format_primitive(prims[j++]) + '\n';
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

void Workload::validate() const {
  for (const auto& r : registers) r.validate();
  std::set<ProcessId> seen;
  std::map<ObjectId, std::set<Value>> written;
  for (const auto& script : scripts) {
    if (!seen.insert(script.process).second) {
      throw UsageError("duplicate script for process " + to_string(script.process));
    }
    for (const auto& op : script.ops) {
      if (op.object >= registers.size()) {
        throw UsageError("script references unknown object " + std::to_string(op.object));
      }
      const auto& cfg = registers[op.object];
      const auto p = script.process;
      switch (op.kind) {
        case OpKind::Write:
          if (p != cfg.writer) throw UsageError("process " + to_string(p) + " is not the writer");
          if (!op.argument || op.argument->is_bottom()) throw UsageError("writes need a non-bottom value");
          if (*op.argument == cfg.initial || !written[op.object].insert(*op.argument).second) {
            throw UsageError("written values must be distinct (value " + to_string(*op.argument) + ")");
          }
          break;
        case OpKind::Read:
          if (std::find(cfg.readers.begin(), cfg.readers.end(), p) == cfg.readers.end()) {
            throw UsageError("process " + to_string(p) + " is not a reader");
          }
          break;
        case OpKind::Audit:
          if (!cfg.auditors.contains(p)) throw UsageError("process " + to_string(p) + " is not an auditor");
          break;
      }
    }
  }
}

std::size_t Workload::operation_count() const {
  std::size_t n = 0;
  for (const auto& s : scripts) n += s.ops.size();
  return n;
}

namespace {

Task<void> run_script(ProcessContext& ctx, std::vector<AuditableRegister*> regs,
                      std::vector<ScriptedOp> ops) {
  for (const auto& op : ops) {
    AuditableRegister& reg = *regs.at(op.object);
    if (op.kind == OpKind::Write) {
      co_await reg.write(ctx, *op.argument);
    } else if (op.kind == OpKind::Read) {
      Value ignored = co_await reg.read(ctx);
      (void)ignored;
    } else {
      AuditSet ignored = co_await reg.audit(ctx);
      (void)ignored;
    }
  }
}

}  // namespace

std::unique_ptr<Simulation> instantiate(const Workload& w) {
  auto sim = std::make_unique<Simulation>();
  std::vector<AuditableRegister*> regs;
  for (const auto& cfg : w.registers) regs.push_back(&sim->add_register(cfg));
  for (const auto& script : w.scripts) {
    sim->add_process(script.process, [regs, ops = script.ops](ProcessContext& ctx) {
      return run_script(ctx, regs, ops);
    });
  }
  return sim;
}

SimulationFactory make_factory(const Workload& w) {
  w.validate();
  return [w] { return instantiate(w); };
}

// ---------------------------------------------------------------------------

namespace {

void apply_due_crashes(Simulation& sim, const Schedule& schedule) {
  for (const auto& c : schedule.crashes) {
    if (!sim.crashed(c.process) && !sim.finished(c.process) &&
        sim.steps_taken(c.process) == c.after_steps) {
      sim.crash(c.process);
    }
  }
}

}  // namespace

void run(Simulation& sim, const Schedule& schedule) {
  for (auto p : schedule.order) {
    apply_due_crashes(sim, schedule);
    sim.step(p);
  }
  apply_due_crashes(sim, schedule);
}

History run(const Workload& w, const Schedule& schedule) {
  w.validate();
  auto sim = instantiate(w);
  run(*sim, schedule);
  return sim->history();
}

void run_round_robin(Simulation& sim) {
  const auto all = sim.processes();
  bool progressed = true;
  while (progressed) {
    progressed = false;
    for (auto p : all) {
      if (sim.crashed(p) || sim.finished(p)) continue;
      sim.step(p);
      progressed = true;
    }
  }
}

void run_random(Simulation& sim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto en = sim.enabled(); !en.empty(); en = sim.enabled()) {
    sim.step(en[rng() % en.size()]);
  }
}

namespace {

struct PathState {
  std::size_t crashes = 0;
  std::size_t preemptions = 0;
  // process that took the previous step, if still relevant
  bool has_last = false;
  ProcessId last;
  std::size_t depth = 0;
};

std::vector<Choice> options_at(const Simulation& sim, const ExploreOptions& opt, const PathState& st) {
  std::vector<Choice> out;
  const auto en = sim.enabled();
  const bool last_enabled = st.has_last && std::find(en.begin(), en.end(), st.last) != en.end();
  for (auto p : en) {
    const bool preempts = last_enabled && p != st.last;
    if (preempts && opt.preemption_bound && st.preemptions >= *opt.preemption_bound) continue;
    out.push_back({p, false});
  }
  if (opt.crashes && st.crashes < opt.max_crashes) {
    for (auto p : en) {
      const bool fresh_start = st.depth == 0;
      const bool just_stepped = st.has_last && st.last == p;
      if (fresh_start || just_stepped) out.push_back({p, true});
    }
  }
  return out;
}

void apply_choice(Simulation& sim, const Choice& c, PathState& st, std::size_t step_bound) {
  if (c.crash) {
    sim.crash(c.process);
    ++st.crashes;
    if (st.has_last && st.last == c.process) st.has_last = false;
  } else {
    const auto en = sim.enabled();
    if (st.has_last && st.last != c.process && std::find(en.begin(), en.end(), st.last) != en.end()) {
      ++st.preemptions;
    }
    sim.step(c.process);
    st.last = c.process;
    st.has_last = true;
    if (sim.total_steps() > step_bound) {
      throw BoundExceeded("run exceeded the step bound of " + std::to_string(step_bound));
    }
  }
  ++st.depth;
}

}  // namespace

std::size_t explore_exhaustive(const SimulationFactory& factory, const ExploreOptions& options,
                               const RunVisitor& visit) {
  struct Frame {
    std::vector<Choice> options;
    std::size_t pick = 0;
  };
  std::vector<Frame> path;
  std::size_t runs = 0;
  while (true) {
    if (options.max_runs && runs >= *options.max_runs) {
      throw BoundExceeded("exhaustive exploration needs more than " + std::to_string(*options.max_runs) +
                          " runs");
    }
    auto sim = factory();
    PathState st;
    std::vector<Choice> taken;
    while (true) {
      auto opts = options_at(*sim, options, st);
      if (opts.empty()) break;
      if (st.depth < path.size()) {
        if (path[st.depth].options != opts) throw UsageError("simulation is not deterministic under replay");
      } else {
        path.push_back({std::move(opts), 0});
      }
      const Choice c = path[st.depth].options[path[st.depth].pick];
      taken.push_back(c);
      apply_choice(*sim, c, st, options.step_bound);
    }
    const bool keep_going = visit(RunRecord{*sim, taken, runs});
    ++runs;
    if (!keep_going) break;
    while (!path.empty() && path.back().pick + 1 >= path.back().options.size()) path.pop_back();
    if (path.empty()) break;
    ++path.back().pick;
  }
  return runs;
}

std::vector<History> explore_exhaustive(const Workload& w, const ExploreOptions& options) {
  std::vector<History> out;
  explore_exhaustive(make_factory(w), options, [&](const RunRecord& r) {
    out.push_back(r.sim.history());
    return true;
  });
  return out;
}

std::size_t explore_random(const SimulationFactory& factory, std::uint64_t seed, std::size_t count,
                           const RandomOptions& options, const RunVisitor& visit) {
  if (count == 0) throw UsageError("random exploration needs count >= 1");
  std::mt19937_64 rng(seed);
  auto coin = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::size_t runs = 0;
  for (; runs < count; ++runs) {
    auto sim = factory();
    std::vector<Choice> taken;
    std::size_t crashes = 0;
    for (auto en = sim->enabled(); !en.empty(); en = sim->enabled()) {
      const ProcessId p = en[rng() % en.size()];
      if (crashes < options.max_crashes && options.crash_probability > 0.0 &&
          coin() < options.crash_probability) {
        sim->crash(p);
        ++crashes;
        taken.push_back({p, true});
        continue;
      }
      sim->step(p);
      taken.push_back({p, false});
      if (sim->total_steps() > options.step_bound) {
        throw BoundExceeded("run exceeded the step bound of " + std::to_string(options.step_bound));
      }
    }
    if (!visit(RunRecord{*sim, taken, runs})) return runs + 1;
  }
  return runs;
}

std::vector<History> explore_random(const Workload& w, std::uint64_t seed, std::size_t count,
                                    const RandomOptions& options) {
  std::vector<History> out;
  explore_random(make_factory(w), seed, count, options, [&](const RunRecord& r) {
    out.push_back(r.sim.history());
    return true;
  });
  return out;
}

}  // namespace audreg

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "audreg/history.hpp"
#include "audreg/memory.hpp"
#include "audreg/registers.hpp"
#include "audreg/runtime.hpp"

namespace audreg {

/// A set of simulated processes and registers over one shared memory.
/// Processes advance only through step(), one primitive at a time.
class Simulation {
 public:
  using Program = std::function<Task<void>(ProcessContext&)>;

  explicit Simulation(unsigned width_guard_bits = 128);
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;
  ~Simulation();

  Memory& memory() { return memory_; }
  const Memory& memory() const { return memory_; }
  const History& history() const { return recorder_.history(); }

  /// Object ids are assigned in registration order starting at 0.
  AuditableRegister& add_register(RegisterConfig config);
  AuditableRegister& register_at(ObjectId id) { return *registers_.at(id); }
  const AuditableRegister& register_at(ObjectId id) const { return *registers_.at(id); }
  std::size_t register_count() const { return registers_.size(); }

  void add_process(ProcessId id, Program program);

  std::vector<ProcessId> processes() const;
  /// Processes that are neither finished nor crashed, ascending.
  std::vector<ProcessId> enabled() const;
  bool finished(ProcessId p) const;
  bool crashed(ProcessId p) const;
  bool started(ProcessId p) const;
  std::size_t steps_taken(ProcessId p) const;
  std::size_t total_steps() const { return total_steps_; }

  /// Runs `p` until it has applied exactly one primitive (plus the local
  /// computation up to its next primitive or the end of its program).
  /// Throws UsageError if `p` is unknown, finished or crashed.
  StepOutcome step(ProcessId p);
  /// `p` takes no further steps; its pending operation stays pending.
  void crash(ProcessId p);

  /// Object metadata and events in the line format; with `with_trace` the
  /// primitive records are merged in by sequence number.
  std::string dump(bool with_trace = false) const;

 private:
  struct Slot {
    ProcessId id;
    Program program;
    std::unique_ptr<ProcessContext> ctx;
    Task<void> task;
    bool started = false;
    bool crashed = false;
    std::size_t steps = 0;
  };

  Slot& slot(ProcessId p);
  const Slot& slot(ProcessId p) const;

  SequenceClock clock_;
  Memory memory_;
  Recorder recorder_;
  std::vector<std::unique_ptr<AuditableRegister>> registers_;
  std::vector<Slot> slots_;
  std::size_t total_steps_ = 0;
};

using SimulationFactory = std::function<std::unique_ptr<Simulation>()>;

// ---------------------------------------------------------------------------
// Workloads

struct ScriptedOp {
  OpKind kind = OpKind::Read;
  ObjectId object = 0;
  std::optional<Value> argument;

  friend bool operator==(const ScriptedOp&, const ScriptedOp&) = default;
};

struct ProcessScript {
  ProcessId process;
  std::vector<ScriptedOp> ops;
};

/// Registers plus one operation script per process.
struct Workload {
  std::vector<RegisterConfig> registers;  // object id = index
  std::vector<ProcessScript> scripts;

  /// Throws UsageError if a script breaks its roles, references an unknown
  /// object, writes bottom, or repeats a written value on one object.
  void validate() const;
  std::size_t operation_count() const;
};

/// Fresh simulations of `w`, one process per script.
SimulationFactory make_factory(const Workload& w);
std::unique_ptr<Simulation> instantiate(const Workload& w);

// ---------------------------------------------------------------------------
// Schedules

struct CrashPoint {
  ProcessId process;
  std::size_t after_steps = 0;  // crash once the process has taken this many steps
};

struct Schedule {
  std::vector<ProcessId> order;
  std::vector<CrashPoint> crashes;
};

/// Drives `sim` through `schedule`. Throws UsageError if the schedule steps
/// a finished or crashed process.
void run(Simulation& sim, const Schedule& schedule);
History run(const Workload& w, const Schedule& schedule);

/// Steps enabled processes in rotating order until all have finished.
void run_round_robin(Simulation& sim);

/// Steps uniformly random enabled processes until all have finished.
void run_random(Simulation& sim, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Exploration

struct Choice {
  ProcessId process;
  bool crash = false;

  friend bool operator==(const Choice&, const Choice&) = default;
};

struct ExploreOptions {
  /// Maximum primitive steps in one run; exceeding it throws BoundExceeded.
  std::size_t step_bound = 512;
  /// Include single-process crash choices.
  bool crashes = false;
  std::size_t max_crashes = 1;
  /// Limit on context switches away from a still-enabled process.
  std::optional<std::size_t> preemption_bound;
  /// Exhaustive: throw BoundExceeded once more runs than this would be needed.
  std::optional<std::size_t> max_runs;
};

struct RandomOptions {
  std::size_t step_bound = 512;
  /// Per-step probability of crashing a random enabled process.
  double crash_probability = 0.0;
  std::size_t max_crashes = 1;
};

struct RunRecord {
  const Simulation& sim;
  const std::vector<Choice>& choices;
  std::size_t index;
};

/// Return false to stop exploring.
using RunVisitor = std::function<bool(const RunRecord&)>;

/// Depth-first enumeration of every maximal interleaving at primitive
/// granularity, each choice sequence exactly once, by deterministic replay.
/// A crash of process p is offered right after p's own steps (and for every
/// process before anything runs), which reaches every crash point up to
/// interleaving equivalence. Returns the number of runs visited.
std::size_t explore_exhaustive(const SimulationFactory& factory, const ExploreOptions& options,
                               const RunVisitor& visit);
std::vector<History> explore_exhaustive(const Workload& w, const ExploreOptions& options = {});

/// `count` runs with uniformly random next-process choices from one seeded
/// stream. Throws UsageError when count == 0.
std::size_t explore_random(const SimulationFactory& factory, std::uint64_t seed, std::size_t count,
                           const RandomOptions& options, const RunVisitor& visit);
std::vector<History> explore_random(const Workload& w, std::uint64_t seed, std::size_t count,
                                    const RandomOptions& options = {});

}  // namespace audreg

#pragma once

#include <optional>
#include <stdexcept>
#include <string_view>

#include "audreg/history.hpp"
#include "audreg/scheduler.hpp"
#include "audreg/workload.hpp"

namespace audreg::testing {

/// Steps `p` until its current high-level operation responds; returns the
/// number of primitive steps that took.
inline std::size_t run_op(Simulation& sim, ProcessId p) {
  std::size_t steps = 0;
  while (true) {
    ++steps;
    const auto outcome = sim.step(p);
    if (outcome != StepOutcome::Continue) return steps;
  }
}

inline std::unique_ptr<Simulation> sim_of(std::string_view workload_text) {
  return instantiate(parse_workload(workload_text));
}

/// The most recently completed operation.
inline Operation last_op(const Simulation& sim) {
  auto ops = sim.history().operations();
  std::optional<Operation> best;
  for (auto& op : ops) {
    if (op.complete() && (!best || *op.responded_at > *best->responded_at)) best = op;
  }
  if (!best) throw std::out_of_range("no completed op");
  return *best;
}

inline Operation op_by_id(const History& h, OpId id) {
  for (auto& op : h.operations()) {
    if (op.id == id) return op;
  }
  throw std::out_of_range("no such op");
}

inline ProcessId P(std::uint32_t i) { return ProcessId(i); }

}  // namespace audreg::testing

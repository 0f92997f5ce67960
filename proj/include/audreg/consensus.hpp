#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "audreg/registers.hpp"
#include "audreg/scheduler.hpp"

namespace audreg {

/// TwoProcess: each p_i writes R_i, reads R_{1-i}, then audits R_i.
/// NProcess: each p_i writes R_i, reads every other R_j, then audits every
/// R_j and decides the largest value read from a register whose audit shows
/// no bottom read.
enum class ConsensusProtocol : std::uint8_t { TwoProcess, NProcess };

struct ConsensusConfig {
  ConsensusProtocol protocol = ConsensusProtocol::TwoProcess;
  /// inputs[i] is p_i's proposal.
  std::vector<Value> inputs;
  /// TwoProcess: A5 or A3. NProcess: A6.
  Algorithm backend = Algorithm::A5;
  /// A broken register variant, to confirm the harness notices.
  Mutant mutant = Mutant::None;

  /// Throws UsageError for repeated or bottom inputs, a wrong process count
  /// or an unsupported backend.
  void validate() const;
  std::size_t n() const { return inputs.size(); }
};

ConsensusConfig two_process_config(Value v0, Value v1, Algorithm backend = Algorithm::A5);
ConsensusConfig n_process_config(std::vector<Value> inputs);

struct ProcessDecision {
  enum class Status : std::uint8_t { Decided, Crashed, Undecided };
  Status status = Status::Undecided;
  std::optional<Value> value;
  std::size_t steps = 0;
  /// NProcess only: the safe_values set at decision time.
  std::vector<Value> safe_values;
};

struct DecisionRecord {
  std::vector<ProcessDecision> processes;
};

struct ConsensusVerdict {
  bool agreement = true;
  bool validity = true;
  bool termination = true;
  /// Every decider ended with the same non-empty safe_values (NProcess).
  bool safe_values_agree = true;
  std::string detail;

  bool ok() const { return agreement && validity && termination && safe_values_agree; }
};

/// Builds consensus runs as simulations. Local decision state of the most
/// recently instantiated simulation is kept by the harness.
class ConsensusHarness {
 public:
  explicit ConsensusHarness(ConsensusConfig config);

  const ConsensusConfig& config() const { return config_; }
  std::unique_ptr<Simulation> instantiate();
  SimulationFactory factory();
  /// Decisions of the latest simulation returned by instantiate().
  DecisionRecord decisions(const Simulation& sim) const;
  /// Primitive steps a process may take before termination counts as broken.
  std::size_t step_limit() const;

 private:
  struct Local {
    std::optional<Value> decision;
    std::vector<Value> safe_values;
  };

  ConsensusConfig config_;
  std::shared_ptr<std::vector<Local>> latest_;
};

std::string to_string(const DecisionRecord& r);

/// Agreement, validity, and termination within `step_limit` own steps for
/// every process that did not crash.
ConsensusVerdict verify_consensus(const ConsensusConfig& config, const DecisionRecord& decisions,
                                  std::size_t step_limit);

struct ConsensusTally {
  std::size_t runs = 0;
  std::size_t agreement_violations = 0;
  std::size_t validity_violations = 0;
  std::size_t termination_violations = 0;
  std::size_t safe_values_mismatches = 0;
  std::size_t crashed_runs = 0;
  /// First violating run: choices and history dump.
  std::optional<std::string> first_violation;

  std::size_t violations() const {
    return agreement_violations + validity_violations + termination_violations + safe_values_mismatches;
  }
};

ConsensusTally consensus_exhaustive(const ConsensusConfig& config, const ExploreOptions& options);
ConsensusTally consensus_random(const ConsensusConfig& config, std::uint64_t seed, std::size_t count,
                                const RandomOptions& options);

}  // namespace audreg

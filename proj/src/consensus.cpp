#include "audreg/consensus.hpp"

#include <algorithm>
#include <set>

#include "audreg/errors.hpp"

namespace audreg {

void ConsensusConfig::validate() const {
  if (mutant != Mutant::None) {
    bool known = false;
    for (const auto& tag : all_algorithm_tags()) known |= parse_algorithm_tag(tag) == std::pair{backend, mutant};
    if (!known) throw UsageError("mutant does not apply to the backend");
  }
  std::set<Value> seen;
  for (const auto& v : inputs) {
    if (v.is_bottom()) throw UsageError("consensus inputs must not be bottom");
    if (!seen.insert(v).second) throw UsageError("consensus inputs must be distinct");
  }
  if (protocol == ConsensusProtocol::TwoProcess) {
    if (inputs.size() != 2) throw UsageError("two-process consensus needs exactly 2 inputs");
    if (backend != Algorithm::A5 && backend != Algorithm::A3) {
      throw UsageError("two-process consensus runs over a5 or a3 registers");
    }
  } else {
    if (inputs.empty()) throw UsageError("consensus needs at least one process");
    if (inputs.size() > 64) throw UsageError("at most 64 processes");
    if (backend != Algorithm::A6) throw UsageError("n-process consensus runs over a6 registers");
  }
}

ConsensusConfig two_process_config(Value v0, Value v1, Algorithm backend) {
  ConsensusConfig c;
  c.protocol = ConsensusProtocol::TwoProcess;
  c.inputs = {v0, v1};
  c.backend = backend;
  c.validate();
  return c;
}

ConsensusConfig n_process_config(std::vector<Value> inputs) {
  ConsensusConfig c;
  c.protocol = ConsensusProtocol::NProcess;
  c.inputs = std::move(inputs);
  c.backend = Algorithm::A6;
  c.validate();
  return c;
}

namespace {

struct LocalState {
  std::optional<Value>* decision;
  std::vector<Value>* safe_values;
};

Task<void> propose_two(ProcessContext& ctx, AuditableRegister* mine, AuditableRegister* other, Value input,
                       ProcessId peer, LocalState out) {
  co_await mine->write(ctx, input);
  Value val = co_await other->read(ctx);
  AuditSet audit_response = co_await mine->audit(ctx);
  if (val.is_bottom()) {
    *out.decision = input;
  } else if (audit_response == AuditSet{{peer, Value::bottom()}}) {
    *out.decision = val;
  } else {
    *out.decision = std::max(input, val);
  }
}

Task<void> propose_n(ProcessContext& ctx, std::vector<AuditableRegister*> regs, std::size_t i, Value input,
                     LocalState out) {
  const std::size_t n = regs.size();
  co_await regs[i]->write(ctx, input);
  std::vector<Value> values(n);
  values[i] = input;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    Value v = co_await regs[j]->read(ctx);
    values[j] = v;
  }
  std::set<Value> safe_values;
  AuditSet audit_response;
  for (std::size_t j = 0; j < n; ++j) {
    audit_response = co_await regs[j]->audit(ctx);
    const bool saw_bottom = std::any_of(audit_response.begin(), audit_response.end(),
                                        [](const AuditPair& p) { return p.value.is_bottom(); });
    if (!saw_bottom) safe_values.insert(values[j]);
  }
  out.safe_values->assign(safe_values.begin(), safe_values.end());
  if (!safe_values.empty()) *out.decision = *safe_values.rbegin();
}

}  // namespace

ConsensusHarness::ConsensusHarness(ConsensusConfig config) : config_(std::move(config)) {
  config_.validate();
}

std::unique_ptr<Simulation> ConsensusHarness::instantiate() {
  const std::size_t n = config_.n();
  auto sim = std::make_unique<Simulation>();
  auto locals = std::make_shared<std::vector<Local>>(n);
  latest_ = locals;
  std::vector<AuditableRegister*> regs;
  for (std::size_t i = 0; i < n; ++i) {
    RegisterConfig rc;
    rc.algorithm = config_.backend;
    rc.mutant = config_.mutant;
    rc.writer = ProcessId(static_cast<std::uint32_t>(i));
    if (config_.protocol == ConsensusProtocol::TwoProcess) {
      rc.readers = {ProcessId(static_cast<std::uint32_t>(1 - i))};
      rc.auditors = {rc.writer};
    } else {
      for (std::size_t j = 0; j < n; ++j) {
        const ProcessId p(static_cast<std::uint32_t>(j));
        if (j != i) rc.readers.push_back(p);
        rc.auditors.insert(p);
      }
    }
    regs.push_back(&sim->add_register(rc));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const ProcessId p(static_cast<std::uint32_t>(i));
    const Value input = config_.inputs[i];
    LocalState out{&(*locals)[i].decision, &(*locals)[i].safe_values};
    if (config_.protocol == ConsensusProtocol::TwoProcess) {
      AuditableRegister* mine = regs[i];
      AuditableRegister* other = regs[1 - i];
      const ProcessId peer(static_cast<std::uint32_t>(1 - i));
      sim->add_process(p, [locals, mine, other, input, peer, out](ProcessContext& ctx) {
        return propose_two(ctx, mine, other, input, peer, out);
      });
    } else {
      sim->add_process(p, [locals, regs, i, input, out](ProcessContext& ctx) {
        return propose_n(ctx, regs, i, input, out);
      });
    }
  }
  return sim;
}

SimulationFactory ConsensusHarness::factory() {
  return [this] { return instantiate(); };
}

DecisionRecord ConsensusHarness::decisions(const Simulation& sim) const {
  if (!latest_) throw UsageError("no consensus run has been instantiated");
  DecisionRecord r;
  for (std::size_t i = 0; i < config_.n(); ++i) {
    const ProcessId p(static_cast<std::uint32_t>(i));
    ProcessDecision d;
    d.steps = sim.steps_taken(p);
    d.safe_values = (*latest_)[i].safe_values;
    if (sim.crashed(p)) {
      d.status = ProcessDecision::Status::Crashed;
    } else if (sim.finished(p) && (*latest_)[i].decision) {
      d.status = ProcessDecision::Status::Decided;
      d.value = (*latest_)[i].decision;
    }
    r.processes.push_back(std::move(d));
  }
  return r;
}

std::size_t ConsensusHarness::step_limit() const {
  // Worst-case primitive counts per high-level operation, with slack for
  // the writer's bounded compare&swap retries and the audit scans.
  const std::size_t n = config_.n();
  if (config_.protocol == ConsensusProtocol::TwoProcess) return 16;
  const std::size_t per_write = 1 + (n + 1) * (2 + n);
  const std::size_t per_read = 2;
  const std::size_t per_audit = 1 + n * 2;
  return per_write + (n - 1) * per_read + n * per_audit;
}

std::string to_string(const DecisionRecord& r) {
  std::string out;
  for (std::size_t i = 0; i < r.processes.size(); ++i) {
    const auto& d = r.processes[i];
    if (!out.empty()) out += ' ';
    out += "p" + std::to_string(i) + '=';
    switch (d.status) {
      case ProcessDecision::Status::Decided: out += to_string(*d.value); break;
      case ProcessDecision::Status::Crashed: out += "CRASHED"; break;
      case ProcessDecision::Status::Undecided: out += "UNDECIDED"; break;
    }
    out += '/' + std::to_string(d.steps);
  }
  return out;
}

ConsensusVerdict verify_consensus(const ConsensusConfig& config, const DecisionRecord& decisions,
                                  std::size_t step_limit) {
  ConsensusVerdict v;
  std::optional<Value> agreed;
  const std::vector<Value>* safe = nullptr;
  auto note = [&v](const std::string& s) {
    if (!v.detail.empty()) v.detail += "; ";
    v.detail += s;
  };
  for (std::size_t i = 0; i < decisions.processes.size(); ++i) {
    const auto& d = decisions.processes[i];
    const std::string who = "p" + std::to_string(i);
    if (d.status == ProcessDecision::Status::Crashed) continue;
    if (d.status == ProcessDecision::Status::Undecided || d.steps > step_limit) {
      v.termination = false;
      note(who + " did not decide within " + std::to_string(step_limit) + " steps");
      continue;
    }
    const Value& x = *d.value;
    if (std::find(config.inputs.begin(), config.inputs.end(), x) == config.inputs.end()) {
      v.validity = false;
      note(who + " decided " + to_string(x) + ", which nobody proposed");
    }
    if (agreed && *agreed != x) {
      v.agreement = false;
      note(who + " decided " + to_string(x) + " but another process decided " + to_string(*agreed));
    }
    if (!agreed) agreed = x;
    if (config.protocol == ConsensusProtocol::NProcess) {
      if (d.safe_values.empty() || (safe && *safe != d.safe_values)) {
        v.safe_values_agree = false;
        note(who + " ended with a different safe_values set");
      }
      if (!safe) safe = &d.safe_values;
    }
  }
  return v;
}

namespace {

void tally(ConsensusTally& t, const ConsensusConfig& config, ConsensusHarness& harness, const RunRecord& run) {
  const auto record = harness.decisions(run.sim);
  const auto verdict = verify_consensus(config, record, harness.step_limit());
  ++t.runs;
  if (std::any_of(run.choices.begin(), run.choices.end(), [](const Choice& c) { return c.crash; })) {
    ++t.crashed_runs;
  }
  if (!verdict.agreement) ++t.agreement_violations;
  if (!verdict.validity) ++t.validity_violations;
  if (!verdict.termination) ++t.termination_violations;
  if (!verdict.safe_values_agree) ++t.safe_values_mismatches;
  if (!verdict.ok() && !t.first_violation) {
    std::string s = "run " + std::to_string(run.index) + ": " + verdict.detail + "\ndecisions " +
                    to_string(record) + "\nchoices";
    for (const auto& c : run.choices) s += (c.crash ? " crash:" : " ") + to_string(c.process);
    s += '\n' + run.sim.dump();
    t.first_violation = std::move(s);
  }
}

}  // namespace

ConsensusTally consensus_exhaustive(const ConsensusConfig& config, const ExploreOptions& options) {
  ConsensusHarness harness(config);
  ConsensusTally t;
  explore_exhaustive(harness.factory(), options, [&](const RunRecord& run) {
    tally(t, config, harness, run);
    return true;
  });
  return t;
}

ConsensusTally consensus_random(const ConsensusConfig& config, std::uint64_t seed, std::size_t count,
                                const RandomOptions& options) {
  ConsensusHarness harness(config);
  ConsensusTally t;
  explore_random(harness.factory(), seed, count, options, [&](const RunRecord& run) {
    tally(t, config, harness, run);
    return true;
  });
  return t;
}

}  // namespace audreg

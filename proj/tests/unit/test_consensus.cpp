#include <doctest.h>

#include "audreg/consensus.hpp"
#include "audreg/errors.hpp"

using namespace audreg;

namespace {

void finish(Simulation& sim, ProcessId p) {
  while (!sim.finished(p)) sim.step(p);
}

std::optional<Value> decided(const DecisionRecord& r, std::size_t i) { return r.processes.at(i).value; }

}  // namespace

TEST_CASE("two processes: a solo run fixes the decision") {
  for (auto backend : {Algorithm::A5, Algorithm::A3}) {
    ConsensusHarness h(two_process_config(Value::of(3), Value::of(5), backend));
    auto sim = h.instantiate();
    finish(*sim, ProcessId(0));
    finish(*sim, ProcessId(1));
    const auto r = h.decisions(*sim);
    CHECK(decided(r, 0) == Value::of(3));
    CHECK(decided(r, 1) == Value::of(3));
    CHECK(verify_consensus(h.config(), r, h.step_limit()).ok());
  }
}

TEST_CASE("two processes in lockstep both take the larger input") {
  ConsensusHarness h(two_process_config(Value::of(3), Value::of(5)));
  auto sim = h.instantiate();
  run_round_robin(*sim);
  const auto r = h.decisions(*sim);
  CHECK(decided(r, 0) == Value::of(5));
  CHECK(decided(r, 1) == Value::of(5));
}

TEST_CASE("n processes in sequence decide the first input") {
  ConsensusHarness h(n_process_config({Value::of(3), Value::of(5), Value::of(4)}));
  auto sim = h.instantiate();
  for (std::uint32_t p = 0; p < 3; ++p) finish(*sim, ProcessId(p));
  const auto r = h.decisions(*sim);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(decided(r, i) == Value::of(3));
    CHECK(r.processes[i].safe_values == std::vector<Value>{Value::of(3)});
  }
  CHECK(verify_consensus(h.config(), r, h.step_limit()).ok());
}

TEST_CASE("a lone process decides its input") {
  ConsensusHarness h(n_process_config({Value::of(9)}));
  auto sim = h.instantiate();
  finish(*sim, ProcessId(0));
  CHECK(decided(h.decisions(*sim), 0) == Value::of(9));
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(two_process_config(Value::of(3), Value::of(3)).validate(), UsageError);
  CHECK_THROWS_AS(two_process_config(Value::of(3), Value::bottom()).validate(), UsageError);
  CHECK_THROWS_AS(two_process_config(Value::of(3), Value::of(4), Algorithm::A6).validate(), UsageError);
  auto c = n_process_config({Value::of(1), Value::of(2)});
  c.backend = Algorithm::A5;
  CHECK_THROWS_AS(c.validate(), UsageError);
}

TEST_CASE("verdict on decision records") {
  const auto config = two_process_config(Value::of(3), Value::of(5));
  using S = ProcessDecision::Status;
  auto rec = [](std::vector<ProcessDecision> ps) { return DecisionRecord{std::move(ps)}; };
  ProcessDecision three{S::Decided, Value::of(3), 4, {}};
  ProcessDecision five{S::Decided, Value::of(5), 4, {}};
  ProcessDecision seven{S::Decided, Value::of(7), 4, {}};
  ProcessDecision crashed{S::Crashed, std::nullopt, 1, {}};
  ProcessDecision stuck{S::Undecided, std::nullopt, 100, {}};

  CHECK(verify_consensus(config, rec({three, three}), 16).ok());
  CHECK(verify_consensus(config, rec({crashed, five}), 16).ok());
  const auto split = verify_consensus(config, rec({three, five}), 16);
  CHECK_FALSE(split.agreement);
  CHECK(split.validity);
  CHECK_FALSE(verify_consensus(config, rec({seven, seven}), 16).validity);
  CHECK_FALSE(verify_consensus(config, rec({three, stuck}), 16).termination);
  ProcessDecision slow = three;
  slow.steps = 17;
  CHECK_FALSE(verify_consensus(config, rec({three, slow}), 16).termination);
  CHECK(to_string(rec({three, crashed})) == "p0=3/4 p1=CRASHED/1");
}

TEST_CASE("two-process exhaustive with a crash: no violations") {
  ExploreOptions opt;
  opt.crashes = true;
  const auto t = consensus_exhaustive(two_process_config(Value::of(3), Value::of(5)), opt);
  CHECK(t.runs > 1000);
  CHECK(t.crashed_runs > 0);
  CHECK(t.violations() == 0);
}

TEST_CASE("n-process random runs: no violations, and a broken backend is caught") {
  RandomOptions opt;
  opt.crash_probability = 0.02;
  const auto cfg = n_process_config({Value::of(3), Value::of(5), Value::of(4)});
  const auto ok = consensus_random(cfg, 7, 2000, opt);
  CHECK(ok.runs == 2000);
  CHECK(ok.violations() == 0);

  auto broken = cfg;
  broken.mutant = Mutant::A6NoPairsLog;
  const auto bad = consensus_random(broken, 7, 2000, {});
  CHECK(bad.violations() > 0);
  CHECK(bad.first_violation.has_value());
}

#include <doctest.h>

#include <set>

#include "audreg/errors.hpp"
#include "audreg/history_io.hpp"
#include "support.hpp"

using namespace audreg;
using namespace audreg::testing;

namespace {

constexpr std::string_view kOneEach =
    "register 0 a3 initial 0 writer 0 readers 1 auditors 0\n"
    "process 0: write 1\n"
    "process 1: read\n";

constexpr std::string_view kTwoEach =
    "register 0 a3 initial 0 writer 0 readers 1 auditors 0\n"
    "process 0: write 1; write 2\n"
    "process 1: read; read\n";

std::size_t count_runs(const Workload& w, const ExploreOptions& opts = {}) {
  return explore_exhaustive(make_factory(w), opts, [](const RunRecord&) { return true; });
}

/// Multinomial coefficient over per-process solo step counts.
std::size_t multinomial(const std::vector<std::size_t>& parts) {
  std::size_t total = 0;
  std::size_t out = 1;
  for (auto k : parts) {
    for (std::size_t i = 1; i <= k; ++i) {
      ++total;
      out = out * total / i;
    }
  }
  return out;
}

std::vector<std::size_t> solo_step_counts(const Workload& w) {
  auto sim = instantiate(w);
  run_round_robin(*sim);
  std::vector<std::size_t> out;
  for (auto p : sim->processes()) out.push_back(sim->steps_taken(p));
  return out;
}

}  // namespace

TEST_CASE("two processes with one primitive each interleave two ways") {
  CHECK(count_runs(parse_workload(kOneEach)) == 2);
}

TEST_CASE("two processes with two primitives each interleave six ways") {
  CHECK(count_runs(parse_workload(kTwoEach)) == 6);
}

TEST_CASE("run counts match the multinomial when step counts are fixed") {
  for (const char* tag : {"a3", "a7"}) {
    const auto w = builtin_workload(tag, "standard");
    CHECK(count_runs(w) == multinomial(solo_step_counts(w)));
  }
  CHECK(multinomial({2, 2, 2, 4}) == 18900);
}

TEST_CASE("every explored interleaving is distinct") {
  std::set<std::string> traces;
  std::set<std::vector<std::uint32_t>> choice_seqs;
  const auto runs = explore_exhaustive(make_factory(builtin_workload("a4", "standard")), {}, [&](const RunRecord& r) {
    traces.insert(r.sim.dump(true));
    std::vector<std::uint32_t> seq;
    for (const auto& c : r.choices) seq.push_back(c.process.index);
    choice_seqs.insert(seq);
    r.sim.history().validate();
    return true;
  });
  CHECK(traces.size() == runs);
  CHECK(choice_seqs.size() == runs);
}

TEST_CASE("data-dependent retries still yield unique runs") {
  std::set<std::string> traces;
  const auto runs = explore_exhaustive(make_factory(builtin_workload("a6", "demo")), {}, [&](const RunRecord& r) {
    traces.insert(r.sim.dump(true));
    return true;
  });
  CHECK(runs > 0);
  CHECK(traces.size() == runs);
}

TEST_CASE("round robin over one process gives a sequential history") {
  auto sim = sim_of(
      "register 0 a4 initial 0 writer 0 readers 1 auditors 0\n"
      "process 0: write 1; write 2; audit\n");
  run_round_robin(*sim);
  const auto ops = sim->history().operations();
  REQUIRE(ops.size() == 3);
  for (std::size_t i = 1; i < ops.size(); ++i) CHECK(precedes(sim->history(), ops[i - 1].id, ops[i].id));
  CHECK(sim->finished(P(0)));
  CHECK(sim->enabled().empty());
}

TEST_CASE("a reader crashed after its first primitive leaves a pending read") {
  const auto w = builtin_workload("a4", "standard");
  Schedule s;
  s.order = {P(1)};
  s.crashes = {{P(1), 1}};
  const History h = run(w, s);
  const auto ops = h.operations();
  REQUIRE(ops.size() == 1);
  CHECK(ops[0].kind == OpKind::Read);
  CHECK_FALSE(ops[0].complete());
  auto sim = instantiate(w);
  run(*sim, s);
  CHECK(sim->crashed(P(1)));
  CHECK_THROWS_AS(sim->step(P(1)), UsageError);
}

TEST_CASE("replays are byte-identical") {
  const auto w = builtin_workload("a6", "large");
  // p2 runs three steps and crashes; the rest go round robin
  Schedule s;
  s.order = {P(2), P(2), P(2)};
  s.crashes = {{P(2), 3}};
  {
    auto probe = instantiate(w);
    for (int i = 0; i < 3; ++i) probe->step(P(2));
    probe->crash(P(2));
    for (std::size_t turn = 0; !probe->enabled().empty(); ++turn) {
      const auto en = probe->enabled();
      const ProcessId p = en[turn % en.size()];
      probe->step(p);
      s.order.push_back(p);
    }
  }
  auto a = instantiate(w);
  auto b = instantiate(w);
  run(*a, s);
  run(*b, s);
  CHECK(a->crashed(P(2)));
  CHECK(a->dump(true) == b->dump(true));
  auto c = instantiate(w);
  auto d = instantiate(w);
  run_random(*c, 99);
  run_random(*d, 99);
  CHECK(c->dump(true) == d->dump(true));
}

TEST_CASE("random exploration is a pure function of the seed") {
  const auto w = builtin_workload("a5", "large");
  const auto first = explore_random(w, 5, 20);
  const auto again = explore_random(w, 5, 20);
  const auto other = explore_random(w, 6, 20);
  CHECK(first.size() == 20);
  CHECK(first == again);
  CHECK(first != other);
  CHECK_THROWS_AS(explore_random(w, 5, 0), UsageError);
}

TEST_CASE("exploration bounds are enforced") {
  const auto w = builtin_workload("a3", "standard");
  ExploreOptions tight;
  tight.step_bound = 3;
  CHECK_THROWS_AS(count_runs(w, tight), BoundExceeded);
  ExploreOptions few;
  few.max_runs = 5;
  CHECK_THROWS_AS(count_runs(w, few), BoundExceeded);
  ExploreOptions no_preemption;
  no_preemption.preemption_bound = 0;
  CHECK(count_runs(w, no_preemption) == 2);
}

TEST_CASE("crash choices enlarge the space and never block others") {
  const auto w = parse_workload(kTwoEach);
  ExploreOptions crashes;
  crashes.crashes = true;
  std::size_t crashed_runs = 0;
  const auto runs = explore_exhaustive(make_factory(w), crashes, [&](const RunRecord& r) {
    bool any = false;
    for (auto p : r.sim.processes()) {
      if (r.sim.crashed(p)) {
        any = true;
      } else {
        CHECK(r.sim.finished(p));
      }
    }
    crashed_runs += any ? 1 : 0;
    return true;
  });
  CHECK(runs > 6);
  CHECK(runs - crashed_runs == 6);
  // Crash points by hand: either process before anything runs (2), or a
  // process right after its first step while the other has taken 0, 1 or
  // 2 steps (2 x 3).
  CHECK(crashed_runs == 8);
}

TEST_CASE("workloads with role violations are refused") {
  Workload w = parse_workload(kOneEach);
  w.scripts[1].ops[0].kind = OpKind::Audit;
  CHECK_THROWS_AS(w.validate(), UsageError);
  CHECK_THROWS_AS(make_factory(w), UsageError);
}

#include <doctest.h>

#include <random>

#include "../common/random_history.hpp"
#include "audreg/checker.hpp"
#include "audreg/errors.hpp"
#include "audreg/history_io.hpp"

using namespace audreg;

namespace {

constexpr std::string_view kRoles = "object 0 initial 0 writer 0 readers 1,2 auditors 0,3\n";

History hist(std::string_view body) { return parse_history(std::string(kRoles) + std::string(body)); }

// A read by p1 returns 1 while write(2) and an audit by p3 run inside it.
std::string overlap(std::string_view audit_result) {
  return "0 0 0 0 inv write 1 -\n"
         "1 0 0 0 res write - -\n"
         "2 1 0 1 inv read - -\n"
         "3 0 0 2 inv write 2 -\n"
         "4 0 0 2 res write - -\n"
         "5 3 0 3 inv audit - -\n"
         "6 3 0 3 res audit - " +
         std::string(audit_result) +
         "\n"
         "7 1 0 1 res read - 1\n";
}

void check_witness(const History& h, const Verdict& v, Definition d) {
  REQUIRE(v.accepted);
  REQUIRE(v.witness);
  const History hc = completion_for(h, *v.witness);
  CHECK(respects_real_time(*v.witness, hc));
  CHECK(check_sequential_register(*v.witness, hc));
  std::size_t expected = 0;
  for (const auto& op : hc.operations()) {
    CHECK(op.complete());
    expected += (d == Definition::AtomicAudit || op.kind != OpKind::Audit) ? 1 : 0;
  }
  CHECK(v.witness->size() == expected);
  if (d == Definition::AtomicAudit) {
    CHECK(check_audit_conditions(*v.witness, hc));
  } else {
    CHECK(check_regular_audit_conditions(hc));
  }
}

}  // namespace

TEST_CASE("sequential register predicate") {
  const History h = hist(
      "0 0 0 0 inv write 1 -\n1 0 0 0 res write - -\n"
      "2 1 0 1 inv read - -\n3 1 0 1 res read - 1\n"
      "4 2 0 2 inv read - -\n5 2 0 2 res read - 0\n");
  CHECK(check_sequential_register({0, 1}, h));
  CHECK_FALSE(check_sequential_register({1, 0}, h));
  CHECK(check_sequential_register({2}, h));
  CHECK_FALSE(check_sequential_register({0, 2}, h));
}

TEST_CASE("audit predicate is the iff form") {
  const History h = hist(
      "0 1 0 0 inv read - -\n1 1 0 0 res read - 0\n"
      "2 3 0 1 inv audit - -\n3 3 0 1 res audit - {(1,0)}\n"
      "4 0 0 2 inv audit - -\n5 0 0 2 res audit - {}\n");
  CHECK(check_audit_conditions({0, 1}, h));
  CHECK_FALSE(check_audit_conditions({1, 0}, h));  // reports a later read
  CHECK_FALSE(check_audit_conditions({0, 2}, h));  // misses an earlier read
  CHECK(check_audit_conditions({2, 0, 1}, h));
}

TEST_CASE("overlapping read, write and audit: atomic audit must report the read") {
  const History reported = hist(overlap("{(1,1)}"));
  const History empty = hist(overlap("{}"));
  const Verdict a = check_atomic_with_atomic_audit(reported);
  check_witness(reported, a, Definition::AtomicAudit);
  const Verdict b = check_atomic_with_atomic_audit(empty);
  CHECK_FALSE(b.accepted);
  REQUIRE(b.violation);
  CHECK(b.violation->condition == Condition::Completeness);
  CHECK(b.violation->ops == std::vector<OpId>{3});
  check_witness(reported, check_atomic_with_regular_audit(reported), Definition::RegularAudit);
  check_witness(empty, check_atomic_with_regular_audit(empty), Definition::RegularAudit);
}

TEST_CASE("empty history is accepted with an empty witness") {
  for (auto d : {Definition::AtomicAudit, Definition::RegularAudit}) {
    const Verdict v = check(History{}, d);
    CHECK(v.accepted);
    CHECK(v.witness == std::vector<OpId>{});
  }
}

TEST_CASE("regular audit cannot report a read invoked after it responded") {
  const History h = hist(
      "0 3 0 0 inv audit - -\n1 3 0 0 res audit - {(1,0)}\n"
      "2 1 0 1 inv read - -\n3 1 0 1 res read - 0\n");
  const Verdict v = check_atomic_with_regular_audit(h);
  CHECK_FALSE(v.accepted);
  CHECK(v.violation->condition == Condition::Accuracy);
  const Verdict a = check_atomic_with_atomic_audit(h);
  CHECK_FALSE(a.accepted);
  CHECK(a.violation->condition == Condition::StrongAccuracy);
}

TEST_CASE("regular audit must report reads completed before its invocation") {
  const History h = hist(
      "0 1 0 0 inv read - -\n1 1 0 0 res read - 0\n"
      "2 3 0 1 inv audit - -\n3 3 0 1 res audit - {}\n");
  const Verdict v = check_atomic_with_regular_audit(h);
  CHECK_FALSE(v.accepted);
  CHECK(v.violation->condition == Condition::Completeness);
  CHECK(v.violation->ops == std::vector<OpId>{0, 1});
}

TEST_CASE("stale reads violate register semantics under both definitions") {
  const History h = hist(
      "0 0 0 0 inv write 1 -\n1 0 0 0 res write - -\n"
      "2 1 0 1 inv read - -\n3 1 0 1 res read - 0\n");
  for (auto d : {Definition::AtomicAudit, Definition::RegularAudit}) {
    const Verdict v = check(h, d);
    CHECK_FALSE(v.accepted);
    CHECK(v.violation->condition == Condition::RegisterSemantics);
    CHECK(v.violation->ops == std::vector<OpId>{1});
  }
}

TEST_CASE("pending operations may be completed to justify results") {
  // The audit reports a read that never responded, and a read returns the
  // argument of a pending write.
  const History h = hist(
      "0 1 0 0 inv read - -\n"
      "1 0 0 1 inv write 4 -\n"
      "2 3 0 2 inv audit - -\n3 3 0 2 res audit - {(1,4)}\n"
      "4 2 0 3 inv read - -\n5 2 0 3 res read - 4\n");
  check_witness(h, check_atomic_with_atomic_audit(h), Definition::AtomicAudit);
  check_witness(h, check_atomic_with_regular_audit(h), Definition::RegularAudit);
  // Pending audits are discarded, whatever they would have returned.
  const History p = hist("0 3 0 0 inv audit - -\n");
  CHECK(check_atomic_with_atomic_audit(p).accepted);
}

TEST_CASE("conflicting demands on one pending read break accuracy") {
  const History h = hist(
      "0 0 0 0 inv write 4 -\n1 0 0 0 res write - -\n"
      "2 1 0 1 inv read - -\n"
      "3 3 0 2 inv audit - -\n4 3 0 2 res audit - {(1,0)}\n"
      "5 0 0 3 inv audit - -\n6 0 0 3 res audit - {(1,4)}\n");
  const Verdict v = check_atomic_with_regular_audit(h);
  CHECK_FALSE(v.accepted);
  CHECK(v.violation->condition == Condition::Accuracy);
  CHECK(brute_force_oracle(h, Definition::RegularAudit).accepted == false);
}

TEST_CASE("audits that each fit alone but not together") {
  // Everything overlaps. One audit puts p1's read before p2's, the other the
  // reverse.
  const History h = hist(
      "0 1 0 0 inv read - -\n1 2 0 1 inv read - -\n"
      "2 0 0 2 inv audit - -\n3 3 0 3 inv audit - -\n"
      "4 1 0 0 res read - 0\n5 2 0 1 res read - 0\n"
      "6 0 0 2 res audit - {(1,0)}\n7 3 0 3 res audit - {(2,0)}\n");
  const Verdict v = check_atomic_with_atomic_audit(h);
  CHECK_FALSE(v.accepted);
  CHECK(v.violation->condition == Condition::AuditConsistency);
  CHECK(v.violation->ops == std::vector<OpId>{2, 3});
  CHECK_FALSE(brute_force_oracle(h, Definition::AtomicAudit).accepted);
  CHECK(check_atomic_with_regular_audit(h).accepted);
}

TEST_CASE("objects are checked independently") {
  const std::string text =
      "object 0 initial 0 writer 0 readers 1 auditors 0\n"
      "object 1 initial 5 writer 0 readers 1 auditors 1\n"
      "0 0 0 0 inv write 1 -\n"
      "1 1 1 1 inv read - -\n"
      "2 0 0 0 res write - -\n"
      "3 1 1 1 res read - 5\n"
      "4 1 0 2 inv read - -\n"
      "5 1 0 2 res read - 1\n";
  const History h = parse_history(text);
  const Verdict v = check_atomic_with_atomic_audit(h);
  CHECK(v.accepted);
  CHECK(v.witness->size() == 3);
  const History bad = parse_history(text.substr(0, text.size() - 2) + "0\n");
  CHECK_FALSE(check_atomic_with_atomic_audit(bad).accepted);
}

TEST_CASE("duplicate written values are an input error") {
  const History h = hist(
      "0 0 0 0 inv write 1 -\n1 0 0 0 res write - -\n"
      "2 0 0 1 inv write 1 -\n3 0 0 1 res write - -\n");
  CHECK_THROWS_AS(check_atomic_with_atomic_audit(h), InputError);
  CHECK_THROWS_AS(check_atomic_with_regular_audit(h), InputError);
  CHECK_THROWS_AS(brute_force_oracle(h, Definition::AtomicAudit), InputError);
}

TEST_CASE("the oracle refuses large histories") {
  std::string body;
  for (int i = 0; i < 9; ++i) {
    body += std::to_string(2 * i) + " 1 0 " + std::to_string(i) + " inv read - -\n";
    body += std::to_string(2 * i + 1) + " 1 0 " + std::to_string(i) + " res read - 0\n";
  }
  const History h = hist(body);
  CHECK_THROWS_AS(brute_force_oracle(h, Definition::AtomicAudit), BoundExceeded);
  CHECK(brute_force_oracle(h, Definition::AtomicAudit, 9).accepted);
}

TEST_CASE("verdict lines") {
  const History empty = hist(overlap("{}"));
  CHECK(format_verdict(check_atomic_with_atomic_audit(empty), Definition::AtomicAudit) ==
        "verdict rejected definition=1 condition=completeness ops=3");
  const Verdict ok = check_atomic_with_regular_audit(empty);
  CHECK(format_verdict(ok, Definition::RegularAudit).rfind("verdict accepted definition=2 witness=", 0) == 0);
  CHECK(parse_definition("2") == Definition::RegularAudit);
  CHECK_THROWS_AS(parse_definition("3"), UsageError);
}

TEST_CASE("random small histories: oracle agreement, witnesses and monotonicity") {
  std::mt19937_64 rng(2024);
  std::size_t accepted[2] = {0, 0};
  const int samples = 300;
  for (int i = 0; i < samples; ++i) {
    const History h = testing::random_history(rng, 6);
    CAPTURE(to_lines(h));
    const Verdict d1 = check_atomic_with_atomic_audit(h);
    const Verdict d2 = check_atomic_with_regular_audit(h);
    CHECK(d1.accepted == brute_force_oracle(h, Definition::AtomicAudit).accepted);
    CHECK(d2.accepted == brute_force_oracle(h, Definition::RegularAudit).accepted);
    if (d1.accepted) {
      check_witness(h, d1, Definition::AtomicAudit);
      CHECK(d2.accepted);
    } else {
      CHECK(d1.violation.has_value());
    }
    if (d2.accepted) check_witness(h, d2, Definition::RegularAudit);
    accepted[0] += d1.accepted;
    accepted[1] += d2.accepted;
  }
  // the generator produces both outcomes
  CHECK(accepted[0] > samples / 10);
  CHECK(accepted[0] < samples * 9 / 10);
  CHECK(accepted[1] > accepted[0]);
}

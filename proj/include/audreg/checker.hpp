#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "audreg/history.hpp"

namespace audreg {

/// 1: atomic with atomic audit. 2: atomic with regular audit.
enum class Definition : std::uint8_t { AtomicAudit = 1, RegularAudit = 2 };

enum class Condition : std::uint8_t {
  RegisterSemantics,  // reads and writes alone admit no linearization
  Completeness,       // an audit misses a read it must report
  StrongAccuracy,     // an audit reports a read not linearized before it
  Accuracy,           // an audit reports a read not invoked before its response
  AuditConsistency,   // each audit condition is satisfiable alone, not jointly
};

std::string_view to_string(Condition c);
/// Throws UsageError unless `text` is "1" or "2".
Definition parse_definition(std::string_view text);

struct Violation {
  Definition definition = Definition::AtomicAudit;
  Condition condition = Condition::RegisterSemantics;
  std::vector<OpId> ops;
  std::string detail;
};

struct Verdict {
  bool accepted = false;
  /// Linearization order of op ids (all objects, object by object). Under
  /// definition 2 audits are not part of it.
  std::optional<std::vector<OpId>> witness;
  std::optional<Violation> violation;
};

/// Both throw InputError for malformed histories and for a value written
/// twice to the same object.
Verdict check_atomic_with_atomic_audit(const History& h);
Verdict check_atomic_with_regular_audit(const History& h);
Verdict check(const History& h, Definition d);

/// Every read in `seq` returns the latest preceding write on its object,
/// or the object's initial value. Audits are skipped; an op of `h` that is
/// unknown or has no response makes the sequence illegal.
bool check_sequential_register(const std::vector<OpId>& seq, const History& h);

/// Every audit in `seq` returns exactly the (reader, value) pairs of the
/// reads on its object placed before it.
bool check_audit_conditions(const std::vector<OpId>& seq, const History& h);

/// Completeness and accuracy of every complete audit of `h`, judged in real
/// time on `h` itself.
bool check_regular_audit_conditions(const History& h);

/// `seq` orders a before b whenever a responds before b is invoked in `h`.
bool respects_real_time(const std::vector<OpId>& seq, const History& h);

/// The completion a witness describes: pending ops named in `witness` get
/// responses (reads answer the value current at their position), all other
/// pending ops are dropped.
History completion_for(const History& h, const std::vector<OpId>& witness);

/// Enumerates complete(h) and every permutation of each completion, applying
/// the predicates above directly. Throws BoundExceeded when `h` has more
/// than `bound` operations that can appear in a completion.
Verdict brute_force_oracle(const History& h, Definition d, std::size_t bound = 8);

/// `verdict accepted definition=1 witness=0,2,1` or
/// `verdict rejected definition=2 condition=completeness ops=3,4`.
std::string format_verdict(const Verdict& v, Definition d);

}  // namespace audreg

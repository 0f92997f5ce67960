#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "audreg/value.hpp"

namespace audreg {

enum class OpKind : std::uint8_t { Write, Read, Audit };
enum class Phase : std::uint8_t { Invoke, Respond };

using OpId = std::uint64_t;
using ObjectId = std::uint32_t;

/// Write responds with nothing, Read with a Value, Audit with an AuditSet.
using OpResult = std::variant<std::monostate, Value, AuditSet>;

struct Event {
  std::uint64_t seq = 0;
  ProcessId process;
  ObjectId object = 0;
  OpId op = 0;
  Phase phase = Phase::Invoke;
  OpKind kind = OpKind::Read;
  std::optional<Value> argument;
  OpResult result;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Per-object metadata: initial value and who may write, read and audit.
/// An absent writer means roles are unknown and are not enforced.
struct ObjectRoles {
  Value initial = Value::bottom();
  std::optional<ProcessId> writer;
  std::set<ProcessId> readers;
  std::set<ProcessId> auditors;

  friend bool operator==(const ObjectRoles&, const ObjectRoles&) = default;
};

/// An operation reconstructed from its invocation and (optional) response.
struct Operation {
  OpId id = 0;
  ProcessId process;
  ObjectId object = 0;
  OpKind kind = OpKind::Read;
  std::optional<Value> argument;
  OpResult result;
  std::uint64_t invoked_at = 0;
  std::optional<std::uint64_t> responded_at;

  bool complete() const { return responded_at.has_value(); }
  const Value& read_value() const { return std::get<Value>(result); }
  const AuditSet& audit_value() const { return std::get<AuditSet>(result); }
};

/// A sequence of invocation and response events over one or more objects.
class History {
 public:
  History() = default;
  explicit History(std::vector<Event> events, std::map<ObjectId, ObjectRoles> objects = {});

  const std::vector<Event>& events() const { return events_; }
  const std::map<ObjectId, ObjectRoles>& objects() const { return objects_; }

  /// Metadata for `object`, or default roles (initial ⊥, unenforced) if absent.
  ObjectRoles roles(ObjectId object) const;
  void set_roles(ObjectId object, ObjectRoles roles);

  void append(Event e) { events_.push_back(std::move(e)); }

  /// Throws InputError unless every op_id has one invocation followed by at
  /// most one matching response, each process has at most one pending
  /// operation at a time, sequence numbers strictly increase, results match
  /// their kind and role metadata (when present) is respected.
  void validate() const;

  /// Operations ordered by invocation.
  std::vector<Operation> operations() const;

  std::set<ObjectId> object_ids() const;
  History project(ObjectId object) const;

  friend bool operator==(const History&, const History&) = default;

 private:
  std::vector<Event> events_;
  std::map<ObjectId, ObjectRoles> objects_;
};

/// True iff both the invocation and the response of `op` appear in `h`.
/// Throws InputError for an unknown op id.
bool is_complete(const History& h, OpId op);

/// True iff `a` responds before `b` is invoked. A pending `a` precedes nothing.
bool precedes(const History& h, OpId a, OpId b);

/// Every value a Read may legally return on `object`: its initial value and
/// each written argument, in first-appearance order.
std::vector<Value> candidate_values(const History& h, ObjectId object);

/// Visits every history in complete(h). Each pending Read is either dropped
/// or answered with a candidate value, each pending Write is dropped or
/// answered, and pending Audits are always dropped. Appended responses follow
/// the last event in op_id order. Returning false from `visit` stops the walk.
void for_each_completion(const History& h, const std::function<bool(const History&)>& visit);

std::vector<History> completions(const History& h);

std::string_view to_string(OpKind kind);
std::string_view to_string(Phase phase);

}  // namespace audreg

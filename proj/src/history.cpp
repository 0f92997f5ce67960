#include "audreg/history.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

#include "audreg/errors.hpp"

namespace audreg {

std::string_view to_string(OpKind kind) {
  switch (kind) {
    case OpKind::Write: return "write";
    case OpKind::Read: return "read";
    case OpKind::Audit: return "audit";
  }
  return "?";
}

std::string_view to_string(Phase phase) { return phase == Phase::Invoke ? "inv" : "res"; }

History::History(std::vector<Event> events, std::map<ObjectId, ObjectRoles> objects)
    : events_(std::move(events)), objects_(std::move(objects)) {}

ObjectRoles History::roles(ObjectId object) const {
  auto it = objects_.find(object);
  return it == objects_.end() ? ObjectRoles{} : it->second;
}

void History::set_roles(ObjectId object, ObjectRoles roles) { objects_[object] = std::move(roles); }

namespace {

std::string op_label(const Event& e) { return "op " + std::to_string(e.op); }

bool result_matches(OpKind kind, const OpResult& r) {
  switch (kind) {
    case OpKind::Write: return std::holds_alternative<std::monostate>(r);
    case OpKind::Read: return std::holds_alternative<Value>(r);
    case OpKind::Audit: return std::holds_alternative<AuditSet>(r);
  }
  return false;
}

}  // namespace

void History::validate() const {
  std::unordered_map<OpId, const Event*> invoked;
  std::unordered_map<OpId, bool> responded;
  std::map<ProcessId, OpId> pending_by_process;
  std::optional<std::uint64_t> last_seq;

  for (const auto& e : events_) {
    if (last_seq && e.seq <= *last_seq) {
      throw InputError("event sequence numbers must strictly increase (seq " +
                       std::to_string(e.seq) + ")");
    }
    last_seq = e.seq;

    if (e.phase == Phase::Invoke) {
      if (invoked.contains(e.op)) throw InputError(op_label(e) + " invoked twice");
      if (pending_by_process.contains(e.process)) {
        throw InputError("process " + to_string(e.process) + " invokes " + op_label(e) +
                         " while op " + std::to_string(pending_by_process[e.process]) +
                         " is pending");
      }
      if ((e.kind == OpKind::Write) != e.argument.has_value()) {
        throw InputError(op_label(e) + ": only writes carry an argument");
      }
      if (e.argument && e.argument->is_bottom()) {
        throw InputError(op_label(e) + ": bottom cannot be written");
      }
      if (!std::holds_alternative<std::monostate>(e.result)) {
        throw InputError(op_label(e) + ": invocation carries a result");
      }
      auto roles_it = objects_.find(e.object);
      if (roles_it != objects_.end() && roles_it->second.writer) {
        const auto& roles = roles_it->second;
        const bool allowed = (e.kind == OpKind::Write && e.process == *roles.writer) ||
                             (e.kind == OpKind::Read && roles.readers.contains(e.process)) ||
                             (e.kind == OpKind::Audit && roles.auditors.contains(e.process));
        if (!allowed) {
          throw InputError(op_label(e) + ": process " + to_string(e.process) + " may not " +
                           std::string(to_string(e.kind)) + " object " + std::to_string(e.object));
        }
      }
      invoked.emplace(e.op, &e);
      pending_by_process.emplace(e.process, e.op);
    } else {
      auto it = invoked.find(e.op);
      if (it == invoked.end()) throw InputError(op_label(e) + " responds before invocation");
      if (responded[e.op]) throw InputError(op_label(e) + " responds twice");
      const Event& inv = *it->second;
      if (inv.process != e.process || inv.object != e.object || inv.kind != e.kind) {
        throw InputError(op_label(e) + ": response does not match its invocation");
      }
      if (!result_matches(e.kind, e.result)) throw InputError(op_label(e) + ": result has wrong type");
      responded[e.op] = true;
      pending_by_process.erase(e.process);
    }
  }
}

std::vector<Operation> History::operations() const {
  std::vector<Operation> ops;
  std::unordered_map<OpId, std::size_t> index;
  for (const auto& e : events_) {
    if (e.phase == Phase::Invoke) {
      index.emplace(e.op, ops.size());
      ops.push_back(Operation{e.op, e.process, e.object, e.kind, e.argument, {}, e.seq, {}});
    } else if (auto it = index.find(e.op); it != index.end()) {
      ops[it->second].result = e.result;
      ops[it->second].responded_at = e.seq;
    }
  }
  return ops;
}

std::set<ObjectId> History::object_ids() const {
  std::set<ObjectId> ids;
  for (const auto& [id, roles] : objects_) ids.insert(id);
  for (const auto& e : events_) ids.insert(e.object);
  return ids;
}

History History::project(ObjectId object) const {
  History out;
  for (const auto& e : events_) {
    if (e.object == object) out.events_.push_back(e);
  }
  if (auto it = objects_.find(object); it != objects_.end()) out.objects_.emplace(*it);
  return out;
}

namespace {

const Operation& find_op(const std::vector<Operation>& ops, OpId id) {
  auto it = std::find_if(ops.begin(), ops.end(), [id](const Operation& o) { return o.id == id; });
  if (it == ops.end()) throw InputError("unknown op id " + std::to_string(id));
  return *it;
}

}  // namespace

bool is_complete(const History& h, OpId op) { return find_op(h.operations(), op).complete(); }

bool precedes(const History& h, OpId a, OpId b) {
  const auto ops = h.operations();
  const auto& first = find_op(ops, a);
  const auto& second = find_op(ops, b);
  return first.responded_at && *first.responded_at < second.invoked_at;
}

std::vector<Value> candidate_values(const History& h, ObjectId object) {
  std::vector<Value> out{h.roles(object).initial};
  for (const auto& e : h.events()) {
    if (e.object == object && e.phase == Phase::Invoke && e.kind == OpKind::Write &&
        std::find(out.begin(), out.end(), *e.argument) == out.end()) {
      out.push_back(*e.argument);
    }
  }
  return out;
}

void for_each_completion(const History& h, const std::function<bool(const History&)>& visit) {
  std::vector<Operation> pending;
  for (auto& op : h.operations()) {
    if (!op.complete()) pending.push_back(std::move(op));
  }
  std::sort(pending.begin(), pending.end(),
            [](const Operation& a, const Operation& b) { return a.id < b.id; });

  std::map<ObjectId, std::vector<Value>> candidates;
  for (const auto& op : pending) {
    if (op.kind == OpKind::Read && !candidates.contains(op.object)) {
      candidates.emplace(op.object, candidate_values(h, op.object));
    }
  }

  const std::uint64_t base_seq = h.events().empty() ? 0 : h.events().back().seq + 1;

  // choice[i] == 0 drops pending[i]; k > 0 answers it (reads: candidate k-1).
  std::vector<std::size_t> choice(pending.size(), 0);
  auto option_count = [&](const Operation& op) -> std::size_t {
    switch (op.kind) {
      case OpKind::Audit: return 1;
      case OpKind::Write: return 2;
      case OpKind::Read: return 1 + candidates.at(op.object).size();
    }
    return 1;
  };

  std::function<bool(std::size_t)> walk = [&](std::size_t i) -> bool {
    if (i == pending.size()) {
      std::set<OpId> dropped;
      std::vector<Event> appended;
      std::uint64_t seq = base_seq;
      for (std::size_t k = 0; k < pending.size(); ++k) {
        const auto& op = pending[k];
        if (choice[k] == 0) {
          dropped.insert(op.id);
          continue;
        }
        Event e{seq++, op.process, op.object, op.id, Phase::Respond, op.kind, {}, {}};
        if (op.kind == OpKind::Read) e.result = candidates.at(op.object)[choice[k] - 1];
        appended.push_back(std::move(e));
      }
      std::vector<Event> events;
      events.reserve(h.events().size() + appended.size());
      for (const auto& e : h.events()) {
        if (!dropped.contains(e.op)) events.push_back(e);
      }
      events.insert(events.end(), appended.begin(), appended.end());
      return visit(History(std::move(events), h.objects()));
    }
    for (std::size_t c = 0; c < option_count(pending[i]); ++c) {
      choice[i] = c;
      if (!walk(i + 1)) return false;
    }
    return true;
  };
  walk(0);
}

std::vector<History> completions(const History& h) {
  std::vector<History> out;
  for_each_completion(h, [&](const History& c) {
    out.push_back(c);
    return true;
  });
  return out;
}

}  // namespace audreg

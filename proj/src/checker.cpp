#include "audreg/checker.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <unordered_set>

#include "audreg/errors.hpp"

namespace audreg {

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::RegisterSemantics: return "register-semantics";
    case Condition::Completeness: return "completeness";
    case Condition::StrongAccuracy: return "strong-accuracy";
    case Condition::Accuracy: return "accuracy";
    case Condition::AuditConsistency: return "audit-consistency";
  }
  return "?";
}

Definition parse_definition(std::string_view text) {
  if (text == "1") return Definition::AtomicAudit;
  if (text == "2") return Definition::RegularAudit;
  throw UsageError("definition must be 1 or 2, got '" + std::string(text) + "'");
}

namespace {

class Bits {
 public:
  Bits() = default;
  explicit Bits(std::size_t n) : w_((n + 63) / 64, 0) {}

  bool test(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::size_t i) { w_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  bool subset_of(const Bits& o) const {
    for (std::size_t k = 0; k < w_.size(); ++k) {
      if (w_[k] & ~o.w_[k]) return false;
    }
    return true;
  }
  std::size_t hash() const {
    std::size_t h = w_.size();
    for (auto x : w_) h = (h ^ x) * 0x100000001b3ULL + (h >> 29);
    return h;
  }
  friend bool operator==(const Bits&, const Bits&) = default;

 private:
  std::vector<std::uint64_t> w_;
};

enum class AuditMode : std::uint8_t { Exact, Ignore, Superset, Subset };

/// One object's operations, pre-indexed for the search.
struct Problem {
  std::vector<Operation> ops;  // by op id
  std::vector<Value> candidates;
  std::vector<std::optional<std::size_t>> value_idx;  // write argument or read result
  std::map<AuditPair, std::size_t> pair_idx;
  std::vector<std::vector<std::size_t>> read_pairs;  // per op, per candidate: pair index (reads only)
  std::vector<Bits> audit_bits;                      // reported pairs inside the universe
  std::vector<bool> audit_extra;                     // reported a pair outside the universe
};

std::optional<std::size_t> index_of(const std::vector<Value>& vs, const Value& v) {
  const auto it = std::find(vs.begin(), vs.end(), v);
  if (it == vs.end()) return std::nullopt;
  return static_cast<std::size_t>(it - vs.begin());
}

Problem build_problem(const History& h, ObjectId object) {
  Problem pb;
  pb.ops = h.project(object).operations();
  std::sort(pb.ops.begin(), pb.ops.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  pb.candidates = candidate_values(h, object);
  const std::size_t m = pb.ops.size();
  pb.value_idx.resize(m);
  pb.read_pairs.resize(m);
  auto pair_of = [&pb](const AuditPair& p) {
    return pb.pair_idx.emplace(p, pb.pair_idx.size()).first->second;
  };
  for (std::size_t i = 0; i < m; ++i) {
    const auto& op = pb.ops[i];
    if (op.kind == OpKind::Write) {
      pb.value_idx[i] = index_of(pb.candidates, *op.argument);
    } else if (op.kind == OpKind::Read) {
      if (op.complete()) pb.value_idx[i] = index_of(pb.candidates, op.read_value());
      for (const auto& c : pb.candidates) {
        pb.read_pairs[i].push_back(op.complete() && op.read_value() != c ? SIZE_MAX : pair_of({op.process, c}));
      }
    }
  }
  pb.audit_bits.assign(m, Bits(pb.pair_idx.size()));
  pb.audit_extra.assign(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& op = pb.ops[i];
    if (op.kind != OpKind::Audit || !op.complete()) continue;
    for (const auto& p : op.audit_value()) {
      const auto it = pb.pair_idx.find(p);
      if (it == pb.pair_idx.end()) {
        pb.audit_extra[i] = true;
      } else {
        pb.audit_bits[i].set(it->second);
      }
    }
  }
  return pb;
}

struct SearchKey {
  Bits done;
  std::size_t value;
  Bits pairs;
  friend bool operator==(const SearchKey&, const SearchKey&) = default;
};

struct SearchKeyHash {
  std::size_t operator()(const SearchKey& k) const {
    return k.done.hash() ^ (k.pairs.hash() * 31) ^ (k.value * 0x9e3779b97f4a7c15ULL);
  }
};

/// DFS over linearization prefixes, op ids ascending, memoizing dead states.
class Search {
 public:
  Search(const Problem& pb, Definition def, AuditMode mode, std::optional<std::size_t> only_audit = std::nullopt,
         std::vector<std::optional<std::size_t>> forced = {})
      : pb_(pb), def_(def), mode_(mode), only_audit_(only_audit), forced_(std::move(forced)) {
    const std::size_t m = pb.ops.size();
    forced_.resize(m);
    included_.assign(m, false);
    mandatory_ = Bits(m);
    for (std::size_t i = 0; i < m; ++i) {
      const auto& op = pb.ops[i];
      bool inc = false;
      if (op.kind == OpKind::Audit) {
        inc = def == Definition::AtomicAudit && op.complete();
      } else if (op.kind == OpKind::Write || op.complete() || def == Definition::AtomicAudit) {
        inc = true;
      } else {
        inc = forced_[i].has_value();
      }
      included_[i] = inc;
      if (inc && (op.complete() || forced_[i])) mandatory_.set(i);
    }
    preds_.assign(m, Bits(m));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (included_[i] && included_[j] && pb.ops[j].complete() &&
            *pb.ops[j].responded_at < pb.ops[i].invoked_at) {
          preds_[i].set(j);
        }
      }
    }
    track_pairs_ = def == Definition::AtomicAudit && mode != AuditMode::Ignore;
  }

  bool run() {
    Bits done(pb_.ops.size());
    Bits pairs(track_pairs_ ? pb_.pair_idx.size() : 0);
    // Candidate 0 is the initial value.
    return dfs(done, 0, pairs);
  }

  std::vector<OpId> witness() const {
    std::vector<OpId> out;
    for (auto i : path_) out.push_back(pb_.ops[i].id);
    return out;
  }
  std::vector<OpId> blocked() const {
    std::vector<OpId> out;
    for (auto i : blocked_) out.push_back(pb_.ops[i].id);
    return out;
  }

 private:
  bool audit_ok(std::size_t i, const Bits& pairs) const {
    if (mode_ == AuditMode::Ignore || (only_audit_ && *only_audit_ != i)) return true;
    const auto& bits = pb_.audit_bits[i];
    switch (mode_) {
      case AuditMode::Exact: return !pb_.audit_extra[i] && bits == pairs;
      case AuditMode::Superset: return pairs.subset_of(bits);
      case AuditMode::Subset: return !pb_.audit_extra[i] && bits.subset_of(pairs);
      case AuditMode::Ignore: return true;
    }
    return false;
  }

  bool dfs(Bits& done, std::size_t value, Bits& pairs) {
    if (mandatory_.subset_of(done)) return true;
    SearchKey key{done, value, pairs};
    if (failed_.contains(key)) return false;
    std::vector<std::size_t> blocked_here;
    for (std::size_t i = 0; i < pb_.ops.size(); ++i) {
      if (!included_[i] || done.test(i) || !preds_[i].subset_of(done)) continue;
      const auto& op = pb_.ops[i];
      std::size_t next_value = value;
      Bits next_pairs = pairs;
      if (op.kind == OpKind::Write) {
        next_value = *pb_.value_idx[i];
      } else if (op.kind == OpKind::Read) {
        const bool legal = op.complete() ? pb_.value_idx[i] == value : (!forced_[i] || *forced_[i] == value);
        if (!legal) {
          blocked_here.push_back(i);
          continue;
        }
        if (track_pairs_) next_pairs.set(pb_.read_pairs[i][value]);
      } else if (!audit_ok(i, pairs)) {
        blocked_here.push_back(i);
        continue;
      }
      done.set(i);
      path_.push_back(i);
      if (dfs(done, next_value, next_pairs)) return true;
      path_.pop_back();
      done = key.done;
    }
    if (!recorded_ || path_.size() > best_depth_) {
      recorded_ = true;
      best_depth_ = path_.size();
      blocked_ = blocked_here;
    }
    failed_.insert(std::move(key));
    return false;
  }

  const Problem& pb_;
  Definition def_;
  AuditMode mode_;
  std::optional<std::size_t> only_audit_;
  std::vector<std::optional<std::size_t>> forced_;
  std::vector<bool> included_;
  Bits mandatory_;
  std::vector<Bits> preds_;
  bool track_pairs_ = false;
  std::unordered_set<SearchKey, SearchKeyHash> failed_;
  std::vector<std::size_t> path_;
  bool recorded_ = false;
  std::size_t best_depth_ = 0;
  std::vector<std::size_t> blocked_;
};

void check_input(const History& h) {
  h.validate();
  std::map<ObjectId, std::set<Value>> written;
  for (const auto& e : h.events()) {
    if (e.kind == OpKind::Write && e.phase == Phase::Invoke && !written[e.object].insert(*e.argument).second) {
      throw InputError("value " + to_string(*e.argument) + " is written twice to object " +
                       std::to_string(e.object));
    }
  }
}

Verdict reject(Definition d, Condition c, std::vector<OpId> ops, std::string detail) {
  Verdict v;
  v.violation = Violation{d, c, std::move(ops), std::move(detail)};
  return v;
}

std::vector<OpId> offending_audits(const Problem& pb, AuditMode mode) {
  std::vector<OpId> out;
  for (std::size_t i = 0; i < pb.ops.size(); ++i) {
    if (pb.ops[i].kind != OpKind::Audit || !pb.ops[i].complete()) continue;
    if (!Search(pb, Definition::AtomicAudit, mode, i).run()) out.push_back(pb.ops[i].id);
  }
  if (out.empty()) {
    for (const auto& op : pb.ops) {
      if (op.kind == OpKind::Audit && op.complete()) out.push_back(op.id);
    }
  }
  return out;
}

Verdict explain_atomic(const Problem& pb, ObjectId object) {
  const auto d = Definition::AtomicAudit;
  const std::string where = " on object " + std::to_string(object);
  if (Search s(pb, d, AuditMode::Ignore); !s.run()) {
    return reject(d, Condition::RegisterSemantics, s.blocked(),
                  "reads and writes admit no linearization" + where);
  }
  if (!Search(pb, d, AuditMode::Superset).run()) {
    return reject(d, Condition::Completeness, offending_audits(pb, AuditMode::Superset),
                  "an audit misses a read linearized before it" + where);
  }
  if (!Search(pb, d, AuditMode::Subset).run()) {
    return reject(d, Condition::StrongAccuracy, offending_audits(pb, AuditMode::Subset),
                  "an audit reports a read that cannot precede it" + where);
  }
  return reject(d, Condition::AuditConsistency, offending_audits(pb, AuditMode::Exact),
                "audits cannot all be exact in one linearization" + where);
}

}  // namespace

Verdict check_atomic_with_atomic_audit(const History& h) {
  check_input(h);
  Verdict out;
  std::vector<OpId> witness;
  for (auto object : h.object_ids()) {
    const Problem pb = build_problem(h, object);
    Search s(pb, Definition::AtomicAudit, AuditMode::Exact);
    if (!s.run()) return explain_atomic(pb, object);
    const auto part = s.witness();
    witness.insert(witness.end(), part.begin(), part.end());
  }
  out.accepted = true;
  out.witness = std::move(witness);
  return out;
}

Verdict check_atomic_with_regular_audit(const History& h) {
  check_input(h);
  const auto d = Definition::RegularAudit;
  std::vector<OpId> witness;
  for (auto object : h.object_ids()) {
    const Problem pb = build_problem(h, object);
    const std::string where = " on object " + std::to_string(object);
    const std::size_t m = pb.ops.size();
    std::optional<Verdict> audit_failure;

    // Completeness is decided by real time alone.
    for (std::size_t a = 0; a < m && !audit_failure; ++a) {
      const auto& au = pb.ops[a];
      if (au.kind != OpKind::Audit || !au.complete()) continue;
      for (const auto& r : pb.ops) {
        if (r.kind == OpKind::Read && r.complete() && *r.responded_at < au.invoked_at &&
            !au.audit_value().contains({r.process, r.read_value()})) {
          audit_failure = reject(d, Condition::Completeness, {r.id, au.id},
                                 "audit misses a read that completed before it was invoked" + where);
          break;
        }
      }
    }

    // Accuracy pins the value of pending reads that alone can justify a pair.
    std::vector<std::optional<std::size_t>> forced(m);
    std::vector<std::optional<OpId>> forced_by(m);
    for (std::size_t a = 0; a < m && !audit_failure; ++a) {
      const auto& au = pb.ops[a];
      if (au.kind != OpKind::Audit || !au.complete()) continue;
      for (const auto& pair : au.audit_value()) {
        bool supported = false;
        std::optional<std::size_t> pending;
        for (std::size_t r = 0; r < m; ++r) {
          const auto& rd = pb.ops[r];
          if (rd.kind != OpKind::Read || rd.process != pair.reader || rd.invoked_at >= *au.responded_at) continue;
          if (rd.complete()) {
            supported = supported || rd.read_value() == pair.value;
          } else {
            pending = r;
          }
        }
        if (supported) continue;
        const auto vi = index_of(pb.candidates, pair.value);
        if (!pending || !vi) {
          audit_failure = reject(d, Condition::Accuracy, {au.id},
                                 "audit reports (" + to_string(pair.reader) + "," + to_string(pair.value) +
                                     ") with no such read invoked before its response" + where);
          break;
        }
        if (forced[*pending] && *forced[*pending] != *vi) {
          audit_failure = reject(d, Condition::Accuracy, {*forced_by[*pending], au.id, pb.ops[*pending].id},
                                 "audits need different values from one pending read" + where);
          break;
        }
        forced[*pending] = vi;
        forced_by[*pending] = au.id;
      }
    }

    if (audit_failure) {
      if (Search s(pb, d, AuditMode::Ignore); !s.run()) {
        return reject(d, Condition::RegisterSemantics, s.blocked(),
                      "reads and writes admit no linearization" + where);
      }
      return *audit_failure;
    }
    Search s(pb, d, AuditMode::Ignore, std::nullopt, forced);
    if (!s.run()) {
      if (Search free(pb, d, AuditMode::Ignore); !free.run()) {
        return reject(d, Condition::RegisterSemantics, free.blocked(),
                      "reads and writes admit no linearization" + where);
      }
      std::vector<OpId> ops;
      for (std::size_t i = 0; i < m; ++i) {
        if (forced[i]) ops.push_back(*forced_by[i]);
      }
      return reject(d, Condition::Accuracy, ops,
                    "pending reads cannot return the values audits report" + where);
    }
    const auto part = s.witness();
    witness.insert(witness.end(), part.begin(), part.end());
  }
  Verdict out;
  out.accepted = true;
  out.witness = std::move(witness);
  return out;
}

Verdict check(const History& h, Definition d) {
  return d == Definition::AtomicAudit ? check_atomic_with_atomic_audit(h) : check_atomic_with_regular_audit(h);
}

// ---------------------------------------------------------------------------
// Definitional predicates

namespace {

std::map<OpId, Operation> ops_by_id(const History& h) {
  std::map<OpId, Operation> out;
  for (auto& op : h.operations()) out.emplace(op.id, std::move(op));
  return out;
}

}  // namespace

bool check_sequential_register(const std::vector<OpId>& seq, const History& h) {
  const auto ops = ops_by_id(h);
  std::map<ObjectId, Value> current;
  for (auto id : seq) {
    const auto it = ops.find(id);
    if (it == ops.end() || !it->second.complete()) return false;
    const auto& op = it->second;
    if (!current.contains(op.object)) current[op.object] = h.roles(op.object).initial;
    if (op.kind == OpKind::Write) {
      current[op.object] = *op.argument;
    } else if (op.kind == OpKind::Read && op.read_value() != current[op.object]) {
      return false;
    }
  }
  return true;
}

bool check_audit_conditions(const std::vector<OpId>& seq, const History& h) {
  const auto ops = ops_by_id(h);
  std::map<ObjectId, AuditSet> seen;
  for (auto id : seq) {
    const auto it = ops.find(id);
    if (it == ops.end() || !it->second.complete()) return false;
    const auto& op = it->second;
    if (op.kind == OpKind::Read) {
      seen[op.object].insert({op.process, op.read_value()});
    } else if (op.kind == OpKind::Audit && op.audit_value() != seen[op.object]) {
      return false;
    }
  }
  return true;
}

bool check_regular_audit_conditions(const History& h) {
  const auto ops = h.operations();
  for (const auto& a : ops) {
    if (a.kind != OpKind::Audit || !a.complete()) continue;
    for (const auto& r : ops) {
      if (r.kind == OpKind::Read && r.object == a.object && r.complete() && *r.responded_at < a.invoked_at &&
          !a.audit_value().contains({r.process, r.read_value()})) {
        return false;
      }
    }
    for (const auto& pair : a.audit_value()) {
      const bool found = std::any_of(ops.begin(), ops.end(), [&](const Operation& r) {
        return r.kind == OpKind::Read && r.object == a.object && r.complete() && r.process == pair.reader &&
               r.read_value() == pair.value && r.invoked_at < *a.responded_at;
      });
      if (!found) return false;
    }
  }
  return true;
}

bool respects_real_time(const std::vector<OpId>& seq, const History& h) {
  const auto ops = ops_by_id(h);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    for (std::size_t j = i + 1; j < seq.size(); ++j) {
      const auto& later = ops.at(seq[i]);
      const auto& earlier = ops.at(seq[j]);
      if (earlier.complete() && *earlier.responded_at < later.invoked_at) return false;
    }
  }
  return true;
}

History completion_for(const History& h, const std::vector<OpId>& witness) {
  const auto ops = ops_by_id(h);
  std::map<ObjectId, Value> current;
  std::map<OpId, OpResult> answers;
  for (auto id : witness) {
    const auto& op = ops.at(id);
    if (!current.contains(op.object)) current[op.object] = h.roles(op.object).initial;
    if (op.kind == OpKind::Write) {
      current[op.object] = *op.argument;
      if (!op.complete()) answers[id] = std::monostate{};
    } else if (op.kind == OpKind::Read && !op.complete()) {
      answers[id] = current[op.object];
    }
  }
  std::vector<Event> events;
  std::set<OpId> pending;
  for (const auto& [id, op] : ops) {
    if (!op.complete()) pending.insert(id);
  }
  for (const auto& e : h.events()) {
    if (!pending.contains(e.op) || answers.contains(e.op)) events.push_back(e);
  }
  std::uint64_t seq = h.events().empty() ? 0 : h.events().back().seq + 1;
  for (const auto& [id, result] : answers) {
    const auto& op = ops.at(id);
    Event e;
    e.seq = seq++;
    e.process = op.process;
    e.object = op.object;
    e.op = id;
    e.phase = Phase::Respond;
    e.kind = op.kind;
    e.result = result;
    events.push_back(std::move(e));
  }
  return History(std::move(events), h.objects());
}

Verdict brute_force_oracle(const History& h, Definition d, std::size_t bound) {
  check_input(h);
  std::size_t size = 0;
  for (const auto& op : h.operations()) {
    if (op.kind != OpKind::Audit || op.complete()) ++size;
  }
  if (size > bound) {
    throw BoundExceeded("oracle refuses histories with more than " + std::to_string(bound) + " operations");
  }
  bool any_register_order = false;
  std::optional<std::vector<OpId>> found;
  for_each_completion(h, [&](const History& hc) {
    const bool audits_ok = d == Definition::AtomicAudit || check_regular_audit_conditions(hc);
    std::vector<OpId> seq;
    for (const auto& op : hc.operations()) {
      if (d == Definition::AtomicAudit || op.kind != OpKind::Audit) seq.push_back(op.id);
    }
    std::sort(seq.begin(), seq.end());
    do {
      if (!respects_real_time(seq, hc) || !check_sequential_register(seq, hc)) continue;
      any_register_order = true;
      if (!audits_ok) break;
      if (d == Definition::AtomicAudit && !check_audit_conditions(seq, hc)) continue;
      found = seq;
      return false;
    } while (std::next_permutation(seq.begin(), seq.end()));
    return true;
  });
  if (found) {
    Verdict v;
    v.accepted = true;
    v.witness = std::move(found);
    return v;
  }
  if (!any_register_order) return reject(d, Condition::RegisterSemantics, {}, "no legal register order");
  if (d == Definition::AtomicAudit) return reject(d, Condition::AuditConsistency, {}, "no order satisfies the audits");
  return reject(d, Condition::Accuracy, {}, "no completion satisfies the audits");
}

std::string format_verdict(const Verdict& v, Definition d) {
  auto join = [](const std::vector<OpId>& ids) {
    if (ids.empty()) return std::string("-");
    std::string out;
    for (auto id : ids) {
      if (!out.empty()) out += ',';
      out += std::to_string(id);
    }
    return out;
  };
  const std::string def = " definition=" + std::to_string(static_cast<int>(d));
  if (v.accepted) return "verdict accepted" + def + " witness=" + join(v.witness.value_or(std::vector<OpId>{}));
  const auto& vio = *v.violation;
  return "verdict rejected" + def + " condition=" + std::string(to_string(vio.condition)) + " ops=" + join(vio.ops);
}

}  // namespace audreg

#include "audreg/runtime.hpp"

#include "audreg/errors.hpp"

namespace audreg {

OpId Recorder::invoke(ProcessId process, ObjectId object, OpKind kind,
                      std::optional<Value> argument) {
  const OpId op = next_op_++;
  history_.append(Event{clock_->next(), process, object, op, Phase::Invoke, kind, argument, {}});
  open_.emplace(op, Open{process, object, kind});
  return op;
}

void Recorder::respond(OpId op, OpResult result) {
  auto it = open_.find(op);
  if (it == open_.end()) throw UsageError("respond for unknown or finished op " + std::to_string(op));
  const auto [process, object, kind] = it->second;
  open_.erase(it);
  history_.append(Event{clock_->next(), process, object, op, Phase::Respond, kind, {}, std::move(result)});
}

namespace detail {

Contents apply_primitive(ProcessContext& ctx, const PrimitiveCall& call, bool* success) {
  const Accessor who{ctx.id(), ctx.current_op};
  auto& mem = ctx.memory();
  switch (call.kind) {
    case PrimitiveKind::Read:
      return mem.read(call.cell, who);
    case PrimitiveKind::Write:
      mem.write(call.cell, call.first, who);
      return Vacant{};
    case PrimitiveKind::Swap:
      return mem.swap(call.cell, call.first, who);
    case PrimitiveKind::FetchAdd:
      return mem.fetch_add(call.cell, std::get<Word>(call.first), who);
    case PrimitiveKind::CompareAndSwap:
      *success = mem.compare_and_swap(call.cell, call.first, call.second, who);
      return Vacant{};
  }
  return Vacant{};
}

}  // namespace detail

}  // namespace audreg

#pragma once

#include <coroutine>
#include <map>
#include <optional>

#include "audreg/history.hpp"
#include "audreg/memory.hpp"
#include "audreg/task.hpp"

namespace audreg {

/// Assigns op ids and records invocation/response events on the shared clock.
class Recorder {
 public:
  explicit Recorder(SequenceClock& clock) : clock_(&clock) {}

  OpId invoke(ProcessId process, ObjectId object, OpKind kind, std::optional<Value> argument);
  void respond(OpId op, OpResult result);

  void set_roles(ObjectId object, ObjectRoles roles) { history_.set_roles(object, std::move(roles)); }
  const History& history() const { return history_; }

 private:
  struct Open {
    ProcessId process;
    ObjectId object;
    OpKind kind;
  };

  SequenceClock* clock_;
  History history_;
  std::map<OpId, Open> open_;
  OpId next_op_ = 0;
};

enum class StepOutcome : std::uint8_t { Continue, Responded, Finished };

class ProcessContext;

namespace detail {

struct PrimitiveCall {
  PrimitiveKind kind;
  CellId cell;
  Contents first;
  Contents second;
};

Contents apply_primitive(ProcessContext& ctx, const PrimitiveCall& call, bool* success);

}  // namespace detail

/// Suspends the calling coroutine in front of one shared-memory primitive.
/// The primitive itself runs when the scheduler next steps the process.
template <typename R>
class PrimitiveAwaiter {
 public:
  PrimitiveAwaiter(ProcessContext& ctx, detail::PrimitiveCall call)
      : ctx_(&ctx), call_(std::move(call)) {}

  bool await_ready() const noexcept { return false; }
  void await_suspend(std::coroutine_handle<> h) noexcept;
  R await_resume() {
    bool success = false;
    Contents out = detail::apply_primitive(*ctx_, call_, &success);
    if constexpr (std::is_same_v<R, bool>) {
      return success;
    } else if constexpr (std::is_same_v<R, Word>) {
      return std::get<Word>(std::move(out));
    } else if constexpr (std::is_same_v<R, Contents>) {
      return out;
    }
  }

 private:
  ProcessContext* ctx_;
  detail::PrimitiveCall call_;
};

/// Execution context of one simulated process: its identity, the memory it
/// touches, and the coroutine parked in front of its next primitive.
class ProcessContext {
 public:
  ProcessContext(ProcessId id, Memory& memory, Recorder& recorder)
      : id_(id), memory_(&memory), recorder_(&recorder) {}

  ProcessId id() const { return id_; }
  Memory& memory() { return *memory_; }
  Recorder& recorder() { return *recorder_; }

  PrimitiveAwaiter<Contents> read(CellId cell) {
    return {*this, {PrimitiveKind::Read, cell, Vacant{}, Vacant{}}};
  }
  PrimitiveAwaiter<void> write(CellId cell, Contents v) {
    return {*this, {PrimitiveKind::Write, cell, std::move(v), Vacant{}}};
  }
  PrimitiveAwaiter<Contents> swap(CellId cell, Contents v) {
    return {*this, {PrimitiveKind::Swap, cell, std::move(v), Vacant{}}};
  }
  PrimitiveAwaiter<Word> fetch_add(CellId cell, Word addend) {
    return {*this, {PrimitiveKind::FetchAdd, cell, std::move(addend), Vacant{}}};
  }
  PrimitiveAwaiter<bool> compare_and_swap(CellId cell, Contents expected, Contents desired) {
    return {*this, {PrimitiveKind::CompareAndSwap, cell, std::move(expected), std::move(desired)}};
  }

  /// High-level operation in progress, stamped onto primitive records.
  std::optional<OpId> current_op;

  bool parked() const { return static_cast<bool>(parked_); }
  std::coroutine_handle<> take_parked() { return std::exchange(parked_, {}); }
  void park(std::coroutine_handle<> h) { parked_ = h; }

  /// Set by the recorder helpers when a high-level operation responds.
  bool responded_flag = false;

 private:
  ProcessId id_;
  Memory* memory_;
  Recorder* recorder_;
  std::coroutine_handle<> parked_;
};

template <typename R>
void PrimitiveAwaiter<R>::await_suspend(std::coroutine_handle<> h) noexcept {
  ctx_->park(h);
}

}  // namespace audreg

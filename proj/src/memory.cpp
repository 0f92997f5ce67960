#include "audreg/memory.hpp"

#include <algorithm>

#include "audreg/errors.hpp"

namespace audreg {

std::string to_string(const Contents& c) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Word>) {
          return x.str();
        } else if constexpr (std::is_same_v<T, Vacant>) {
          return "~";
        } else {
          return to_string(x);
        }
      },
      c);
}

std::string_view to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::Read: return "read";
    case PrimitiveKind::Write: return "write";
    case PrimitiveKind::Swap: return "swap";
    case PrimitiveKind::FetchAdd: return "fetch_add";
    case PrimitiveKind::CompareAndSwap: return "cas";
  }
  return "?";
}

SimCell::SimCell(CellId id, CellFlavor flavor, Contents initial)
    : id_(id), flavor_(flavor), initial_(initial), contents_(std::move(initial)) {}

Memory::Memory(SequenceClock& clock, unsigned width_guard_bits)
    : clock_(&clock), width_guard_(width_guard_bits) {}

CellId Memory::make_word_cell(Word initial) {
  const auto id = static_cast<CellId>(cells_.size());
  SimCell probe(id, CellFlavor::Word, Contents(initial));
  check_store(probe, probe.contents());
  cells_.push_back(std::move(probe));
  return id;
}

CellId Memory::make_value_cell(Contents initial) {
  if (std::holds_alternative<Word>(initial)) throw CellTypeError("value cell cannot hold a word");
  const auto id = static_cast<CellId>(cells_.size());
  cells_.emplace_back(id, CellFlavor::Value, std::move(initial));
  return id;
}

SimCell& Memory::at(CellId id) {
  if (id >= cells_.size()) throw UsageError("unknown cell " + std::to_string(id));
  return cells_[id];
}

void Memory::check_store(const SimCell& cell, const Contents& value) const {
  const bool is_word = std::holds_alternative<Word>(value);
  if (is_word != (cell.flavor() == CellFlavor::Word)) {
    throw CellTypeError("cell " + std::to_string(cell.id()) + " cannot store " + to_string(value));
  }
  if (is_word) {
    const auto& w = std::get<Word>(value);
    if (w < 0) throw CellTypeError("word cells hold nonnegative integers");
    if (w != 0 && boost::multiprecision::msb(w) >= width_guard_) {
      throw WidthError("cell " + std::to_string(cell.id()) + " exceeds the " +
                       std::to_string(width_guard_) + "-bit width guard");
    }
  }
}

PrimitiveRecord& Memory::record(SimCell& cell, PrimitiveKind kind, const Accessor& who) {
  PrimitiveRecord r;
  r.seq = clock_->next();
  r.process = who.process;
  r.cell = cell.id();
  r.op = who.op;
  r.kind = kind;
  cell.trace_.push_back(std::move(r));
  return cell.trace_.back();
}

Contents Memory::read(CellId id, const Accessor& who) {
  auto& cell = at(id);
  auto& r = record(cell, PrimitiveKind::Read, who);
  r.returned = cell.contents_;
  return cell.contents_;
}

void Memory::write(CellId id, Contents value, const Accessor& who) {
  auto& cell = at(id);
  check_store(cell, value);
  auto& r = record(cell, PrimitiveKind::Write, who);
  r.args.push_back(value);
  cell.contents_ = std::move(value);
}

Contents Memory::swap(CellId id, Contents value, const Accessor& who) {
  auto& cell = at(id);
  check_store(cell, value);
  auto& r = record(cell, PrimitiveKind::Swap, who);
  r.args.push_back(value);
  Contents old = std::exchange(cell.contents_, std::move(value));
  r.returned = old;
  return old;
}

Word Memory::fetch_add(CellId id, const Word& addend, const Accessor& who) {
  auto& cell = at(id);
  if (cell.flavor() != CellFlavor::Word) {
    throw CellTypeError("fetch_add on value cell " + std::to_string(id));
  }
  Word old = std::get<Word>(cell.contents_);
  Contents updated = Word(old + addend);
  check_store(cell, updated);
  auto& r = record(cell, PrimitiveKind::FetchAdd, who);
  r.args.push_back(addend);
  r.returned = old;
  cell.contents_ = std::move(updated);
  return old;
}

bool Memory::compare_and_swap(CellId id, const Contents& expected, Contents desired,
                              const Accessor& who) {
  auto& cell = at(id);
  check_store(cell, desired);
  auto& r = record(cell, PrimitiveKind::CompareAndSwap, who);
  r.args.push_back(expected);
  r.args.push_back(desired);
  const bool hit = cell.contents_ == expected;
  if (hit) cell.contents_ = std::move(desired);
  r.success = hit;
  return hit;
}

std::vector<PrimitiveRecord> Memory::trace() const {
  std::vector<PrimitiveRecord> out;
  for (const auto& c : cells_) out.insert(out.end(), c.trace().begin(), c.trace().end());
  std::sort(out.begin(), out.end(),
            [](const PrimitiveRecord& a, const PrimitiveRecord& b) { return a.seq < b.seq; });
  return out;
}

std::optional<std::size_t> replay_mismatch(const SimCell& cell) {
  Contents state = cell.initial();
  const auto& trace = cell.trace();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& r = trace[i];
    bool ok = true;
    switch (r.kind) {
      case PrimitiveKind::Read:
        ok = r.returned && *r.returned == state;
        break;
      case PrimitiveKind::Write:
        state = r.args.at(0);
        break;
      case PrimitiveKind::Swap:
        ok = r.returned && *r.returned == state;
        state = r.args.at(0);
        break;
      case PrimitiveKind::FetchAdd:
        ok = r.returned && *r.returned == state && std::holds_alternative<Word>(state);
        if (ok) state = Word(std::get<Word>(state) + std::get<Word>(r.args.at(0)));
        break;
      case PrimitiveKind::CompareAndSwap: {
        const bool hit = state == r.args.at(0);
        ok = r.success && *r.success == hit;
        if (hit) state = r.args.at(1);
        break;
      }
    }
    if (!ok) return i;
  }
  if (state != cell.contents()) return trace.size();
  return std::nullopt;
}

std::string format_primitive(const PrimitiveRecord& r) {
  std::string args;
  for (std::size_t i = 0; i < r.args.size(); ++i) {
    if (i) args += ';';
    args += to_string(r.args[i]);
  }
  if (args.empty()) args = "-";
  std::string result = "-";
  if (r.returned) result = to_string(*r.returned);
  if (r.success) result = *r.success ? "true" : "false";
  return std::to_string(r.seq) + ' ' + to_string(r.process) + ' ' + std::to_string(r.cell) + ' ' +
         (r.op ? std::to_string(*r.op) : std::string("-")) + " prim " +
         std::string(to_string(r.kind)) + ' ' + args + ' ' + result;
}

}  // namespace audreg

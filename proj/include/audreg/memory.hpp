#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "audreg/history.hpp"
#include "audreg/value.hpp"

namespace audreg {

/// Unbounded nonnegative machine word for the bit-packed register encodings.
using Word = boost::multiprecision::cpp_int;

/// Content of a value cell that holds nothing yet. Distinct from Value::bottom(),
/// which is an ordinary register value.
struct Vacant {
  friend constexpr bool operator==(Vacant, Vacant) { return true; }
};

/// Cell contents. Word cells only ever hold a Word; value cells hold any of
/// the symbolic alternatives.
using Contents = std::variant<Word, Vacant, Value, AuditSet>;

std::string to_string(const Contents& c);

enum class CellFlavor : std::uint8_t { Word, Value };
enum class PrimitiveKind : std::uint8_t { Read, Write, Swap, FetchAdd, CompareAndSwap };

std::string_view to_string(PrimitiveKind kind);

using CellId = std::uint32_t;

/// Global step clock shared between the event recorder and the memory, so
/// histories and primitive traces interleave into one total order.
class SequenceClock {
 public:
  std::uint64_t next() { return next_++; }
  std::uint64_t peek() const { return next_; }

 private:
  std::uint64_t next_ = 0;
};

/// Who applies a primitive and on behalf of which high-level operation.
struct Accessor {
  ProcessId process;
  std::optional<OpId> op;
};

struct PrimitiveRecord {
  std::uint64_t seq = 0;
  ProcessId process;
  CellId cell = 0;
  std::optional<OpId> op;
  PrimitiveKind kind = PrimitiveKind::Read;
  std::vector<Contents> args;
  std::optional<Contents> returned;  // read, swap, fetch&add
  std::optional<bool> success;       // compare&swap
};

/// One simulated shared word with its append-only primitive trace.
class SimCell {
 public:
  SimCell(CellId id, CellFlavor flavor, Contents initial);

  CellId id() const { return id_; }
  CellFlavor flavor() const { return flavor_; }
  const Contents& contents() const { return contents_; }
  const Contents& initial() const { return initial_; }
  const std::vector<PrimitiveRecord>& trace() const { return trace_; }

 private:
  friend class Memory;

  CellId id_;
  CellFlavor flavor_;
  Contents initial_;
  Contents contents_;
  std::vector<PrimitiveRecord> trace_;
};

/// Owns every simulated cell. Each primitive is one indivisible step that
/// appends exactly one record to the cell trace.
class Memory {
 public:
  explicit Memory(SequenceClock& clock, unsigned width_guard_bits = 128);

  CellId make_word_cell(Word initial);
  CellId make_value_cell(Contents initial);

  Contents read(CellId cell, const Accessor& who);
  void write(CellId cell, Contents value, const Accessor& who);
  Contents swap(CellId cell, Contents value, const Accessor& who);
  /// Word cells only; throws CellTypeError otherwise.
  Word fetch_add(CellId cell, const Word& addend, const Accessor& who);
  bool compare_and_swap(CellId cell, const Contents& expected, Contents desired, const Accessor& who);

  const SimCell& cell(CellId id) const { return cells_.at(id); }
  std::size_t cell_count() const { return cells_.size(); }

  /// All primitive records of all cells ordered by sequence number.
  std::vector<PrimitiveRecord> trace() const;

  unsigned width_guard_bits() const { return width_guard_; }

 private:
  SimCell& at(CellId id);
  void check_store(const SimCell& cell, const Contents& value) const;
  PrimitiveRecord& record(SimCell& cell, PrimitiveKind kind, const Accessor& who);

  SequenceClock* clock_;
  unsigned width_guard_;
  std::vector<SimCell> cells_;
};

/// Re-applies `cell`'s trace to its initial contents and checks every
/// recorded return value. Returns the index of the first mismatching record.
std::optional<std::size_t> replay_mismatch(const SimCell& cell);

/// `<seq> <process> <cell> <op> prim <kind> <args> <result>`.
std::string format_primitive(const PrimitiveRecord& r);

}  // namespace audreg

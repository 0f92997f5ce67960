#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "audreg/codec.hpp"
#include "audreg/history.hpp"
#include "audreg/memory.hpp"
#include "audreg/runtime.hpp"
#include "audreg/task.hpp"

namespace audreg {

/// Register constructions:
///   A3  single reader, writer audits, one swap word
///   A4  n readers, writer audits, fetch&add + swap word with reader bits
///   A5  single reader, many auditors, swap + fetch&add word and a pairs log
///   A6  n readers, many auditors, compare&swap + fetch&add word and a pairs matrix
///   A7  n readers, many auditors, plain read/write registers (regular audit)
enum class Algorithm : std::uint8_t { A3, A4, A5, A6, A7 };

/// Deliberately broken variants used to confirm the checker catches bugs.
enum class Mutant : std::uint8_t {
  None,
  A3SkipAuditRead,  // audit returns the write-time log without reading R
  A4NoBitReset,     // write keeps the reader bits (fetch&add of the value delta)
  A5NoReaderLog,    // reader never writes its pairs entry
  A6NoPairsLog,     // writer skips logging reads into pairs on cas failure
};

std::string_view to_string(Algorithm a);
std::string_view to_string(Mutant m);

/// Parses `a3`..`a7` and mutant names such as `a4-mutant-nobitreset`.
/// Throws UsageError for unknown tags.
std::pair<Algorithm, Mutant> parse_algorithm_tag(std::string_view tag);
std::string algorithm_tag(Algorithm a, Mutant m);
std::vector<std::string> all_algorithm_tags();

struct RegisterConfig {
  Algorithm algorithm = Algorithm::A3;
  ProcessId writer;
  /// Reader i owns bit i of the word (A4, A6).
  std::vector<ProcessId> readers;
  std::set<ProcessId> auditors;
  Value initial = Value::bottom();
  Mutant mutant = Mutant::None;

  /// Throws UsageError when role sets do not fit the algorithm: A3/A5 take
  /// exactly one reader, A3/A4 are audited only by the writer, the writer
  /// always audits and never reads.
  void validate() const;
  ObjectRoles roles() const;
};

/// Cells grown on demand, each starting Vacant.
class LazyCells {
 public:
  explicit LazyCells(Memory& memory) : memory_(&memory) {}
  CellId at(std::size_t index);
  std::size_t size() const { return cells_.size(); }

 private:
  Memory* memory_;
  std::vector<CellId> cells_;
};

/// A single-writer auditable register implemented as a step machine over
/// simulated primitives. Every operation records its invocation and
/// response and suspends in front of each primitive.
class AuditableRegister {
 public:
  AuditableRegister(ObjectId id, RegisterConfig config);
  virtual ~AuditableRegister() = default;

  AuditableRegister(const AuditableRegister&) = delete;
  AuditableRegister& operator=(const AuditableRegister&) = delete;

  /// Role violations throw UsageError before anything is recorded.
  Task<void> write(ProcessContext& ctx, Value v);
  Task<Value> read(ProcessContext& ctx);
  Task<AuditSet> audit(ProcessContext& ctx);

  ObjectId id() const { return id_; }
  const RegisterConfig& config() const { return config_; }
  std::size_t reader_count() const { return config_.readers.size(); }
  /// Bit/row index of `p` among the readers.
  std::size_t reader_index(ProcessId p) const;

  /// The packed word cell, for constructions that have one.
  virtual std::optional<CellId> word_cell() const { return std::nullopt; }
  virtual const WordCodec* codec() const { return nullptr; }
  const ValueDictionary& dictionary() const { return dict_; }

 protected:
  virtual Task<void> do_write(ProcessContext& ctx, Value v) = 0;
  virtual Task<Value> do_read(ProcessContext& ctx) = 0;
  virtual Task<AuditSet> do_audit(ProcessContext& ctx) = 0;

  ValueDictionary dict_;

 private:
  Task<void> write_op(ProcessContext& ctx, Value v);
  Task<Value> read_op(ProcessContext& ctx);
  Task<AuditSet> audit_op(ProcessContext& ctx);

  ObjectId id_;
  RegisterConfig config_;
};

/// Builds the construction named by `config.algorithm` (and its mutant).
std::unique_ptr<AuditableRegister> make_register(ObjectId id, RegisterConfig config, Memory& memory);

class SwapRegister final : public AuditableRegister {
 public:
  SwapRegister(ObjectId id, RegisterConfig config, Memory& memory);
  CellId cell() const { return r_; }

 protected:
  Task<void> do_write(ProcessContext& ctx, Value v) override;
  Task<Value> do_read(ProcessContext& ctx) override;
  Task<AuditSet> do_audit(ProcessContext& ctx) override;

 private:
  CellId r_;
  // reader
  Value read_result_ = Value::bottom();
  // writer / auditor
  Value curr_val_;
  Value prev_val_ = Value::bottom();
  AuditSet audit_result_;
};

class ReaderBitsRegister final : public AuditableRegister {
 public:
  ReaderBitsRegister(ObjectId id, RegisterConfig config, Memory& memory);
  std::optional<CellId> word_cell() const override { return r_; }
  const WordCodec* codec() const override { return &codec_; }

 protected:
  Task<void> do_write(ProcessContext& ctx, Value v) override;
  Task<Value> do_read(ProcessContext& ctx) override;
  Task<AuditSet> do_audit(ProcessContext& ctx) override;

 private:
  WordCodec codec_;
  CellId r_;
  std::map<ProcessId, Value> read_result_;
  Value curr_val_;
  Value prev_val_ = Value::bottom();
  AuditSet audit_result_;
};

class PairsLogRegister final : public AuditableRegister {
 public:
  PairsLogRegister(ObjectId id, RegisterConfig config, Memory& memory);
  std::optional<CellId> word_cell() const override { return r_; }
  const WordCodec* codec() const override { return &codec_; }

 protected:
  Task<void> do_write(ProcessContext& ctx, Value v) override;
  Task<Value> do_read(ProcessContext& ctx) override;
  Task<AuditSet> do_audit(ProcessContext& ctx) override;

 private:
  struct AuditorState {
    AuditSet audit_result;
    std::uint64_t audit_index = 0;
  };

  WordCodec codec_;
  CellId r_;
  LazyCells pairs_;
  Value read_result_ = Value::bottom();
  std::uint64_t writer_sn_ = 0;
  std::map<ProcessId, AuditorState> auditors_;
};

class CasMatrixRegister final : public AuditableRegister {
 public:
  CasMatrixRegister(ObjectId id, RegisterConfig config, Memory& memory);
  std::optional<CellId> word_cell() const override { return r_; }
  const WordCodec* codec() const override { return &codec_; }

 protected:
  Task<void> do_write(ProcessContext& ctx, Value v) override;
  Task<Value> do_read(ProcessContext& ctx) override;
  Task<AuditSet> do_audit(ProcessContext& ctx) override;

 private:
  struct AuditorState {
    AuditSet audit_result;
    std::uint64_t audit_index = 0;
  };

  WordCodec codec_;
  CellId r_;
  std::vector<LazyCells> pairs_;  // pairs_[reader][sn]
  std::map<ProcessId, Value> read_result_;
  std::map<ProcessId, AuditorState> auditors_;
  // writer
  std::uint64_t sn_ = 0;
  Value val_;
  std::uint64_t bits_ = 0;
};

class ReadLogRegister final : public AuditableRegister {
 public:
  ReadLogRegister(ObjectId id, RegisterConfig config, Memory& memory);

 protected:
  Task<void> do_write(ProcessContext& ctx, Value v) override;
  Task<Value> do_read(ProcessContext& ctx) override;
  Task<AuditSet> do_audit(ProcessContext& ctx) override;

 private:
  CellId r_v_;
  std::vector<CellId> r_a_;
  std::map<ProcessId, AuditSet> read_log_;
  std::map<ProcessId, AuditSet> audit_result_;
};

/// Checks the reader-bit discipline on a packed word cell: every word the
/// writer installs has all reader bits clear, and bit i only ever goes from
/// 0 to 1 through a fetch&add by reader i. Returns a description of the
/// first violation.
std::optional<std::string> check_reader_bits(const SimCell& cell, const WordCodec& codec,
                                             const RegisterConfig& config);

/// Failed compare&swap count per high-level operation on `cell`.
std::map<OpId, std::size_t> cas_failures_by_op(const SimCell& cell);

}  // namespace audreg

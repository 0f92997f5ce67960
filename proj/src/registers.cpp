#include "audreg/registers.hpp"

#include <algorithm>

#include "audreg/errors.hpp"

namespace audreg {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::A3: return "a3";
    case Algorithm::A4: return "a4";
    case Algorithm::A5: return "a5";
    case Algorithm::A6: return "a6";
    case Algorithm::A7: return "a7";
  }
  return "?";
}

std::string_view to_string(Mutant m) {
  switch (m) {
    case Mutant::None: return "none";
    case Mutant::A3SkipAuditRead: return "noauditread";
    case Mutant::A4NoBitReset: return "nobitreset";
    case Mutant::A5NoReaderLog: return "noreaderlog";
    case Mutant::A6NoPairsLog: return "nopairslog";
  }
  return "?";
}

namespace {

constexpr std::pair<Mutant, Algorithm> kMutants[] = {
    {Mutant::A3SkipAuditRead, Algorithm::A3},
    {Mutant::A4NoBitReset, Algorithm::A4},
    {Mutant::A5NoReaderLog, Algorithm::A5},
    {Mutant::A6NoPairsLog, Algorithm::A6},
};

constexpr Algorithm kAlgorithms[] = {Algorithm::A3, Algorithm::A4, Algorithm::A5, Algorithm::A6,
                                     Algorithm::A7};

}  // namespace

std::string algorithm_tag(Algorithm a, Mutant m) {
  std::string tag(to_string(a));
  if (m != Mutant::None) tag += "-mutant-" + std::string(to_string(m));
  return tag;
}

std::vector<std::string> all_algorithm_tags() {
  std::vector<std::string> out;
  for (auto a : kAlgorithms) out.push_back(algorithm_tag(a, Mutant::None));
  for (auto [m, a] : kMutants) out.push_back(algorithm_tag(a, m));
  return out;
}

std::pair<Algorithm, Mutant> parse_algorithm_tag(std::string_view tag) {
  for (auto a : kAlgorithms) {
    if (tag == to_string(a)) return {a, Mutant::None};
  }
  for (auto [m, a] : kMutants) {
    if (tag == algorithm_tag(a, m)) return {a, m};
  }
  throw UsageError("unknown algorithm '" + std::string(tag) + "'");
}

void RegisterConfig::validate() const {
  auto fail = [&](const std::string& why) {
    throw UsageError(std::string(to_string(algorithm)) + " register: " + why);
  };
  if (mutant != Mutant::None) {
    bool matches = false;
    for (auto [m, a] : kMutants) matches |= (m == mutant && a == algorithm);
    if (!matches) fail("mutant does not apply to this algorithm");
  }
  std::set<ProcessId> unique(readers.begin(), readers.end());
  if (unique.size() != readers.size()) fail("duplicate reader");
  if (unique.contains(writer)) fail("the writer cannot also be a reader");
  if (!auditors.contains(writer)) fail("the writer must be an auditor");
  const bool single_reader = algorithm == Algorithm::A3 || algorithm == Algorithm::A5;
  if (single_reader && readers.size() != 1) fail("exactly one reader required");
  const bool single_auditor = algorithm == Algorithm::A3 || algorithm == Algorithm::A4;
  if (single_auditor && auditors.size() != 1) fail("only the writer may audit");
  if (readers.size() > 64) fail("at most 64 readers");
}

ObjectRoles RegisterConfig::roles() const {
  return ObjectRoles{initial, writer, std::set<ProcessId>(readers.begin(), readers.end()), auditors};
}

CellId LazyCells::at(std::size_t index) {
  while (cells_.size() <= index) cells_.push_back(memory_->make_value_cell(Vacant{}));
  return cells_[index];
}

AuditableRegister::AuditableRegister(ObjectId id, RegisterConfig config)
    : id_(id), config_(std::move(config)) {
  config_.validate();
  dict_.code(config_.initial);
}

std::size_t AuditableRegister::reader_index(ProcessId p) const {
  auto it = std::find(config_.readers.begin(), config_.readers.end(), p);
  if (it == config_.readers.end()) throw UsageError("process " + to_string(p) + " is not a reader");
  return static_cast<std::size_t>(it - config_.readers.begin());
}

Task<void> AuditableRegister::write(ProcessContext& ctx, Value v) {
  if (ctx.id() != config_.writer) {
    throw UsageError("process " + to_string(ctx.id()) + " is not the writer of object " +
                     std::to_string(id_));
  }
  if (v.is_bottom()) throw UsageError("bottom cannot be written");
  return write_op(ctx, v);
}

Task<Value> AuditableRegister::read(ProcessContext& ctx) {
  reader_index(ctx.id());
  return read_op(ctx);
}

Task<AuditSet> AuditableRegister::audit(ProcessContext& ctx) {
  if (!config_.auditors.contains(ctx.id())) {
    throw UsageError("process " + to_string(ctx.id()) + " is not an auditor of object " +
                     std::to_string(id_));
  }
  return audit_op(ctx);
}

Task<void> AuditableRegister::write_op(ProcessContext& ctx, Value v) {
  const OpId op = ctx.recorder().invoke(ctx.id(), id_, OpKind::Write, v);
  ctx.current_op = op;
  co_await do_write(ctx, v);
  ctx.current_op.reset();
  ctx.recorder().respond(op, std::monostate{});
  ctx.responded_flag = true;
}

Task<Value> AuditableRegister::read_op(ProcessContext& ctx) {
  const OpId op = ctx.recorder().invoke(ctx.id(), id_, OpKind::Read, std::nullopt);
  ctx.current_op = op;
  Value out = co_await do_read(ctx);
  ctx.current_op.reset();
  ctx.recorder().respond(op, out);
  ctx.responded_flag = true;
  co_return out;
}

Task<AuditSet> AuditableRegister::audit_op(ProcessContext& ctx) {
  const OpId op = ctx.recorder().invoke(ctx.id(), id_, OpKind::Audit, std::nullopt);
  ctx.current_op = op;
  AuditSet out = co_await do_audit(ctx);
  ctx.current_op.reset();
  ctx.recorder().respond(op, out);
  ctx.responded_flag = true;
  co_return out;
}

std::unique_ptr<AuditableRegister> make_register(ObjectId id, RegisterConfig config, Memory& memory) {
  switch (config.algorithm) {
    case Algorithm::A3: return std::make_unique<SwapRegister>(id, std::move(config), memory);
    case Algorithm::A4: return std::make_unique<ReaderBitsRegister>(id, std::move(config), memory);
    case Algorithm::A5: return std::make_unique<PairsLogRegister>(id, std::move(config), memory);
    case Algorithm::A6: return std::make_unique<CasMatrixRegister>(id, std::move(config), memory);
    case Algorithm::A7: return std::make_unique<ReadLogRegister>(id, std::move(config), memory);
  }
  throw UsageError("unknown algorithm");
}

namespace {

const Word& as_word(const Contents& c) { return std::get<Word>(c); }

std::size_t as_index(const Word& w) { return static_cast<std::size_t>(w); }

}  // namespace

// ---------------------------------------------------------------------------
// A3: single reader, single auditor, one register accessed with read/swap.

SwapRegister::SwapRegister(ObjectId id, RegisterConfig config, Memory& memory)
    : AuditableRegister(id, std::move(config)),
      r_(memory.make_value_cell(this->config().initial)),
      curr_val_(this->config().initial) {}

Task<Value> SwapRegister::do_read(ProcessContext& ctx) {
  Contents val = co_await ctx.swap(r_, Vacant{});
  if (!std::holds_alternative<Vacant>(val)) read_result_ = std::get<Value>(val);
  co_return read_result_;
}

Task<void> SwapRegister::do_write(ProcessContext& ctx, Value v) {
  prev_val_ = curr_val_;
  curr_val_ = v;
  Contents old = co_await ctx.swap(r_, v);
  if (std::holds_alternative<Vacant>(old)) audit_result_.insert({config().readers[0], prev_val_});
}

Task<AuditSet> SwapRegister::do_audit(ProcessContext& ctx) {
  if (config().mutant != Mutant::A3SkipAuditRead) {
    Contents now = co_await ctx.read(r_);
    if (std::holds_alternative<Vacant>(now)) audit_result_.insert({config().readers[0], curr_val_});
  }
  co_return audit_result_;
}

// ---------------------------------------------------------------------------
// A4: n readers, single auditor; word = value * 2^n + reader bits.

ReaderBitsRegister::ReaderBitsRegister(ObjectId id, RegisterConfig config, Memory& memory)
    : AuditableRegister(id, std::move(config)),
      codec_(Layout::ValueBits, static_cast<unsigned>(this->config().readers.size())),
      r_(memory.make_word_cell(codec_.encode(dict_.code(this->config().initial), 0, 0))),
      curr_val_(this->config().initial) {}

Task<Value> ReaderBitsRegister::do_read(ProcessContext& ctx) {
  const auto i = static_cast<unsigned>(reader_index(ctx.id()));
  Contents val = co_await ctx.read(r_);
  if (!codec_.get_bit(as_word(val), i)) {
    Word fetched = co_await ctx.fetch_add(r_, Word(1) << i);
    read_result_[ctx.id()] = dict_.value(codec_.get_value(fetched));
  }
  co_return read_result_[ctx.id()];
}

Task<void> ReaderBitsRegister::do_write(ProcessContext& ctx, Value v) {
  prev_val_ = curr_val_;
  curr_val_ = v;
  Word val;
  if (config().mutant == Mutant::A4NoBitReset) {
    const Word delta = (dict_.code(v) - dict_.code(prev_val_)) << codec_.reader_bits();
    val = co_await ctx.fetch_add(r_, delta);
  } else {
    Contents old = co_await ctx.swap(r_, codec_.encode(dict_.code(v), 0, 0));
    val = as_word(old);
  }
  for (unsigned j = 0; j < codec_.reader_bits(); ++j) {
    if (codec_.get_bit(val, j)) audit_result_.insert({config().readers[j], prev_val_});
  }
}

Task<AuditSet> ReaderBitsRegister::do_audit(ProcessContext& ctx) {
  Contents val = co_await ctx.read(r_);
  for (unsigned j = 0; j < codec_.reader_bits(); ++j) {
    if (codec_.get_bit(as_word(val), j)) audit_result_.insert({config().readers[j], curr_val_});
  }
  co_return audit_result_;
}

// ---------------------------------------------------------------------------
// A5: single reader, many auditors; word interleaves value and sn above one
// reader bit, and pairs[sn] records the value the reader saw for write sn.

PairsLogRegister::PairsLogRegister(ObjectId id, RegisterConfig config, Memory& memory)
    : AuditableRegister(id, std::move(config)),
      codec_(Layout::Interleaved, 1),
      r_(memory.make_word_cell(codec_.encode(dict_.code(this->config().initial), 0, 0))),
      pairs_(memory) {}

Task<Value> PairsLogRegister::do_read(ProcessContext& ctx) {
  Contents temp = co_await ctx.read(r_);
  if (!codec_.get_bit(as_word(temp), 0)) {
    Word fetched = co_await ctx.fetch_add(r_, Word(1));
    read_result_ = dict_.value(codec_.get_value(fetched));
    if (config().mutant != Mutant::A5NoReaderLog) {
      co_await ctx.write(pairs_.at(as_index(codec_.get_sn(fetched))), read_result_);
    }
  }
  co_return read_result_;
}

Task<void> PairsLogRegister::do_write(ProcessContext& ctx, Value v) {
  ++writer_sn_;
  Contents temp = co_await ctx.swap(r_, codec_.encode(dict_.code(v), writer_sn_, 0));
  const Word& old = as_word(temp);
  if (codec_.get_bit(old, 0)) {
    co_await ctx.write(pairs_.at(as_index(codec_.get_sn(old))), dict_.value(codec_.get_value(old)));
  }
}

Task<AuditSet> PairsLogRegister::do_audit(ProcessContext& ctx) {
  auto& st = auditors_[ctx.id()];
  Contents temp = co_await ctx.read(r_);
  const Word& word = as_word(temp);
  st.audit_index = static_cast<std::uint64_t>(codec_.get_sn(word));
  if (codec_.get_bit(word, 0)) {
    co_await ctx.write(pairs_.at(st.audit_index), dict_.value(codec_.get_value(word)));
  }
  for (std::uint64_t j = st.audit_index + 1; j-- > 0;) {
    Contents entry = co_await ctx.read(pairs_.at(j));
    if (const auto* v = std::get_if<Value>(&entry)) st.audit_result.insert({config().readers[0], *v});
  }
  co_return st.audit_result;
}

// ---------------------------------------------------------------------------
// A6: n readers, many auditors; the writer installs (sn, value, 0^n) with
// compare&swap and, whenever that fails, logs the readers whose bits it
// finds into column sn-1 of the pairs matrix before retrying.

CasMatrixRegister::CasMatrixRegister(ObjectId id, RegisterConfig config, Memory& memory)
    : AuditableRegister(id, std::move(config)),
      codec_(Layout::Interleaved, static_cast<unsigned>(this->config().readers.size())),
      r_(memory.make_word_cell(codec_.encode(dict_.code(this->config().initial), 0, 0))),
      pairs_(this->config().readers.size(), LazyCells(memory)),
      val_(this->config().initial) {}

Task<Value> CasMatrixRegister::do_read(ProcessContext& ctx) {
  const auto i = static_cast<unsigned>(reader_index(ctx.id()));
  Contents temp = co_await ctx.read(r_);
  if (!codec_.get_bit(as_word(temp), i)) {
    Word fetched = co_await ctx.fetch_add(r_, Word(1) << i);
    read_result_[ctx.id()] = dict_.value(codec_.get_value(fetched));
  }
  co_return read_result_[ctx.id()];
}

Task<void> CasMatrixRegister::do_write(ProcessContext& ctx, Value v) {
  ++sn_;
  const Word desired = codec_.encode(dict_.code(v), sn_, 0);
  while (true) {
    const Word expected = codec_.encode(dict_.code(val_), sn_ - 1, bits_);
    const bool installed = co_await ctx.compare_and_swap(r_, expected, desired);
    if (installed) break;
    Contents temp = co_await ctx.read(r_);
    bits_ = codec_.get_bits(as_word(temp));
    if (config().mutant == Mutant::A6NoPairsLog) continue;
    for (unsigned j = 0; j < codec_.reader_bits(); ++j) {
      if ((bits_ >> j) & 1U) co_await ctx.write(pairs_[j].at(sn_ - 1), val_);
    }
  }
  bits_ = 0;
  val_ = v;
}

Task<AuditSet> CasMatrixRegister::do_audit(ProcessContext& ctx) {
  auto& st = auditors_[ctx.id()];
  Contents temp = co_await ctx.read(r_);
  const Word& word = as_word(temp);
  st.audit_index = static_cast<std::uint64_t>(codec_.get_sn(word));
  for (std::size_t j = 0; j < pairs_.size(); ++j) {
    for (std::uint64_t k = 0; k < st.audit_index; ++k) {
      Contents entry = co_await ctx.read(pairs_[j].at(k));
      if (const auto* v = std::get_if<Value>(&entry)) st.audit_result.insert({config().readers[j], *v});
    }
  }
  for (unsigned j = 0; j < codec_.reader_bits(); ++j) {
    if (codec_.get_bit(word, j)) {
      st.audit_result.insert({config().readers[j], dict_.value(codec_.get_value(word))});
    }
  }
  co_return st.audit_result;
}

// ---------------------------------------------------------------------------
// A7: regular audit from read/write registers. Each reader republishes its
// whole read log in its own register; auditors union every log.

ReadLogRegister::ReadLogRegister(ObjectId id, RegisterConfig config, Memory& memory)
    : AuditableRegister(id, std::move(config)),
      r_v_(memory.make_value_cell(this->config().initial)) {
  for (std::size_t i = 0; i < this->config().readers.size(); ++i) {
    r_a_.push_back(memory.make_value_cell(AuditSet{}));
  }
}

Task<Value> ReadLogRegister::do_read(ProcessContext& ctx) {
  const auto i = reader_index(ctx.id());
  Contents got = co_await ctx.read(r_v_);
  const Value read_result = std::get<Value>(got);
  auto& log = read_log_[ctx.id()];
  log.insert({ctx.id(), read_result});
  co_await ctx.write(r_a_[i], log);
  co_return read_result;
}

Task<void> ReadLogRegister::do_write(ProcessContext& ctx, Value v) { co_await ctx.write(r_v_, v); }

Task<AuditSet> ReadLogRegister::do_audit(ProcessContext& ctx) {
  auto& result = audit_result_[ctx.id()];
  for (CellId cell : r_a_) {
    Contents log = co_await ctx.read(cell);
    const auto& entries = std::get<AuditSet>(log);
    result.insert(entries.begin(), entries.end());
  }
  co_return result;
}

// ---------------------------------------------------------------------------

std::optional<std::string> check_reader_bits(const SimCell& cell, const WordCodec& codec,
                                             const RegisterConfig& config) {
  Word state = std::get<Word>(cell.initial());
  if (codec.get_bits(state) != 0) return "initial word has reader bits set";
  for (const auto& r : cell.trace()) {
    const std::uint64_t before = codec.get_bits(state);
    std::optional<Word> after;
    switch (r.kind) {
      case PrimitiveKind::Read: break;
      case PrimitiveKind::Write:
      case PrimitiveKind::Swap: after = std::get<Word>(r.args.at(0)); break;
      case PrimitiveKind::FetchAdd: after = state + std::get<Word>(r.args.at(0)); break;
      case PrimitiveKind::CompareAndSwap:
        if (r.success.value_or(false)) after = std::get<Word>(r.args.at(1));
        break;
    }
    if (!after) continue;
    const std::uint64_t now = codec.get_bits(*after);
    const std::string where = "step " + std::to_string(r.seq) + ": ";
    if (r.process == config.writer && r.kind != PrimitiveKind::FetchAdd && now != 0) {
      return where + "writer installed a word with reader bits set";
    }
    const std::uint64_t raised = now & ~before;
    for (unsigned i = 0; i < codec.reader_bits(); ++i) {
      if (!((raised >> i) & 1U)) continue;
      const bool by_owner = r.kind == PrimitiveKind::FetchAdd && i < config.readers.size() &&
                            r.process == config.readers[i] &&
                            std::get<Word>(r.args.at(0)) == (Word(1) << i);
      if (!by_owner) return where + "bit " + std::to_string(i) + " raised by process " + to_string(r.process);
    }
    state = *after;
  }
  return std::nullopt;
}

std::map<OpId, std::size_t> cas_failures_by_op(const SimCell& cell) {
  std::map<OpId, std::size_t> out;
  for (const auto& r : cell.trace()) {
    if (r.kind != PrimitiveKind::CompareAndSwap || !r.op) continue;
    auto& n = out[*r.op];
    if (!r.success.value_or(true)) ++n;
  }
  return out;
}

}  // namespace audreg

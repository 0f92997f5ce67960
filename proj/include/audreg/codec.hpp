#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "audreg/memory.hpp"
#include "audreg/value.hpp"

namespace audreg {

/// How a register word packs its fields. Reader bits always occupy the n
/// low-order positions.
///   ValueBits:   word = value * 2^n + bits                 (single-auditor, many readers)
///   Interleaved: above the reader bits, value bits sit at even offsets and
///                sequence-number bits at odd offsets        (multi-auditor)
enum class Layout : std::uint8_t { ValueBits, Interleaved };

struct DecodedWord {
  Word value;
  Word sn;
  std::uint64_t bits = 0;

  friend bool operator==(const DecodedWord&, const DecodedWord&) = default;
};

class WordCodec {
 public:
  /// Throws UsageError if reader_bits > 64.
  WordCodec(Layout layout, unsigned reader_bits);

  Layout layout() const { return layout_; }
  unsigned reader_bits() const { return n_; }

  /// Throws UsageError for negative fields, bits wider than n, or a nonzero
  /// sequence number under the ValueBits layout.
  Word encode(const Word& value, const Word& sn, std::uint64_t bits) const;
  DecodedWord decode(const Word& word) const;

  Word get_value(const Word& word) const;
  /// Throws UsageError under the ValueBits layout, which has no sn field.
  Word get_sn(const Word& word) const;
  std::uint64_t get_bits(const Word& word) const;
  bool get_bit(const Word& word, unsigned reader) const;

 private:
  Layout layout_;
  unsigned n_;
};

/// Injective mapping between register values and nonnegative integer codes.
/// Payloads in [0, 2^40) are their own code, so words stay readable; bottom,
/// negative and huge payloads get codes from 2^40 upward on first use.
class ValueDictionary {
 public:
  static constexpr std::int64_t kDirectLimit = std::int64_t{1} << 40;

  ValueDictionary();

  Word code(const Value& v);
  /// Throws UsageError for a code never handed out.
  Value value(const Word& code) const;

 private:
  std::map<Value, std::size_t> codes_;
  std::vector<Value> values_;
};

}  // namespace audreg

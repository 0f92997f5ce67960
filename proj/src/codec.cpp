#include "audreg/codec.hpp"

#include "audreg/errors.hpp"

namespace audreg {

namespace {

using boost::multiprecision::cpp_int;

// Spreads the 32 bits of x to the even positions of a 64-bit word.
std::uint64_t spread32(std::uint64_t x) {
  x &= 0xffffffffULL;
  x = (x | (x << 16)) & 0x0000ffff0000ffffULL;
  x = (x | (x << 8)) & 0x00ff00ff00ff00ffULL;
  x = (x | (x << 4)) & 0x0f0f0f0f0f0f0f0fULL;
  x = (x | (x << 2)) & 0x3333333333333333ULL;
  x = (x | (x << 1)) & 0x5555555555555555ULL;
  return x;
}

// Inverse of spread32: gathers the even bits of x.
std::uint64_t compact64(std::uint64_t x) {
  x &= 0x5555555555555555ULL;
  x = (x | (x >> 1)) & 0x3333333333333333ULL;
  x = (x | (x >> 2)) & 0x0f0f0f0f0f0f0f0fULL;
  x = (x | (x >> 4)) & 0x00ff00ff00ff00ffULL;
  x = (x | (x >> 8)) & 0x0000ffff0000ffffULL;
  x = (x | (x >> 16)) & 0x00000000ffffffffULL;
  return x;
}

const cpp_int kMask32 = cpp_int(0xffffffffULL);
const cpp_int kMask64 = cpp_int(0xffffffffffffffffULL);

cpp_int spread(cpp_int x) {
  cpp_int out = 0;
  for (unsigned shift = 0; x != 0; shift += 64) {
    const auto chunk = static_cast<std::uint64_t>(x & kMask32);
    out |= cpp_int(spread32(chunk)) << shift;
    x >>= 32;
  }
  return out;
}

cpp_int compact(cpp_int x) {
  cpp_int out = 0;
  for (unsigned shift = 0; x != 0; shift += 32) {
    const auto limb = static_cast<std::uint64_t>(x & kMask64);
    out |= cpp_int(compact64(limb)) << shift;
    x >>= 64;
  }
  return out;
}

}  // namespace

WordCodec::WordCodec(Layout layout, unsigned reader_bits) : layout_(layout), n_(reader_bits) {
  if (reader_bits > 64) throw UsageError("at most 64 reader bits are supported");
}

Word WordCodec::encode(const Word& value, const Word& sn, std::uint64_t bits) const {
  if (value < 0 || sn < 0) throw UsageError("codec fields must be nonnegative");
  if (n_ < 64 && (bits >> n_) != 0) throw UsageError("reader bits wider than n");
  if (layout_ == Layout::ValueBits) {
    if (sn != 0) throw UsageError("ValueBits layout has no sequence number");
    return (value << n_) | Word(bits);
  }
  return ((spread(value) | (spread(sn) << 1)) << n_) | Word(bits);
}

DecodedWord WordCodec::decode(const Word& word) const {
  if (word < 0) throw UsageError("malformed word: negative");
  const Word high = word >> n_;
  DecodedWord out;
  out.bits = get_bits(word);
  if (layout_ == Layout::ValueBits) {
    out.value = high;
    out.sn = 0;
  } else {
    out.value = compact(high);
    out.sn = compact(high >> 1);
  }
  return out;
}

Word WordCodec::get_value(const Word& word) const { return decode(word).value; }

Word WordCodec::get_sn(const Word& word) const {
  if (layout_ == Layout::ValueBits) throw UsageError("ValueBits layout has no sequence number");
  return decode(word).sn;
}

std::uint64_t WordCodec::get_bits(const Word& word) const {
  if (word < 0) throw UsageError("malformed word: negative");
  if (n_ == 0) return 0;
  const Word mask = (Word(1) << n_) - 1;
  return static_cast<std::uint64_t>(word & mask);
}

bool WordCodec::get_bit(const Word& word, unsigned reader) const {
  if (reader >= n_) throw UsageError("reader index out of range");
  return boost::multiprecision::bit_test(word, reader);
}

ValueDictionary::ValueDictionary() = default;

Word ValueDictionary::code(const Value& v) {
  if (!v.is_bottom() && v.payload() >= 0 && v.payload() < kDirectLimit) return Word(v.payload());
  auto [it, inserted] = codes_.emplace(v, values_.size());
  if (inserted) values_.push_back(v);
  return Word(kDirectLimit) + it->second;
}

Value ValueDictionary::value(const Word& code) const {
  if (code >= 0 && code < kDirectLimit) return Value::of(static_cast<std::int64_t>(code));
  const Word index = code - kDirectLimit;
  if (index < 0 || index >= values_.size()) throw UsageError("unknown value code " + code.str());
  return values_[static_cast<std::size_t>(index)];
}

}  // namespace audreg

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <string_view>

namespace audreg {

/// Index of a logical process (p_0, p_1, ...).
struct ProcessId {
  std::uint32_t index = 0;

  constexpr ProcessId() = default;
  constexpr explicit ProcessId(std::uint32_t i) : index(i) {}

  friend constexpr auto operator<=>(ProcessId, ProcessId) = default;
};

/// A register value. Either an integer payload or the distinguished bottom
/// token; bottom orders before every payload.
class Value {
 public:
  constexpr Value() = default;

  static constexpr Value bottom() { return Value(); }
  static constexpr Value of(std::int64_t payload) { return Value(payload); }

  constexpr bool is_bottom() const { return !present_; }
  std::int64_t payload() const;

  friend constexpr auto operator<=>(const Value&, const Value&) = default;

 private:
  constexpr explicit Value(std::int64_t p) : present_(true), payload_(p) {}

  bool present_ = false;
  std::int64_t payload_ = 0;
};

inline constexpr std::string_view kBottomToken = "_|_";

std::string to_string(ProcessId p);
std::string to_string(const Value& v);

/// Parses an integer payload or the bottom token. Throws InputError.
Value parse_value(std::string_view text);

/// One (process, value) entry reported by an audit.
struct AuditPair {
  ProcessId reader;
  Value value;

  friend constexpr auto operator<=>(const AuditPair&, const AuditPair&) = default;
};

using AuditSet = std::set<AuditPair>;

/// `{}` or `{(1,5),(2,_|_)}`.
std::string to_string(const AuditSet& set);
AuditSet parse_audit_set(std::string_view text);

}  // namespace audreg

template <>
struct std::hash<audreg::Value> {
  std::size_t operator()(const audreg::Value& v) const noexcept {
    return v.is_bottom() ? 0x9e3779b97f4a7c15ULL
                         : std::hash<std::int64_t>{}(v.payload());
  }
};

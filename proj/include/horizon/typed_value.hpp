#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace horizon {

struct Quantity {
  double amount = 0.0;
  std::string unit;

  bool operator==(const Quantity&) const = default;
};

struct Year {
  std::int64_t value = 0;

  auto operator<=>(const Year&) const = default;
};

// Proleptic Gregorian calendar date.
struct Date {
  std::int64_t year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;

  static std::optional<Date> parse(std::string_view iso);
  std::string to_string() const;
};

enum class ValueKind { kString, kNumber, kYear, kDate };

std::string_view to_string(ValueKind kind);
std::optional<ValueKind> parse_value_kind(std::string_view text);

// A literal attribute or qualifier value. Exactly one payload is populated and
// it always matches kind().
class TypedValue {
 public:
  TypedValue() : payload_(std::string{}) {}

  static TypedValue string(std::string value);
  static TypedValue number(double amount, std::string unit = {});
  static TypedValue year(std::int64_t value);
  static TypedValue date(Date value);

  ValueKind kind() const;

  const std::string& as_string() const;
  const Quantity& as_number() const;
  Year as_year() const;
  const Date& as_date() const;

  // Human-facing rendering: "206 centimetre", "2003", "2003-06-26".
  std::string to_string() const;

  bool operator==(const TypedValue&) const = default;

 private:
  using Payload = std::variant<std::string, Quantity, Year, Date>;
  explicit TypedValue(Payload payload) : payload_(std::move(payload)) {}

  Payload payload_;
};

enum class CompareOp { kEq, kNe, kLt, kGt, kLe, kGe };

// Accepts "=", "==", "!=", "≠", "<", ">", "<=", "≤", ">=", "≥".
std::optional<CompareOp> parse_compare_op(std::string_view text);
std::string_view to_string(CompareOp op);

class ValueError : public std::runtime_error {
 public:
  enum class Reason { kKindMismatch, kUnitMismatch, kUnsupportedOperator, kParse };

  ValueError(Reason reason, const std::string& message)
      : std::runtime_error(message), reason_(reason) {}

  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

// Throws ValueError when the pair is not comparable under `op`. Strings only
// support equality; numbers only compare within one unit.
bool compare_typed(const TypedValue& a, CompareOp op, const TypedValue& b);

// Three-way comparison for comparable pairs (same kind, same unit, not string).
std::strong_ordering order_typed(const TypedValue& a, const TypedValue& b);

// Parses tool text as a value of a known kind. Numbers take an optional
// trailing unit ("206 centimetre"); years are integers; dates are ISO.
std::optional<TypedValue> parse_typed(std::string_view text, ValueKind kind);

// Best-effort literal: date, then number with optional unit, else string.
TypedValue parse_literal(std::string_view text);

std::string format_number(double value);

}  // namespace horizon

#include "horizon/typed_value.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "horizon/text.hpp"

namespace horizon {
namespace {

bool is_leap(std::int64_t year) {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(std::int64_t year, int month) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2 && is_leap(year)) {
    return 29;
  }
  return kDays[month - 1];
}

template <class T>
std::optional<T> parse_integer(std::string_view text) {
  T value{};
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (begin != end && *begin == '+') {
    ++begin;
  }
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || begin == end) {
    return std::nullopt;
  }
  return value;
}

std::optional<double> parse_double(std::string_view text) {
  if (text.empty()) {
    return std::nullopt;
  }
  std::string buffer;
  buffer.reserve(text.size());
  for (char c : text) {
    if (c != ',') {  // digit grouping
      buffer.push_back(c);
    }
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc{} || ptr != buffer.data() + buffer.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<Quantity> parse_quantity(std::string_view text) {
  text = trim(text);
  const auto space = text.find(' ');
  const auto number_part = space == std::string_view::npos ? text : text.substr(0, space);
  auto amount = parse_double(number_part);
  if (!amount) {
    return std::nullopt;
  }
  std::string unit;
  if (space != std::string_view::npos) {
    unit = std::string(trim(text.substr(space + 1)));
  }
  return Quantity{*amount, std::move(unit)};
}

}  // namespace

std::optional<Date> Date::parse(std::string_view iso) {
  iso = trim(iso);
  bool negative = false;
  if (!iso.empty() && iso.front() == '-') {
    negative = true;
    iso.remove_prefix(1);
  }
  const auto first = iso.find('-');
  if (first == std::string_view::npos) {
    return std::nullopt;
  }
  const auto second = iso.find('-', first + 1);
  if (second == std::string_view::npos) {
    return std::nullopt;
  }
  auto year = parse_integer<std::int64_t>(iso.substr(0, first));
  auto month = parse_integer<int>(iso.substr(first + 1, second - first - 1));
  auto day = parse_integer<int>(iso.substr(second + 1));
  if (!year || !month || !day || *month < 1 || *month > 12) {
    return std::nullopt;
  }
  const std::int64_t y = negative ? -*year : *year;
  if (*day < 1 || *day > days_in_month(y, *month)) {
    return std::nullopt;
  }
  return Date{y, *month, *day};
}

std::string Date::to_string() const {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%s%04lld-%02d-%02d", year < 0 ? "-" : "",
                static_cast<long long>(year < 0 ? -year : year), month, day);
  return buffer;
}

std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::kString:
      return "string";
    case ValueKind::kNumber:
      return "number";
    case ValueKind::kYear:
      return "year";
    case ValueKind::kDate:
      return "date";
  }
  return "string";
}

std::optional<ValueKind> parse_value_kind(std::string_view text) {
  if (text == "string") return ValueKind::kString;
  if (text == "number" || text == "quantity") return ValueKind::kNumber;
  if (text == "year") return ValueKind::kYear;
  if (text == "date") return ValueKind::kDate;
  return std::nullopt;
}

TypedValue TypedValue::string(std::string value) { return TypedValue(Payload{std::move(value)}); }

TypedValue TypedValue::number(double amount, std::string unit) {
  return TypedValue(Payload{Quantity{amount, std::move(unit)}});
}

TypedValue TypedValue::year(std::int64_t value) { return TypedValue(Payload{Year{value}}); }

TypedValue TypedValue::date(Date value) { return TypedValue(Payload{value}); }

ValueKind TypedValue::kind() const {
  return static_cast<ValueKind>(payload_.index());
}

const std::string& TypedValue::as_string() const { return std::get<std::string>(payload_); }
const Quantity& TypedValue::as_number() const { return std::get<Quantity>(payload_); }
Year TypedValue::as_year() const { return std::get<Year>(payload_); }
const Date& TypedValue::as_date() const { return std::get<Date>(payload_); }

std::string format_number(double value) {
  if (std::floor(value) == value && std::fabs(value) < 1e15) {
    return std::to_string(static_cast<long long>(value));
  }
  std::ostringstream out;
  out.precision(15);
  out << value;
  return out.str();
}

std::string TypedValue::to_string() const {
  switch (kind()) {
    case ValueKind::kString:
      return as_string();
    case ValueKind::kNumber: {
      const auto& q = as_number();
      auto text = format_number(q.amount);
      if (!q.unit.empty()) {
        text += ' ';
        text += q.unit;
      }
      return text;
    }
    case ValueKind::kYear:
      return std::to_string(as_year().value);
    case ValueKind::kDate:
      return as_date().to_string();
  }
  return {};
}

std::optional<CompareOp> parse_compare_op(std::string_view text) {
  text = trim(text);
  if (text == "=" || text == "==") return CompareOp::kEq;
  if (text == "!=" || text == "\xE2\x89\xA0") return CompareOp::kNe;
  if (text == "<") return CompareOp::kLt;
  if (text == ">") return CompareOp::kGt;
  if (text == "<=" || text == "\xE2\x89\xA4") return CompareOp::kLe;
  if (text == ">=" || text == "\xE2\x89\xA5") return CompareOp::kGe;
  return std::nullopt;
}

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::kEq:
      return "=";
    case CompareOp::kNe:
      return "!=";
    case CompareOp::kLt:
      return "<";
    case CompareOp::kGt:
      return ">";
    case CompareOp::kLe:
      return "<=";
    case CompareOp::kGe:
      return ">=";
  }
  return "=";
}

std::strong_ordering order_typed(const TypedValue& a, const TypedValue& b) {
  if (a.kind() != b.kind()) {
    throw ValueError(ValueError::Reason::kKindMismatch,
                     "cannot compare " + std::string(to_string(a.kind())) + " with " +
                         std::string(to_string(b.kind())));
  }
  switch (a.kind()) {
    case ValueKind::kString:
      throw ValueError(ValueError::Reason::kUnsupportedOperator,
                       "strings only support = and !=");
    case ValueKind::kNumber: {
      const auto& x = a.as_number();
      const auto& y = b.as_number();
      if (x.unit != y.unit) {
        throw ValueError(ValueError::Reason::kUnitMismatch,
                         "unit mismatch: '" + x.unit + "' vs '" + y.unit + "'");
      }
      if (x.amount < y.amount) return std::strong_ordering::less;
      if (x.amount > y.amount) return std::strong_ordering::greater;
      return std::strong_ordering::equal;
    }
    case ValueKind::kYear:
      return a.as_year() <=> b.as_year();
    case ValueKind::kDate:
      return a.as_date() <=> b.as_date();
  }
  return std::strong_ordering::equal;
}

bool compare_typed(const TypedValue& a, CompareOp op, const TypedValue& b) {
  if (a.kind() != b.kind()) {
    throw ValueError(ValueError::Reason::kKindMismatch,
                     "cannot compare " + std::string(to_string(a.kind())) + " with " +
                         std::string(to_string(b.kind())));
  }
  if (a.kind() == ValueKind::kString) {
    switch (op) {
      case CompareOp::kEq:
        return a.as_string() == b.as_string();
      case CompareOp::kNe:
        return a.as_string() != b.as_string();
      default:
        throw ValueError(ValueError::Reason::kUnsupportedOperator,
                         "operator " + std::string(to_string(op)) + " is not defined for strings");
    }
  }
  const auto order = order_typed(a, b);
  switch (op) {
    case CompareOp::kEq:
      return order == std::strong_ordering::equal;
    case CompareOp::kNe:
      return order != std::strong_ordering::equal;
    case CompareOp::kLt:
      return order == std::strong_ordering::less;
    case CompareOp::kGt:
      return order == std::strong_ordering::greater;
    case CompareOp::kLe:
      return order != std::strong_ordering::greater;
    case CompareOp::kGe:
      return order != std::strong_ordering::less;
  }
  return false;
}

std::optional<TypedValue> parse_typed(std::string_view text, ValueKind kind) {
  text = trim(text);
  switch (kind) {
    case ValueKind::kString:
      return TypedValue::string(std::string(text));
    case ValueKind::kNumber:
      if (auto q = parse_quantity(text)) {
        return TypedValue::number(q->amount, std::move(q->unit));
      }
      return std::nullopt;
    case ValueKind::kYear:
      if (auto y = parse_integer<std::int64_t>(text)) {
        return TypedValue::year(*y);
      }
      // A full date names its year.
      if (auto d = Date::parse(text)) {
        return TypedValue::year(d->year);
      }
      return std::nullopt;
    case ValueKind::kDate:
      if (auto d = Date::parse(text)) {
        return TypedValue::date(*d);
      }
      return std::nullopt;
  }
  return std::nullopt;
}

TypedValue parse_literal(std::string_view text) {
  if (auto d = Date::parse(text)) {
    return TypedValue::date(*d);
  }
  if (auto q = parse_quantity(text)) {
    return TypedValue::number(q->amount, std::move(q->unit));
  }
  return TypedValue::string(std::string(trim(text)));
}

}  // namespace horizon

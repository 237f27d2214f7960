#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace uwh {

enum class ValueType : std::uint8_t { kNull, kInteger, kDecimal, kText, kBoolean, kDate };

std::string_view type_name(ValueType t);
std::optional<ValueType> type_from_name(std::string_view name);

/// Fixed-point decimal with exactly four fractional digits.
class Decimal {
 public:
  static constexpr std::int64_t kScale = 10000;

  constexpr Decimal() = default;
  static constexpr Decimal from_units(std::int64_t units) {
    Decimal d;
    d.units_ = units;
    return d;
  }
  static constexpr Decimal from_integer(std::int64_t v) { return from_units(v * kScale); }

  /// Strict parse of `-?[0-9]+(\.[0-9]{1,4})?`.
  static std::optional<Decimal> parse(std::string_view text);

  /// Rounds numerator / denominator (in units) half away from zero.
  static Decimal divide(__int128 units_numerator, std::int64_t denominator);

  constexpr std::int64_t units() const { return units_; }

  /// Canonical text: trailing fractional zeros dropped, no dot for whole values.
  std::string to_string() const;

  friend constexpr Decimal operator+(Decimal a, Decimal b) { return from_units(a.units_ + b.units_); }
  friend constexpr Decimal operator-(Decimal a, Decimal b) { return from_units(a.units_ - b.units_); }
  friend constexpr auto operator<=>(const Decimal&, const Decimal&) = default;

 private:
  std::int64_t units_ = 0;
};

/// Proleptic Gregorian calendar date, stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  static std::optional<Date> from_ymd(int year, int month, int day);
  static constexpr Date from_days(std::int32_t days) {
    Date d;
    d.days_ = days;
    return d;
  }
  /// Strict `YYYY-MM-DD`.
  static std::optional<Date> parse_iso(std::string_view text);

  constexpr std::int32_t days() const { return days_; }
  int year() const;
  int month() const;
  int day() const;
  std::string to_string() const;

  friend constexpr auto operator<=>(const Date&, const Date&) = default;

 private:
  std::int32_t days_ = 0;
};

bool is_leap_year(int year);
int days_in_month(int year, int month);

/// Tagged scalar cell value.
class Value {
 public:
  Value() = default;
  static Value null() { return Value(); }
  static Value integer(std::int64_t v) { return Value(Storage(std::in_place_index<1>, v)); }
  static Value decimal(Decimal v) { return Value(Storage(std::in_place_index<2>, v)); }
  static Value text(std::string v) { return Value(Storage(std::in_place_index<3>, std::move(v))); }
  static Value boolean(bool v) { return Value(Storage(std::in_place_index<4>, v)); }
  static Value date(Date v) { return Value(Storage(std::in_place_index<5>, v)); }

  ValueType type() const { return static_cast<ValueType>(storage_.index()); }
  bool is_null() const { return storage_.index() == 0; }

  std::int64_t as_integer() const { return std::get<1>(storage_); }
  Decimal as_decimal() const { return std::get<2>(storage_); }
  const std::string& as_text() const { return std::get<3>(storage_); }
  bool as_boolean() const { return std::get<4>(storage_); }
  Date as_date() const { return std::get<5>(storage_); }

  /// Canonical text used by CSV output; nullopt for Null.
  std::optional<std::string> to_text() const;
  /// Human/debug rendering ("NULL" for Null).
  std::string debug_string() const;

  /// Strict parse of `text` as `type` (the extraction literal grammar).
  static std::optional<Value> parse_as(std::string_view text, ValueType type);

  friend bool operator==(const Value&, const Value&) = default;

 private:
  using Storage = std::variant<std::monostate, std::int64_t, Decimal, std::string, bool, Date>;
  explicit Value(Storage s) : storage_(std::move(s)) {}
  Storage storage_;
};

/// Orders two non-Null values of the same tag. Throws TypeError on a tag mismatch
/// or when either side is Null.
std::strong_ordering compare_values(const Value& a, const Value& b);

/// Total order for sorting keys and results: Null sorts first, then same-tag order.
/// Mixed non-Null tags still throw TypeError.
std::strong_ordering order_values(const Value& a, const Value& b);

/// Predicate-context comparison: any Null operand yields false.
enum class CompareOp { kEq, kNe, kLt, kLe, kGt, kGe };
bool compare_predicate(const Value& a, CompareOp op, const Value& b);
std::string_view compare_op_symbol(CompareOp op);

std::size_t hash_value(const Value& v);

}  // namespace uwh

template <>
struct std::hash<uwh::Value> {
  std::size_t operator()(const uwh::Value& v) const noexcept { return uwh::hash_value(v); }
};

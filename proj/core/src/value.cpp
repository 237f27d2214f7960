#include "uwh/value.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "uwh/errors.hpp"

namespace uwh {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

// Howard Hinnant's civil calendar conversions.
std::int32_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int>(doe) - 719468;
}

struct Civil {
  int y;
  unsigned m;
  unsigned d;
};

Civil civil_from_days(std::int32_t z) {
  z += 719468;
  const int era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int y = static_cast<int>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {y + (m <= 2), m, d};
}

void hash_combine(std::size_t& seed, std::size_t h) {
  seed ^= h + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

}  // namespace

std::string_view type_name(ValueType t) {
  switch (t) {
    case ValueType::kNull: return "NULL";
    case ValueType::kInteger: return "INTEGER";
    case ValueType::kDecimal: return "DECIMAL";
    case ValueType::kText: return "TEXT";
    case ValueType::kBoolean: return "BOOLEAN";
    case ValueType::kDate: return "DATE";
  }
  return "?";
}

std::optional<ValueType> type_from_name(std::string_view name) {
  static constexpr std::array<ValueType, 5> kTypes = {ValueType::kInteger, ValueType::kDecimal,
                                                      ValueType::kText, ValueType::kBoolean,
                                                      ValueType::kDate};
  for (ValueType t : kTypes) {
    std::string_view n = type_name(t);
    if (n.size() != name.size()) continue;
    bool eq = true;
    for (std::size_t i = 0; i < n.size(); ++i) {
      char c = name[i];
      if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
      if (c != n[i]) {
        eq = false;
        break;
      }
    }
    if (eq) return t;
  }
  return std::nullopt;
}

std::optional<Decimal> Decimal::parse(std::string_view text) {
  bool negative = false;
  if (!text.empty() && text.front() == '-') {
    negative = true;
    text.remove_prefix(1);
  }
  std::string_view whole = text;
  std::string_view frac;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    whole = text.substr(0, dot);
    frac = text.substr(dot + 1);
    if (frac.empty() || frac.size() > 4 || !all_digits(frac)) return std::nullopt;
  }
  if (!all_digits(whole) || whole.size() > 14) return std::nullopt;
  std::int64_t w = 0;
  std::from_chars(whole.data(), whole.data() + whole.size(), w);
  std::int64_t f = 0;
  for (std::size_t i = 0; i < 4; ++i) f = f * 10 + (i < frac.size() ? frac[i] - '0' : 0);
  std::int64_t units = w * kScale + f;
  return from_units(negative ? -units : units);
}

Decimal Decimal::divide(__int128 num, std::int64_t den) {
  if (den == 0) throw TypeError("decimal division by zero");
  bool negative = (num < 0) != (den < 0);
  unsigned __int128 n = num < 0 ? static_cast<unsigned __int128>(-num) : static_cast<unsigned __int128>(num);
  unsigned __int128 d = den < 0 ? static_cast<unsigned __int128>(-static_cast<__int128>(den))
                                : static_cast<unsigned __int128>(den);
  unsigned __int128 q = n / d;
  unsigned __int128 r = n % d;
  if (r * 2 >= d) ++q;
  auto units = static_cast<std::int64_t>(q);
  return from_units(negative ? -units : units);
}

std::string Decimal::to_string() const {
  std::uint64_t mag = units_ < 0 ? static_cast<std::uint64_t>(-(units_ + 1)) + 1 : static_cast<std::uint64_t>(units_);
  std::string out = units_ < 0 ? "-" : "";
  out += std::to_string(mag / kScale);
  std::uint64_t frac = mag % kScale;
  if (frac != 0) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%04llu", static_cast<unsigned long long>(frac));
    std::string f(buf);
    while (!f.empty() && f.back() == '0') f.pop_back();
    out += '.';
    out += f;
  }
  return out;
}

bool is_leap_year(int year) { return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0; }

int days_in_month(int year, int month) {
  static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2 && is_leap_year(year)) return 29;
  return kDays[static_cast<std::size_t>(month - 1)];
}

std::optional<Date> Date::from_ymd(int year, int month, int day) {
  if (year < 1 || year > 9999 || month < 1 || month > 12) return std::nullopt;
  if (day < 1 || day > days_in_month(year, month)) return std::nullopt;
  return from_days(days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)));
}

std::optional<Date> Date::parse_iso(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto y = s.substr(0, 4), m = s.substr(5, 2), d = s.substr(8, 2);
  if (!all_digits(y) || !all_digits(m) || !all_digits(d)) return std::nullopt;
  int yi = 0, mi = 0, di = 0;
  std::from_chars(y.data(), y.data() + 4, yi);
  std::from_chars(m.data(), m.data() + 2, mi);
  std::from_chars(d.data(), d.data() + 2, di);
  return from_ymd(yi, mi, di);
}

int Date::year() const { return civil_from_days(days_).y; }
int Date::month() const { return static_cast<int>(civil_from_days(days_).m); }
int Date::day() const { return static_cast<int>(civil_from_days(days_).d); }

std::string Date::to_string() const {
  Civil c = civil_from_days(days_);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", c.y, c.m, c.d);
  return buf;
}

std::optional<std::string> Value::to_text() const {
  switch (type()) {
    case ValueType::kNull: return std::nullopt;
    case ValueType::kInteger: return std::to_string(as_integer());
    case ValueType::kDecimal: return as_decimal().to_string();
    case ValueType::kText: return as_text();
    case ValueType::kBoolean: return std::string(as_boolean() ? "true" : "false");
    case ValueType::kDate: return as_date().to_string();
  }
  return std::nullopt;
}

std::string Value::debug_string() const {
  if (is_null()) return "NULL";
  if (type() == ValueType::kText) return "'" + as_text() + "'";
  return *to_text();
}

std::optional<Value> Value::parse_as(std::string_view text, ValueType type) {
  switch (type) {
    case ValueType::kNull: return std::nullopt;
    case ValueType::kText: return Value::text(std::string(text));
    case ValueType::kInteger: {
      std::string_view digits = text;
      if (!digits.empty() && digits.front() == '-') digits.remove_prefix(1);
      if (!all_digits(digits) || digits.size() > 18) return std::nullopt;
      std::int64_t v = 0;
      std::from_chars(text.data(), text.data() + text.size(), v);
      return Value::integer(v);
    }
    case ValueType::kDecimal: {
      auto d = Decimal::parse(text);
      if (!d) return std::nullopt;
      return Value::decimal(*d);
    }
    case ValueType::kBoolean:
      if (text == "true") return Value::boolean(true);
      if (text == "false") return Value::boolean(false);
      return std::nullopt;
    case ValueType::kDate: {
      auto d = Date::parse_iso(text);
      if (!d) return std::nullopt;
      return Value::date(*d);
    }
  }
  return std::nullopt;
}

std::strong_ordering compare_values(const Value& a, const Value& b) {
  if (a.is_null() || b.is_null()) throw TypeError("comparison with NULL operand");
  if (a.type() != b.type()) {
    throw TypeError("cannot compare " + std::string(type_name(a.type())) + " with " +
                    std::string(type_name(b.type())));
  }
  switch (a.type()) {
    case ValueType::kInteger: return a.as_integer() <=> b.as_integer();
    case ValueType::kDecimal: return a.as_decimal() <=> b.as_decimal();
    case ValueType::kText: {
      int c = a.as_text().compare(b.as_text());
      return c < 0 ? std::strong_ordering::less
                   : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }
    case ValueType::kBoolean: return a.as_boolean() <=> b.as_boolean();
    case ValueType::kDate: return a.as_date() <=> b.as_date();
    case ValueType::kNull: break;
  }
  return std::strong_ordering::equal;
}

std::strong_ordering order_values(const Value& a, const Value& b) {
  if (a.is_null() || b.is_null()) return !a.is_null() <=> !b.is_null();
  return compare_values(a, b);
}

bool compare_predicate(const Value& a, CompareOp op, const Value& b) {
  if (a.is_null() || b.is_null()) return false;
  auto c = compare_values(a, b);
  switch (op) {
    case CompareOp::kEq: return c == 0;
    case CompareOp::kNe: return c != 0;
    case CompareOp::kLt: return c < 0;
    case CompareOp::kLe: return c <= 0;
    case CompareOp::kGt: return c > 0;
    case CompareOp::kGe: return c >= 0;
  }
  return false;
}

std::string_view compare_op_symbol(CompareOp op) {
  switch (op) {
    case CompareOp::kEq: return "=";
    case CompareOp::kNe: return "<>";
    case CompareOp::kLt: return "<";
    case CompareOp::kLe: return "<=";
    case CompareOp::kGt: return ">";
    case CompareOp::kGe: return ">=";
  }
  return "?";
}

std::size_t hash_value(const Value& v) {
  std::size_t seed = static_cast<std::size_t>(v.type());
  switch (v.type()) {
    case ValueType::kNull: break;
    case ValueType::kInteger: hash_combine(seed, std::hash<std::int64_t>{}(v.as_integer())); break;
    case ValueType::kDecimal: hash_combine(seed, std::hash<std::int64_t>{}(v.as_decimal().units())); break;
    case ValueType::kText: hash_combine(seed, std::hash<std::string>{}(v.as_text())); break;
    case ValueType::kBoolean: hash_combine(seed, v.as_boolean() ? 1U : 2U); break;
    case ValueType::kDate: hash_combine(seed, std::hash<std::int32_t>{}(v.as_date().days())); break;
  }
  return seed;
}

}  // namespace uwh

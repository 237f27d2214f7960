#include <gtest/gtest.h>

#include <algorithm>

#include "test_support.hpp"
#include "uwh/errors.hpp"
#include "uwh/value.hpp"

using namespace uwh;
using uwh::support::Rng;

TEST(Decimal, ParsesFourFractionalDigits) {
  EXPECT_EQ(Decimal::parse("12.5")->units(), 125000);
  EXPECT_EQ(Decimal::parse("-0.0001")->units(), -1);
  EXPECT_EQ(Decimal::parse("7")->units(), 70000);
  EXPECT_FALSE(Decimal::parse("1.23456"));
  EXPECT_FALSE(Decimal::parse("1."));
  EXPECT_FALSE(Decimal::parse(".5"));
  EXPECT_FALSE(Decimal::parse(" 1"));
  EXPECT_FALSE(Decimal::parse(""));
}

TEST(Decimal, CanonicalTextDropsTrailingZeros) {
  EXPECT_EQ(Decimal::from_units(125000).to_string(), "12.5");
  EXPECT_EQ(Decimal::from_units(70000).to_string(), "7");
  EXPECT_EQ(Decimal::from_units(-1).to_string(), "-0.0001");
  EXPECT_EQ(Decimal::from_units(0).to_string(), "0");
}

TEST(Decimal, DivideRoundsHalfAwayFromZero) {
  EXPECT_EQ(Decimal::divide(5, 2).units(), 3);
  EXPECT_EQ(Decimal::divide(-5, 2).units(), -3);
  EXPECT_EQ(Decimal::divide(4, 3).units(), 1);
  EXPECT_EQ(Decimal::divide(875000 * 2, 2).units(), 875000);
  EXPECT_THROW(Decimal::divide(1, 0), TypeError);
}

TEST(Decimal, SumIsOrderIndependent) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Decimal> xs;
    for (int i = 0; i < 50; ++i) xs.push_back(support::random_value(rng, ValueType::kDecimal).as_decimal());
    Decimal forward, backward;
    for (auto x : xs) forward = forward + x;
    std::shuffle(xs.begin(), xs.end(), rng);
    for (auto it = xs.rbegin(); it != xs.rend(); ++it) backward = backward + *it;
    ASSERT_EQ(forward, backward);
  }
}

TEST(Decimal, TextRoundTrip) {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    Decimal d = support::random_value(rng, ValueType::kDecimal).as_decimal();
    ASSERT_EQ(Decimal::parse(d.to_string()), d) << d.to_string();
  }
}

TEST(Date, CalendarRules) {
  EXPECT_TRUE(is_leap_year(2000));
  EXPECT_FALSE(is_leap_year(1900));
  EXPECT_TRUE(is_leap_year(2012));
  EXPECT_EQ(days_in_month(2011, 2), 28);
  EXPECT_EQ(days_in_month(2012, 2), 29);
  EXPECT_TRUE(Date::from_ymd(2012, 2, 29));
  EXPECT_FALSE(Date::from_ymd(2011, 2, 29));
  EXPECT_FALSE(Date::from_ymd(2011, 13, 1));
  EXPECT_EQ(Date::from_ymd(1970, 1, 1)->days(), 0);
  EXPECT_EQ(Date::from_ymd(1970, 1, 2)->days(), 1);
  EXPECT_EQ(Date::from_ymd(1969, 12, 31)->days(), -1);
}

TEST(Date, StrictIsoParse) {
  auto d = Date::parse_iso("2011-12-31");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->year(), 2011);
  EXPECT_EQ(d->month(), 12);
  EXPECT_EQ(d->day(), 31);
  EXPECT_EQ(d->to_string(), "2011-12-31");
  EXPECT_FALSE(Date::parse_iso("2011-13-40"));
  EXPECT_FALSE(Date::parse_iso("2011-1-5"));
  EXPECT_FALSE(Date::parse_iso("31/12/2011"));
}

TEST(Date, DaysRoundTrip) {
  for (std::int32_t days = -719162; days <= 2932896; days += 997) {
    Date d = Date::from_days(days);
    auto back = Date::from_ymd(d.year(), d.month(), d.day());
    ASSERT_TRUE(back);
    ASSERT_EQ(back->days(), days);
    ASSERT_EQ(Date::parse_iso(d.to_string())->days(), days) << d.to_string();
  }
}

TEST(Value, ParseAsEachType) {
  EXPECT_EQ(Value::parse_as("42", ValueType::kInteger), Value::integer(42));
  EXPECT_EQ(Value::parse_as("-42", ValueType::kInteger), Value::integer(-42));
  EXPECT_FALSE(Value::parse_as("4x", ValueType::kInteger));
  EXPECT_FALSE(Value::parse_as("", ValueType::kInteger));
  EXPECT_EQ(Value::parse_as("true", ValueType::kBoolean), Value::boolean(true));
  EXPECT_FALSE(Value::parse_as("TRUE", ValueType::kBoolean));
  EXPECT_EQ(Value::parse_as("x y", ValueType::kText), Value::text("x y"));
  EXPECT_EQ(Value::parse_as("2011-09-01", ValueType::kDate), Value::date(*Date::from_ymd(2011, 9, 1)));
}

TEST(Value, TextRoundTripEveryType) {
  Rng rng(3);
  for (auto type : {ValueType::kInteger, ValueType::kDecimal, ValueType::kText, ValueType::kBoolean, ValueType::kDate}) {
    for (int i = 0; i < 500; ++i) {
      Value v = support::random_value(rng, type);
      auto text = v.to_text();
      ASSERT_TRUE(text);
      ASSERT_EQ(Value::parse_as(*text, type), v) << *text;
    }
  }
  EXPECT_FALSE(Value::null().to_text());
}

TEST(Value, ComparisonsAreTagChecked) {
  EXPECT_EQ(compare_values(Value::integer(1), Value::integer(2)), std::strong_ordering::less);
  EXPECT_THROW(compare_values(Value::integer(1), Value::text("1")), TypeError);
  EXPECT_THROW(compare_values(Value::null(), Value::integer(1)), TypeError);
  EXPECT_EQ(order_values(Value::null(), Value::integer(-5)), std::strong_ordering::less);
  EXPECT_EQ(order_values(Value::null(), Value::null()), std::strong_ordering::equal);
}

TEST(Value, PredicateWithNullIsFalse) {
  for (auto op : {CompareOp::kEq, CompareOp::kNe, CompareOp::kLt, CompareOp::kLe, CompareOp::kGt, CompareOp::kGe}) {
    EXPECT_FALSE(compare_predicate(Value::null(), op, Value::integer(1)));
    EXPECT_FALSE(compare_predicate(Value::integer(1), op, Value::null()));
  }
  EXPECT_TRUE(compare_predicate(Value::integer(1), CompareOp::kLe, Value::integer(1)));
  EXPECT_TRUE(compare_predicate(Value::text("a"), CompareOp::kNe, Value::text("b")));
}

TEST(Value, EqualValuesHashEqually) {
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    Value v = support::random_value(rng, ValueType::kText);
    Value copy = Value::parse_as(*v.to_text(), ValueType::kText).value();
    ASSERT_EQ(hash_value(v), hash_value(copy));
  }
}

#include <gtest/gtest.h>

#include <sstream>

#include "test_support.hpp"
#include "uwh/canonical.hpp"
#include "uwh/cleanse.hpp"
#include "uwh/errors.hpp"
#include "uwh/ingest.hpp"
#include "uwh/manifest.hpp"

using namespace uwh;
using uwh::support::TempDir;

namespace {

CleanseRule rule(const std::string& text) {
  auto rules = parse_rules(text);
  EXPECT_EQ(rules.size(), 1u);
  return rules.front();
}

Table people() {
  Table t;
  t.schema = parse_schema_manifest(
                 "TABLE person\n  id INTEGER PK\n  name TEXT\n  gender TEXT\n  born DATE NULL\n  score DECIMAL NULL\n")
                 .tables.at("person");
  return t;
}

Row person(std::int64_t id, Value name, Value gender = Value::text("F"), Value born = Value::null(),
           Value score = Value::null()) {
  return {Value::integer(id), std::move(name), std::move(gender), std::move(born), std::move(score)};
}

}  // namespace

TEST(ApplyRule, TrimChangesOneCell) {
  Table t = people();
  t.rows = {person(1, Value::text("  John  ")), person(2, Value::text("Mary"))};
  RuleOutcome out = apply_rule(t, rule("CLEAN person.name WITH trim;"));
  EXPECT_EQ(out.table.rows[0][1], Value::text("John"));
  EXPECT_EQ(out.table.rows[1], t.rows[1]);
  EXPECT_EQ(out.tally.cells_examined, 2u);
  EXPECT_EQ(out.tally.cells_changed, 1u);
  EXPECT_EQ(out.tally.cells_quarantined, 0u);
}

TEST(ApplyRule, NormalizeDateDayFirst) {
  Table t = people();
  t.rows = {person(1, Value::text("A"), Value::text("F"), Value::text("31/12/2011"))};
  RuleOutcome out = apply_rule(t, rule("CLEAN person.born WITH normalize_date('day_first', 'iso');"));
  ASSERT_EQ(out.table.rows.size(), 1u);
  EXPECT_EQ(out.table.rows[0][3], Value::date(*Date::from_ymd(2011, 12, 31)));
}

TEST(ApplyRule, UnparseableDateQuarantines) {
  Table t = people();
  t.rows = {person(1, Value::text("A"), Value::text("F"), Value::text("someday"))};
  RuleOutcome out = apply_rule(t, rule("CLEAN person.born WITH normalize_date('iso');"));
  EXPECT_TRUE(out.table.rows.empty());
  EXPECT_EQ(out.quarantined_rows, std::vector<std::size_t>{0});
  ASSERT_EQ(out.anomalies.size(), 1u);
  EXPECT_EQ(out.anomalies[0].column, "born");
}

TEST(ApplyRule, NullTokenBecomesNull) {
  Table t = people();
  t.rows = {person(1, Value::text("A"), Value::text("F"), Value::text("N/A"))};
  RuleOutcome out = apply_rule(t, rule("CLEAN person.born WITH null_standardize('', 'N/A', 'NULL', '-', '?');"));
  EXPECT_TRUE(out.table.rows[0][3].is_null());
  EXPECT_EQ(out.tally.cells_changed, 1u);
}

TEST(ApplyRule, DomainViolationQuarantines) {
  Table t = people();
  t.rows = {person(1, Value::text("A"), Value::text("XX")), person(2, Value::text("B"), Value::text("M"))};
  RuleOutcome out = apply_rule(t, rule("CLEAN person.gender WITH domain('M', 'F');"));
  ASSERT_EQ(out.table.rows.size(), 1u);
  EXPECT_EQ(out.table.rows[0][0], Value::integer(2));
  EXPECT_EQ(out.quarantined_rows, std::vector<std::size_t>{0});
  EXPECT_EQ(out.tally.cells_quarantined, 1u);
}

TEST(ApplyRule, RangeOnDecimal) {
  Table t = people();
  t.rows = {person(1, Value::text("A"), Value::text("F"), Value::null(), Value::decimal(*Decimal::parse("100.5"))),
            person(2, Value::text("B"), Value::text("F"), Value::null(), Value::decimal(*Decimal::parse("100")))};
  RuleOutcome out = apply_rule(t, rule("CLEAN person.score WITH range(0, 100);"));
  EXPECT_EQ(out.quarantined_rows, std::vector<std::size_t>{0});
}

TEST(ApplyRule, TypeMismatchIsHardError) {
  Table t = people();
  EXPECT_THROW(apply_rule(t, rule("CLEAN person.name WITH range(0, 100);")), ValidationError);
  EXPECT_THROW(apply_rule(t, rule("CLEAN person.born WITH trim;")), ValidationError);
  EXPECT_THROW(apply_rule(t, rule("CLEAN person.nope WITH trim;")), ValidationError);
}

TEST(ApplyRule, TalliesAreBounded) {
  support::Rng rng(99);
  Table t = people();
  for (int i = 0; i < 200; ++i) {
    t.rows.push_back(person(i, Value::text(support::random_text(rng, 8, false)),
                            Value::text(support::pick_index(rng, 3) ? "F" : "?")));
  }
  for (const char* text : {"CLEAN person.name WITH trim;", "CLEAN person.name WITH case('upper');",
                           "CLEAN person.gender WITH domain('M', 'F');",
                           "CLEAN person.gender WITH null_standardize('?');"}) {
    RuleOutcome out = apply_rule(t, rule(text));
    EXPECT_LE(out.tally.cells_changed + out.tally.cells_quarantined, out.tally.cells_examined) << text;
    EXPECT_EQ(out.table.rows.size() + out.quarantined_rows.size(), t.rows.size()) << text;
  }
}

TEST(ReadDate, PriorityAndAmbiguity) {
  auto r = read_date("03/04/2011", {DateFormat::kDayFirst, DateFormat::kMonthFirst});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->date, *Date::from_ymd(2011, 4, 3));
  EXPECT_TRUE(r->ambiguous);
  r = read_date("03/04/2011", {DateFormat::kMonthFirst, DateFormat::kDayFirst});
  EXPECT_EQ(r->date, *Date::from_ymd(2011, 3, 4));
  r = read_date("December 31, 2011", {DateFormat::kIso, DateFormat::kMonthName});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->date, *Date::from_ymd(2011, 12, 31));
  EXPECT_FALSE(r->ambiguous);
  EXPECT_FALSE(read_date("31/02/2011", {DateFormat::kDayFirst}));
}

TEST(TextHelpers, Basics) {
  EXPECT_EQ(trim("\t a b \n"), "a b");
  EXPECT_EQ(collapse_whitespace("a  \t b"), "a b");
  EXPECT_EQ(title_case("jOHN mCdonald"), "John Mcdonald");
}

TEST(CleanseTable, EmptyTableGivesEmptySlice) {
  Table t = people();
  CleanseResult r = cleanse_table(t, support::canonical_rule_set());
  EXPECT_EQ(r.report.rows_in, 0u);
  EXPECT_EQ(r.report.rows_out, 0u);
  EXPECT_EQ(r.report.cells_changed(), 0u);
  EXPECT_TRUE(r.quarantined.empty());
}

TEST(CleanseTable, RawCellRepairedOrQuarantined) {
  Table t = people();
  t.rows = {person(1, Value::text("A"), Value::text("F"), Value::text("2011-02-03")),
            person(2, Value::text("B"), Value::text("F"), Value::text("not a date"))};
  CleanseResult r = cleanse_table(t, {});
  ASSERT_EQ(r.table.rows.size(), 1u);
  EXPECT_EQ(r.table.rows[0][3], Value::date(*Date::from_ymd(2011, 2, 3)));
  EXPECT_EQ(r.report.raw_cells_repaired, 1u);
  EXPECT_EQ(r.quarantined.size(), 1u);
}

TEST(CleanseTable, IdempotentOnGeneratedData) {
  TempDir dir;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Dataset data = generate({.seed = seed, .students = 30, .dirty_rate = 0.1});
    StagingArea s = support::extract_dataset(data, dir / std::to_string(seed));
    for (const auto& [name, table] : s.tables) {
      CleanseResult once = cleanse_table(table, support::canonical_rule_set());
      CleanseResult twice = cleanse_table(once.table, support::canonical_rule_set());
      EXPECT_EQ(twice.table, once.table) << name;
      EXPECT_EQ(twice.report.cells_changed(), 0u) << name;
      EXPECT_EQ(twice.report.rows_quarantined, 0u) << name;
      EXPECT_EQ(once.report.rows_in, once.report.rows_out + once.report.rows_quarantined);
    }
  }
}

TEST(CleanseTable, AnomalousCellsMatchLedger) {
  TempDir dir;
  for (std::uint64_t seed : {42u, 7u, 1001u}) {
    Dataset data = generate({.seed = seed, .students = 100, .dirty_rate = 0.05});
    StagingArea s = support::extract_dataset(data, dir / std::to_string(seed));
    std::size_t cell_entries = 0;
    for (const auto& e : data.ledger.entries) {
      if (e.kind != dirt::kDuplicateRow && e.kind != dirt::kOrphanFk) ++cell_entries;
    }
    std::size_t anomalous = 0;
    for (const auto& [name, table] : s.tables) {
      anomalous += cleanse_table(table, support::canonical_rule_set()).report.anomalous_cells;
    }
    EXPECT_EQ(anomalous, cell_entries) << "seed " << seed;
  }
}

TEST(Dedup, PolicyExamples) {
  Table t = people();
  t.rows = {person(1, Value::text("A")), person(1, Value::text("A")), person(2, Value::text("B"))};
  CleanseResult r = dedup(t);
  EXPECT_EQ(r.table.rows.size(), 2u);
  EXPECT_EQ(r.report.exact_duplicates, 1u);

  Table distinct = people();
  distinct.rows = {person(1, Value::text("A")), person(2, Value::text("B"))};
  EXPECT_EQ(dedup(distinct).table, distinct);

  Table conflict = people();
  conflict.rows = {person(1, Value::text("A")), person(1, Value::text("Z"))};
  CleanseResult c = dedup(conflict);
  ASSERT_EQ(c.table.rows.size(), 1u);
  EXPECT_EQ(c.table.rows[0][1], Value::text("A"));
  ASSERT_EQ(c.quarantined.size(), 1u);
  EXPECT_NE(c.quarantined[0].reason.find("pk-conflict"), std::string::npos);
}

TEST(Reconcile, QuarantineAndNullify) {
  TempDir dir;
  StagingArea s = support::extract_dataset(generate({.students = 10, .dirty_rate = 0.0}), dir.path());
  const StagingArea pristine = s;

  StagingArea same = s;
  ReconcileReport none = reconcile_foreign_keys(same, FkPolicy{});
  EXPECT_EQ(none.rows_quarantined, 0u);
  EXPECT_EQ(same, pristine);

  std::size_t receipts = s.at("receipt").rows.size();
  s.at("receipt").rows[0][1] = Value::integer(999999);
  reconcile_foreign_keys(s, FkPolicy{});
  EXPECT_EQ(s.at("receipt").rows.size(), receipts - 1);
  EXPECT_EQ(s.quarantined_count("receipt"), 1u);
  EXPECT_TRUE(check_referential_integrity(s).empty());

  StagingArea n = pristine;
  Table& reg = n.at("registrationActivities");
  std::size_t act_col = *reg.schema.column_index("reg_act_id");
  reg.rows[0][act_col] = Value::integer(999999);
  FkPolicy nullify;
  nullify.overrides["registrationActivities.reg_act_id"] = FkAction::kNullify;
  nullify.validate(n);
  ReconcileReport rr = reconcile_foreign_keys(n, nullify);
  EXPECT_EQ(rr.rows_nullified, 1u);
  EXPECT_TRUE(n.at("registrationActivities").rows[0][act_col].is_null());
  EXPECT_EQ(n.at("registrationActivities").rows.size(), pristine.at("registrationActivities").rows.size());
}

TEST(Reconcile, NullifyOnNonNullableIsRejected) {
  TempDir dir;
  StagingArea s = support::extract_dataset(generate({.students = 5, .dirty_rate = 0.0}), dir.path());
  FkPolicy p;
  p.overrides["receipt.re_ac_id"] = FkAction::kNullify;
  EXPECT_THROW(p.validate(s), ValidationError);
}

TEST(Reconcile, CascadesToFixpoint) {
  TempDir dir;
  StagingArea s = support::extract_dataset(generate({.students = 10, .dirty_rate = 0.0}), dir.path());
  // Orphaning an account orphans its receipts in turn.
  Table& acc = s.at("account");
  Value ac_id = acc.rows[0][0];
  acc.rows[0][1] = Value::integer(999999);
  std::size_t dependent = 0;
  for (const auto& r : s.at("receipt").rows) dependent += r[1] == ac_id;
  ReconcileReport rep = reconcile_foreign_keys(s, FkPolicy{});
  EXPECT_EQ(rep.rows_quarantined, 1 + dependent);
  EXPECT_GE(rep.passes, dependent ? 2u : 1u);
  EXPECT_TRUE(check_referential_integrity(s).empty());
}

TEST(CleanseStaging, RecoversEveryLedgerEntry) {
  TempDir dir;
  for (std::uint64_t seed : {42u, 3u, 77u}) {
    support::Stages st = support::run_stages({.seed = seed, .students = 60}, dir / std::to_string(seed));
    auto failures = support::unrecovered_dirt(st.data.ledger, st.cleansed);
    EXPECT_TRUE(failures.empty()) << failures.size() << " unrecovered, first: " << failures.front();
    EXPECT_TRUE(check_referential_integrity(st.cleansed).empty());
    for (const auto& t : st.cleanse_report.tables) EXPECT_EQ(t.rows_in, t.rows_out + t.rows_quarantined) << t.table;
  }
}

TEST(CleanseStaging, ZeroDirtChangesNothing) {
  TempDir dir;
  support::Stages st = support::run_stages({.students = 40, .dirty_rate = 0.0}, dir.path());
  EXPECT_EQ(st.cleanse_report.cells_changed(), 0u);
  EXPECT_EQ(st.cleanse_report.rows_quarantined(), 0u);
  EXPECT_EQ(st.cleanse_report.anomalous_cells(), 0u);
}

TEST(CleanseReport, JsonAndText) {
  TempDir dir;
  support::Stages st = support::run_stages({.students = 20}, dir.path());
  std::string json = st.cleanse_report.to_json();
  EXPECT_NE(json.find("\"reconcile\""), std::string::npos);
  EXPECT_NE(json.find("cells_examined"), std::string::npos);
  EXPECT_FALSE(st.cleanse_report.to_text().empty());
}

TEST(RulesFile, CanonicalParsesAndRejectsOtherStatements) {
  std::size_t statements = 0;
  std::istringstream lines{std::string(canonical_rules())};
  for (std::string line; std::getline(lines, line);) statements += line.rfind("CLEAN ", 0) == 0;
  EXPECT_EQ(statements, 103u);
  EXPECT_EQ(support::canonical_rule_set().size(), statements);
  EXPECT_THROW(parse_rules("DROP TABLE item;"), ParseError);
  EXPECT_THROW(parse_rules("CLEAN a.b WITH sparkle;"), ParseError);
}

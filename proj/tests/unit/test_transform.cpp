#include <gtest/gtest.h>

#include <algorithm>

#include "test_support.hpp"
#include "uwh/canonical.hpp"
#include "uwh/errors.hpp"
#include "uwh/ingest.hpp"
#include "uwh/manifest.hpp"
#include "uwh/plan/parser.hpp"
#include "uwh/transform.hpp"

using namespace uwh;
using uwh::support::TempDir;

namespace {

const plan::Statement& statement(std::size_t index) { return support::canonical_plan_ast().statements.at(index); }

Date day(int y, int m, int d) { return *Date::from_ymd(y, m, d); }

Table tiny(const std::string& manifest, const std::string& name, std::vector<Row> rows) {
  Table t;
  t.schema = parse_schema_manifest(manifest).tables.at(name);
  t.rows = std::move(rows);
  return t;
}

const char* kPayManifest = "TABLE pay\n  id INTEGER PK\n  p DATE NULL\n  d DATE NULL\n  s TEXT NULL\n";
const char* kGradeManifest = "TABLE g\n  id INTEGER PK\n  grade DECIMAL NULL\n  k TEXT\n";

Value eval_on(const Table& t, const std::string& expr_text, std::size_t row) {
  plan::Expr e = plan::parse_expression(expr_text);
  AggregateContext ctx = AggregateContext::prepare(e, t);
  return eval_expr(e, t.rows.at(row), t.schema, ctx);
}

std::string column_digest(const Table& t, const std::string& column) {
  std::size_t c = *t.schema.column_index(column);
  std::string out;
  for (const auto& r : t.rows) out += r[c].debug_string() + "\x1f";
  return out;
}

}  // namespace

TEST(EvalExpr, PaidOnDue) {
  Table t = tiny(kPayManifest, "pay",
                 {{Value::integer(1), Value::date(day(2011, 9, 1)), Value::date(day(2011, 9, 15)), Value::null()},
                  {Value::integer(2), Value::null(), Value::date(day(2011, 9, 15)), Value::null()},
                  {Value::integer(3), Value::date(day(2011, 9, 15)), Value::date(day(2011, 9, 15)), Value::null()},
                  {Value::integer(4), Value::date(day(2011, 9, 16)), Value::date(day(2011, 9, 15)), Value::null()}});
  const std::string e = "PAID_ON_DUE(pay.p, pay.d)";
  EXPECT_EQ(eval_on(t, e, 0), Value::boolean(true));
  EXPECT_EQ(eval_on(t, e, 1), Value::boolean(false));
  EXPECT_EQ(eval_on(t, e, 2), Value::boolean(true));
  EXPECT_EQ(eval_on(t, e, 3), Value::boolean(false));
}

TEST(EvalExpr, CoalesceAndNullLogic) {
  Table t = tiny(kPayManifest, "pay", {{Value::integer(1), Value::null(), Value::null(), Value::null()}});
  EXPECT_EQ(eval_on(t, "COALESCE(pay.s, 'x')", 0), Value::text("x"));
  EXPECT_EQ(eval_on(t, "IS_NULL(pay.p)", 0), Value::boolean(true));
  EXPECT_EQ(eval_on(t, "pay.p = pay.d", 0), Value::boolean(false));
  EXPECT_EQ(eval_on(t, "pay.p <> pay.d", 0), Value::boolean(false));
  EXPECT_EQ(eval_on(t, "pay.id = 1 AND NOT FALSE", 0), Value::boolean(true));
  EXPECT_EQ(eval_on(t, "pay.id > 1 OR pay.s = 'a'", 0), Value::boolean(false));
}

TEST(EvalExpr, DifficultyBuckets) {
  auto dec = [](const char* s) { return Value::decimal(*Decimal::parse(s)); };
  Table t = tiny(kGradeManifest, "g",
                 {{Value::integer(1), dec("90"), Value::text("easy")},
                  {Value::integer(2), dec("85"), Value::text("easy")},
                  {Value::integer(3), dec("60"), Value::text("hard")},
                  {Value::integer(4), dec("65"), Value::text("hard")},
                  {Value::integer(5), Value::null(), Value::text("none")},
                  {Value::integer(6), dec("80"), Value::text("edge")},
                  {Value::integer(7), dec("65"), Value::text("mid")},
                  {Value::integer(8), dec("79.9999"), Value::text("mid")}});
  const std::string e = "DIFFICULTY(g.grade GROUP BY g.k THRESHOLDS 80, 65)";
  EXPECT_EQ(eval_on(t, e, 0), Value::text("low"));
  EXPECT_EQ(eval_on(t, e, 2), Value::text("high"));
  EXPECT_EQ(eval_on(t, e, 4), Value::text("unknown"));
  EXPECT_EQ(eval_on(t, e, 5), Value::text("low"));
  EXPECT_EQ(eval_on(t, e, 6), Value::text("medium"));
}

TEST(ExecDrop, Examples) {
  TempDir dir;
  StagingArea s = support::extract_dataset(generate({.students = 10}), dir.path());
  const auto assets = static_cast<std::int64_t>(s.at("assets").rows.size());
  const auto items = static_cast<std::int64_t>(s.at("item").rows.size());
  EXPECT_EQ(exec_drop(s, "assets"), assets);
  EXPECT_EQ(exec_drop(s, "item"), items);
  EXPECT_FALSE(s.find("assets"));
  EXPECT_FALSE(s.find("item"));
  try {
    exec_drop(s, "payroll");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("payroll"), std::string::npos);
  }
  s.at("alumni").rows.clear();
  EXPECT_EQ(exec_drop(s, "alumni"), 0);
}

TEST(ExecMerge, MatchesNestedLoopOracle) {
  TempDir dir;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    support::Stages st = support::run_stages({.seed = seed, .students = 40}, dir / std::to_string(seed));
    StagingArea s = st.cleansed;
    exec_drop(s, "assets");
    exec_drop(s, "item");
    for (std::size_t i : {2u, 3u}) {
      const auto& merge = std::get<plan::Merge>(statement(i).body);
      std::vector<Row> expected = support::oracle_merge(s, merge);
      const std::size_t base_rows = expected.size();
      exec_merge(s, merge);
      const Table& out = s.at(merge.target);
      EXPECT_EQ(out.rows.size(), base_rows);
      EXPECT_EQ(out.rows, expected) << merge.target;
      for (const auto& src : merge.sources) {
        if (src != merge.target) {
          EXPECT_FALSE(s.find(src)) << src;
        }
      }
    }
    EXPECT_TRUE(s.find("registeredActivities"));
    EXPECT_FALSE(s.find("registrationActivities"));
  }
}

TEST(ExecMerge, EmptyTargetWidensSchema) {
  TempDir dir;
  StagingArea s = support::extract_dataset(generate({.students = 5}), dir.path());
  s.at("transcript").rows.clear();
  std::size_t cols = s.at("transcript").schema.columns.size();
  exec_merge(s, std::get<plan::Merge>(statement(2).body));
  EXPECT_EQ(s.at("transcript").rows.size(), 0u);
  EXPECT_EQ(s.at("transcript").schema.columns.size(), cols + 6);
}

TEST(ExecMerge, AmbiguousMatchNamesKey) {
  DatabaseSchema schema = parse_schema_manifest(
      "TABLE a\n  id INTEGER PK\n  k INTEGER\nTABLE b\n  bid INTEGER PK\n  k INTEGER\n  v TEXT\n");
  StagingArea s;
  s.tables["a"] = {schema.tables.at("a"), {{Value::integer(1), Value::integer(7)}}};
  s.tables["b"] = {schema.tables.at("b"),
                   {{Value::integer(1), Value::integer(7), Value::text("x")},
                    {Value::integer(2), Value::integer(7), Value::text("y")}}};
  plan::Plan p = plan::parse_plan("MERGE a, b INTO a ON a.k = b.k KEEP b.v;");
  try {
    exec_merge(s, std::get<plan::Merge>(p.statements[0].body));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("(7)"), std::string::npos) << e.what();
  }
}

TEST(ExecAddColumn, DerivedColumnsMatchRecomputation) {
  TempDir dir;
  support::Stages st = support::run_stages({.seed = 5, .students = 60}, dir.path());
  StagingArea s = st.cleansed;
  const Table receipts = s.at("receipt");
  for (std::size_t i = 0; i < 4; ++i) {
    if (auto* d = statement(i).as<plan::DropTable>()) exec_drop(s, d->table);
    if (auto* m = statement(i).as<plan::Merge>()) exec_merge(s, *m);
  }
  const Table before_tr = s.at("transcript");
  const Table before_re = s.at("receipt");
  exec_add_column(s, std::get<plan::AddColumn>(statement(4).body));
  exec_add_column(s, std::get<plan::AddColumn>(statement(5).body));

  const Table& re = s.at("receipt");
  ASSERT_EQ(re.schema.columns.size(), before_re.schema.columns.size() + 1);
  std::size_t pay = *receipts.schema.column_index("re_dateOfPayment");
  std::size_t due = *receipts.schema.column_index("re_dueDate");
  std::size_t flag = *re.schema.column_index("re_paidOnDueDate");
  ASSERT_EQ(re.rows.size(), receipts.rows.size());
  for (std::size_t r = 0; r < re.rows.size(); ++r) {
    const Value& p = receipts.rows[r][pay];
    const Value& d = receipts.rows[r][due];
    bool expected = !p.is_null() && !d.is_null() && p.as_date().days() <= d.as_date().days();
    ASSERT_EQ(re.rows[r][flag], Value::boolean(expected)) << r;
  }
  for (const auto& c : before_re.schema.columns) EXPECT_EQ(column_digest(re, c.name), column_digest(before_re, c.name));

  const Table& tr = s.at("transcript");
  std::size_t grade = *tr.schema.column_index("tr_grade");
  std::size_t code = *tr.schema.column_index("co_code");
  std::size_t diff = *tr.schema.column_index("tr_courseDifficulty");
  std::map<std::string, std::vector<Value>> by_course;
  for (const auto& r : tr.rows) by_course[r[code].debug_string()].push_back(r[grade]);
  for (const auto& r : tr.rows) {
    ASSERT_EQ(r[diff], Value::text(support::oracle_difficulty(by_course[r[code].debug_string()], 800000, 650000)));
  }
  for (const auto& c : before_tr.schema.columns) EXPECT_EQ(column_digest(tr, c.name), column_digest(before_tr, c.name));
}

TEST(ExecAddColumn, DifficultyIsOrderIndependent) {
  TempDir dir;
  support::Stages st = support::run_stages({.seed = 8, .students = 40}, dir.path());
  StagingArea a = st.cleansed;
  for (std::size_t i = 0; i < 4; ++i) {
    if (auto* d = statement(i).as<plan::DropTable>()) exec_drop(a, d->table);
    if (auto* m = statement(i).as<plan::Merge>()) exec_merge(a, *m);
  }
  StagingArea b = a;
  support::Rng rng(3);
  std::shuffle(b.at("transcript").rows.begin(), b.at("transcript").rows.end(), rng);
  const auto& add = std::get<plan::AddColumn>(statement(4).body);
  exec_add_column(a, add);
  exec_add_column(b, add);
  auto sorted = [](std::vector<Row> rows) {
    std::sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) { return order_keys(x, y) < 0; });
    return rows;
  };
  EXPECT_EQ(sorted(a.at("transcript").rows), sorted(b.at("transcript").rows));
}

TEST(ExecAddColumn, EmptyTableAndCollision) {
  TempDir dir;
  StagingArea s = support::extract_dataset(generate({.students = 5}), dir.path());
  s.at("receipt").rows.clear();
  exec_add_column(s, std::get<plan::AddColumn>(statement(5).body));
  EXPECT_TRUE(s.at("receipt").schema.has_column("re_paidOnDueDate"));
  EXPECT_TRUE(s.at("receipt").rows.empty());
  EXPECT_THROW(exec_add_column(s, std::get<plan::AddColumn>(statement(5).body)), ValidationError);
}

TEST(ExecRemoveColumn, Examples) {
  TempDir dir;
  StagingArea s = support::extract_dataset(generate({.students = 10}), dir.path());
  const Table before = s.at("student");
  exec_remove_column(s, std::get<plan::RemoveColumn>(plan::parse_plan("REMOVE COLUMN student.st_phone;").statements[0].body));
  const Table& after = s.at("student");
  EXPECT_FALSE(after.schema.has_column("st_phone"));
  EXPECT_EQ(after.schema.columns.size(), before.schema.columns.size() - 1);
  for (const auto& c : after.schema.columns) EXPECT_EQ(column_digest(after, c.name), column_digest(before, c.name));
  try {
    exec_remove_column(s, std::get<plan::RemoveColumn>(plan::parse_plan("REMOVE COLUMN student.st_nope;").statements[0].body));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("student.st_nope"), std::string::npos);
  }
  EXPECT_THROW(
      exec_remove_column(s, std::get<plan::RemoveColumn>(plan::parse_plan("REMOVE COLUMN student.st_id;").statements[0].body)),
      ValidationError);
}

TEST(ExecutePlan, CanonicalYieldsEightTables) {
  TempDir dir;
  support::Stages st = support::run_stages({.students = 50}, dir.path());
  EXPECT_EQ(st.transformed.tables.size(), 8u);
  for (const char* gone : {"assets", "item", "department", "section", "course", "activities", "registrationActivities"}) {
    EXPECT_FALSE(st.transformed.find(gone)) << gone;
  }
  const auto& re = st.transformed.at("receipt").schema;
  EXPECT_TRUE(re.has_column("re_paidOnDueDate"));
  EXPECT_FALSE(re.has_column("re_dueDate"));
  EXPECT_FALSE(re.has_column("re_dateOfPayment"));
  EXPECT_FALSE(st.transformed.at("registeredActivities").schema.has_column("ac_supervisor"));
  EXPECT_FALSE(st.transformed.at("student").schema.has_column("st_phone"));
  EXPECT_FALSE(st.transformed.at("student").schema.has_column("st_email"));
  EXPECT_EQ(st.transformed.at("transcript").rows.size(), st.cleansed.at("transcript").rows.size());
}

TEST(ExecutePlan, LineageOnePerStatement) {
  TempDir dir;
  support::Stages st = support::run_stages({.students = 20}, dir.path());
  StagingArea s = st.cleansed;
  LineageLog log = execute_plan(s, support::canonical_plan_ast(), {support::kPinnedTimestamp});
  ASSERT_EQ(log.entries.size(), 19u);
  for (std::size_t i = 0; i < log.entries.size(); ++i) {
    EXPECT_EQ(log.entries[i].statement_index, static_cast<int>(i + 1));
    EXPECT_EQ(log.entries[i].stage, "transform");
    EXPECT_EQ(log.entries[i].timestamp, support::kPinnedTimestamp);
  }
  EXPECT_EQ(log.entries[2].rows_affected, static_cast<std::int64_t>(st.cleansed.at("transcript").rows.size()));
  std::string text = log.to_text();
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), 19u);
}

TEST(ExecutePlan, Deterministic) {
  TempDir dir;
  support::Stages a = support::run_stages({.seed = 9, .students = 30}, dir / "a");
  support::Stages b = support::run_stages({.seed = 9, .students = 30}, dir / "b");
  save_staging(a.transformed, dir / "dump_a");
  save_staging(b.transformed, dir / "dump_b");
  EXPECT_EQ(support::snapshot_dir(dir / "dump_a"), support::snapshot_dir(dir / "dump_b"));
}

TEST(ExecutePlan, FailureLeavesStagingUntouched) {
  TempDir dir;
  support::Stages st = support::run_stages({.students = 20}, dir.path());
  StagingArea s = st.cleansed;
  // Passes validation (the duplicate exists only in the data), fails at run time.
  Table& sec = s.at("section");
  sec.rows.push_back(sec.rows.front());
  sec.rows.back()[*sec.schema.column_index("se_room")] = Value::text("elsewhere");
  const StagingArea before = s;
  save_staging(before, dir / "before");
  try {
    execute_plan(s, support::canonical_plan_ast());
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("statement 3", 0), 0u) << e.what();
  }
  EXPECT_EQ(s, before);
  save_staging(s, dir / "after");
  EXPECT_EQ(support::snapshot_dir(dir / "before"), support::snapshot_dir(dir / "after"));
}

TEST(ExecutePlan, InvalidPlanRejectedBeforeRunning) {
  TempDir dir;
  StagingArea s = support::extract_dataset(generate({.students = 5}), dir.path());
  const StagingArea before = s;
  EXPECT_THROW(execute_plan(s, plan::parse_plan("DROP TABLE assets; REMOVE COLUMN receipt.re_id;")), ValidationError);
  EXPECT_EQ(s, before);
}

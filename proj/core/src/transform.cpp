#include "uwh/transform.hpp"

#include <algorithm>
#include <unordered_map>

#include "uwh/cleanse.hpp"
#include "uwh/errors.hpp"
#include "uwh/plan/validate.hpp"

namespace uwh {

using plan::Expr;

namespace {

bool truthy(const Value& v) { return v.type() == ValueType::kBoolean && v.as_boolean(); }

__int128 grade_units(const Value& v) {
  if (v.type() == ValueType::kInteger) return static_cast<__int128>(v.as_integer()) * Decimal::kScale;
  return v.as_decimal().units();
}

void prepare_node(const Expr& e, const Table& table,
                  std::map<const Expr*, std::unordered_map<Value, AggregateContext::GroupStats>>& out) {
  if (e.kind == Expr::Kind::kDifficulty) {
    auto& groups = out[&e];
    AggregateContext empty;
    for (const auto& row : table.rows) {
      Value grade = eval_expr(e.args[0], row, table.schema, empty);
      Value group = eval_expr(e.args[1], row, table.schema, empty);
      auto& g = groups[group];
      if (grade.is_null()) continue;
      g.sum_units += grade_units(grade);
      ++g.count;
    }
  }
  for (const auto& a : e.args) prepare_node(a, table, out);
}

// Rewrites every table schema from the shadow schema after a statement.
void sync_schemas(StagingArea& staging, const DatabaseSchema& schema) {
  for (auto& [name, table] : staging.tables) {
    if (const TableSchema* s = schema.find(name)) table.schema = *s;
  }
}

DatabaseSchema next_schema(const StagingArea& staging, const plan::StatementBody& body) {
  DatabaseSchema schema = staging.schema();
  plan::apply_to_schema(schema, plan::Statement{body, {}});
  return schema;
}

}  // namespace

std::string LineageLog::to_text() const {
  std::string out;
  for (const auto& e : entries) out += e.to_line() + "\n";
  return out;
}

AggregateContext AggregateContext::prepare(const Expr& expr, const Table& table) {
  AggregateContext ctx;
  prepare_node(expr, table, ctx.stats_);
  return ctx;
}

const AggregateContext::GroupStats* AggregateContext::find(const Expr* node, const Value& group) const {
  auto it = stats_.find(node);
  if (it == stats_.end()) return nullptr;
  auto g = it->second.find(group);
  return g == it->second.end() ? nullptr : &g->second;
}

Value eval_expr(const Expr& e, const Row& row, const TableSchema& schema, const AggregateContext& ctx) {
  switch (e.kind) {
    case Expr::Kind::kLiteral: return e.literal;
    case Expr::Kind::kColumn: {
      auto idx = schema.column_index(e.column.column);
      if (!idx) throw ValidationError("unknown column '" + e.column.to_string() + "'");
      return row[*idx];
    }
    case Expr::Kind::kCompare: {
      Value a = eval_expr(e.args[0], row, schema, ctx);
      Value b = eval_expr(e.args[1], row, schema, ctx);
      return Value::boolean(compare_predicate(a, e.op, b));
    }
    case Expr::Kind::kAnd:
      return Value::boolean(truthy(eval_expr(e.args[0], row, schema, ctx)) &&
                            truthy(eval_expr(e.args[1], row, schema, ctx)));
    case Expr::Kind::kOr:
      return Value::boolean(truthy(eval_expr(e.args[0], row, schema, ctx)) ||
                            truthy(eval_expr(e.args[1], row, schema, ctx)));
    case Expr::Kind::kNot: return Value::boolean(!truthy(eval_expr(e.args[0], row, schema, ctx)));
    case Expr::Kind::kCoalesce: {
      Value a = eval_expr(e.args[0], row, schema, ctx);
      return a.is_null() ? eval_expr(e.args[1], row, schema, ctx) : a;
    }
    case Expr::Kind::kIsNull: return Value::boolean(eval_expr(e.args[0], row, schema, ctx).is_null());
    case Expr::Kind::kPaidOnDue: {
      Value paid = eval_expr(e.args[0], row, schema, ctx);
      Value due = eval_expr(e.args[1], row, schema, ctx);
      return Value::boolean(compare_predicate(paid, CompareOp::kLe, due));
    }
    case Expr::Kind::kDifficulty: {
      Value group = eval_expr(e.args[1], row, schema, ctx);
      const auto* g = group.is_null() ? nullptr : ctx.find(&e, group);
      if (!g || g->count == 0) return Value::text("unknown");
      // mean >= t  <=>  sum >= t * count, exact in Decimal units.
      const __int128 hi = static_cast<__int128>(e.hi.units()) * g->count;
      const __int128 lo = static_cast<__int128>(e.lo.units()) * g->count;
      if (g->sum_units >= hi) return Value::text("low");
      if (g->sum_units >= lo) return Value::text("medium");
      return Value::text("high");
    }
  }
  return Value::null();
}

std::int64_t exec_drop(StagingArea& staging, const std::string& name) {
  const Table* t = staging.find(name);
  if (!t) throw ValidationError("cannot drop unknown table '" + name + "'");
  auto rows = static_cast<std::int64_t>(t->rows.size());
  DatabaseSchema schema = next_schema(staging, plan::DropTable{name});
  staging.tables.erase(name);
  sync_schemas(staging, schema);
  return rows;
}

std::int64_t exec_merge(StagingArea& staging, const plan::Merge& merge) {
  DatabaseSchema before = staging.schema();
  plan::MergeLayout layout = plan::plan_merge(merge, before);
  DatabaseSchema after = before;
  plan::apply_to_schema(after, plan::Statement{merge, {}});

  struct StepIndex {
    const Table* table;
    std::vector<std::pair<std::string, std::size_t>> probe;  // attached table, column index there
    std::unordered_map<KeyTuple, std::vector<std::size_t>, KeyTupleHash> rows;
  };
  std::vector<StepIndex> steps;
  std::map<std::string, std::size_t> slot{{layout.base, 0}};
  for (const auto& step : layout.steps) {
    StepIndex idx;
    idx.table = &staging.at(step.table);
    std::vector<std::size_t> local;
    for (const auto& key : step.keys) {
      const Table& attached = staging.at(key.attached.table);
      idx.probe.emplace_back(key.attached.table, *attached.schema.column_index(key.attached.column));
      local.push_back(*idx.table->schema.column_index(key.column));
    }
    for (std::size_t r = 0; r < idx.table->rows.size(); ++r) {
      KeyTuple k = project(idx.table->rows[r], local);
      if (!any_null(k)) idx.rows[k].push_back(r);
    }
    slot[step.table] = steps.size() + 1;
    steps.push_back(std::move(idx));
  }
  std::vector<std::pair<std::size_t, std::size_t>> keep_at;  // (slot, column)
  for (const auto& k : layout.keep) {
    keep_at.emplace_back(slot.at(k.table), *staging.at(k.table).schema.column_index(k.column));
  }

  const Table& base = staging.at(layout.base);
  Table result;
  result.schema = layout.result_schema;
  result.rows.reserve(base.rows.size());
  std::vector<const Row*> matched(steps.size() + 1);
  for (const Row& row : base.rows) {
    matched[0] = &row;
    for (std::size_t s = 0; s < steps.size(); ++s) {
      const StepIndex& st = steps[s];
      matched[s + 1] = nullptr;
      KeyTuple probe;
      bool complete = true;
      for (const auto& [table, col] : st.probe) {
        const Row* src = matched[slot.at(table)];
        if (!src || (*src)[col].is_null()) {
          complete = false;
          break;
        }
        probe.push_back((*src)[col]);
      }
      if (!complete) continue;
      auto it = st.rows.find(probe);
      if (it == st.rows.end()) continue;
      if (it->second.size() > 1) {
        throw ValidationError("ambiguous join: key (" + format_key(probe) + ") matches " +
                              std::to_string(it->second.size()) + " rows of " + st.table->schema.name);
      }
      matched[s + 1] = &st.table->rows[it->second.front()];
    }
    Row out = row;
    for (const auto& [s, col] : keep_at) out.push_back(matched[s] ? (*matched[s])[col] : Value::null());
    result.rows.push_back(std::move(out));
  }
  auto affected = static_cast<std::int64_t>(result.rows.size());
  for (const auto& c : layout.consumed) staging.tables.erase(c);
  staging.tables[layout.result] = std::move(result);
  sync_schemas(staging, after);
  return affected;
}

std::int64_t exec_add_column(StagingArea& staging, const plan::AddColumn& add) {
  DatabaseSchema after = next_schema(staging, add);
  Table& table = staging.at(add.column.table);
  AggregateContext ctx = AggregateContext::prepare(add.derivation, table);
  std::vector<Value> values;
  values.reserve(table.rows.size());
  for (const auto& row : table.rows) values.push_back(eval_expr(add.derivation, row, table.schema, ctx));
  for (std::size_t r = 0; r < table.rows.size(); ++r) table.rows[r].push_back(std::move(values[r]));
  sync_schemas(staging, after);
  return static_cast<std::int64_t>(table.rows.size());
}

std::int64_t exec_remove_column(StagingArea& staging, const plan::RemoveColumn& remove) {
  Table* table = staging.find(remove.column.table);
  if (!table) throw ValidationError("unknown table '" + remove.column.table + "'");
  auto idx = table->schema.column_index(remove.column.column);
  if (!idx) throw ValidationError("unknown column '" + remove.column.to_string() + "'");
  DatabaseSchema after = next_schema(staging, remove);
  for (auto& row : table->rows) row.erase(row.begin() + static_cast<std::ptrdiff_t>(*idx));
  sync_schemas(staging, after);
  return static_cast<std::int64_t>(table->rows.size());
}

std::int64_t exec_clean(StagingArea& staging, const plan::Clean& clean) {
  Table& table = staging.at(clean.column.table);
  CleanseRule rule = rule_from_statement(clean);
  CleanseResult result = cleanse_table(table, {rule});
  for (const auto& q : result.quarantined) {
    auto& qt = staging.quarantine[table.schema.name];
    if (qt.columns.empty()) {
      for (const auto& c : table.schema.columns) qt.columns.push_back(c.name);
    }
    QuarantinedRow moved = q;
    moved.stage = "transform";
    qt.rows.push_back(std::move(moved));
  }
  table = std::move(result.table);
  return static_cast<std::int64_t>(result.report.anomalous_cells + result.report.rows_quarantined);
}

LineageLog execute_plan(StagingArea& staging, const plan::Plan& plan, const ExecOptions& options) {
  plan::ValidateOptions vopts;
  vopts.require_warehouse_declarations = false;
  plan::PlanCheck check = plan::validate_plan(plan, staging.schema(), vopts);
  if (!check.ok()) throw ValidationError("plan failed validation:\n" + check.summary());

  StagingArea work = staging;
  LineageLog log;
  for (std::size_t i = 0; i < plan.statements.size(); ++i) {
    const plan::Statement& stmt = plan.statements[i];
    LineageEntry entry;
    entry.timestamp = options.timestamp;
    entry.stage = "transform";
    entry.statement_index = static_cast<int>(i + 1);
    entry.text = plan::to_source(stmt);
    try {
      std::visit(
          [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, plan::DropTable>) {
              entry.tables = {s.table};
              entry.rows_affected = exec_drop(work, s.table);
            } else if constexpr (std::is_same_v<T, plan::Merge>) {
              entry.tables = s.sources;
              if (std::find(s.sources.begin(), s.sources.end(), s.target) == s.sources.end()) {
                entry.tables.push_back(s.target);
              }
              entry.rows_affected = exec_merge(work, s);
            } else if constexpr (std::is_same_v<T, plan::AddColumn>) {
              entry.tables = {s.column.table};
              entry.rows_affected = exec_add_column(work, s);
            } else if constexpr (std::is_same_v<T, plan::RemoveColumn>) {
              entry.tables = {s.column.table};
              entry.rows_affected = exec_remove_column(work, s);
            } else if constexpr (std::is_same_v<T, plan::Clean>) {
              entry.tables = {s.column.table};
              entry.rows_affected = exec_clean(work, s);
            } else if constexpr (std::is_same_v<T, plan::Fact>) {
              entry.tables = {s.table};
            } else {
              entry.tables = {s.table};
            }
          },
          stmt.body);
    } catch (const Error& e) {
      throw ValidationError("statement " + std::to_string(i + 1) + " (" + entry.text + "): " + e.what());
    }
    work.record(entry);
    log.entries.push_back(std::move(entry));
  }
  staging = std::move(work);
  return log;
}

}  // namespace uwh

#include "uwh/plan/validate.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "uwh/cleanse.hpp"
#include "uwh/errors.hpp"

namespace uwh::plan {

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

const TableSchema& require_table(const DatabaseSchema& schema, const std::string& name) {
  const TableSchema* t = schema.find(name);
  if (!t) throw ValidationError("unknown table '" + name + "'");
  return *t;
}

TableSchema& require_table(DatabaseSchema& schema, const std::string& name) {
  auto it = schema.tables.find(name);
  if (it == schema.tables.end()) throw ValidationError("unknown table '" + name + "'");
  return it->second;
}

const ColumnDef& require_column(const DatabaseSchema& schema, const QualifiedColumn& q) {
  const TableSchema& t = require_table(schema, q.table);
  const ColumnDef* c = t.find_column(q.column);
  if (!c) throw ValidationError("unknown column '" + q.to_string() + "'");
  return *c;
}

void collect_columns(const Expr& e, std::vector<QualifiedColumn>& out) {
  if (e.kind == Expr::Kind::kColumn) out.push_back(e.column);
  for (const auto& a : e.args) collect_columns(a, out);
}

// Columns a statement reads, as (table, column).
std::vector<QualifiedColumn> references(const Statement& s) {
  std::vector<QualifiedColumn> out;
  if (const auto* m = s.as<Merge>()) {
    for (const auto& c : m->conditions) {
      out.push_back(c.left);
      out.push_back(c.right);
    }
    for (const auto& k : m->keep) out.push_back(k);
  } else if (const auto* a = s.as<AddColumn>()) {
    collect_columns(a->derivation, out);
  } else if (const auto* c = s.as<Clean>()) {
    out.push_back(c->column);
  } else if (const auto* d = s.as<Dimension>()) {
    out.push_back({d->table, d->key, {}});
  }
  return out;
}

bool is_numeric(ValueType t) { return t == ValueType::kInteger || t == ValueType::kDecimal; }

}  // namespace

MergeLayout plan_merge(const Merge& merge, const DatabaseSchema& schema) {
  MergeLayout layout;
  std::set<std::string> listed;
  for (const auto& s : merge.sources) {
    require_table(schema, s);
    if (!listed.insert(s).second) throw ValidationError("table '" + s + "' listed twice in MERGE");
  }
  std::vector<std::string> sources;
  if (listed.count(merge.target)) {
    layout.base = merge.target;
    layout.result = merge.target;
    for (const auto& s : merge.sources) {
      if (s != merge.target) sources.push_back(s);
    }
  } else if (schema.find(merge.target)) {
    layout.base = merge.target;
    layout.result = merge.target;
    sources = merge.sources;
  } else {
    if (!is_identifier(merge.target)) throw ValidationError("invalid table name '" + merge.target + "'");
    layout.base = merge.sources.front();
    layout.result = merge.target;
    sources.assign(merge.sources.begin() + 1, merge.sources.end());
  }
  if (sources.empty()) throw ValidationError("MERGE needs at least one source besides the base table");
  for (const auto& s : sources) layout.consumed.push_back(s);
  if (layout.result != layout.base) layout.consumed.push_back(layout.base);

  std::set<std::string> participants(sources.begin(), sources.end());
  participants.insert(layout.base);
  for (const auto& c : merge.conditions) {
    for (const QualifiedColumn* q : {&c.left, &c.right}) {
      if (!participants.count(q->table)) {
        throw ValidationError("join condition references '" + q->table + "', which is not part of the MERGE");
      }
      require_column(schema, *q);
    }
    if (c.left.table == c.right.table) {
      throw ValidationError("join condition " + c.left.to_string() + " = " + c.right.to_string() +
                            " compares a table with itself");
    }
    const ColumnDef& l = require_column(schema, c.left);
    const ColumnDef& r = require_column(schema, c.right);
    if (l.type != r.type) {
      throw ValidationError("join condition type mismatch: " + c.left.to_string() + " is " +
                            std::string(type_name(l.type)) + ", " + c.right.to_string() + " is " +
                            std::string(type_name(r.type)));
    }
  }

  std::set<std::string> attached{layout.base};
  std::vector<std::string> pending = sources;
  while (!pending.empty()) {
    bool progressed = false;
    for (auto it = pending.begin(); it != pending.end(); ++it) {
      MergeLayout::Step step;
      step.table = *it;
      for (const auto& c : merge.conditions) {
        if (c.left.table == *it && attached.count(c.right.table)) step.keys.push_back({c.right, c.left.column});
        if (c.right.table == *it && attached.count(c.left.table)) step.keys.push_back({c.left, c.right.column});
      }
      if (step.keys.empty()) continue;
      attached.insert(*it);
      layout.steps.push_back(std::move(step));
      pending.erase(it);
      progressed = true;
      break;
    }
    if (!progressed) throw ValidationError("source '" + pending.front() + "' is not connected by ON conditions");
  }

  const TableSchema& base = require_table(schema, layout.base);
  layout.result_schema = base;
  layout.result_schema.name = layout.result;
  auto consumed = [&](const std::string& t) { return contains(layout.consumed, t); };
  std::vector<ForeignKey> fks;
  for (auto fk : base.foreign_keys) {
    if (fk.target_table == layout.base) fk.target_table = layout.result;
    else if (consumed(fk.target_table)) continue;
    fks.push_back(std::move(fk));
  }
  std::vector<std::string> kept_names;
  for (const auto& k : merge.keep) {
    if (k.table == layout.base) {
      throw ValidationError("KEEP column " + k.to_string() + " belongs to the base table, which is kept whole");
    }
    if (!participants.count(k.table)) throw ValidationError("KEEP column " + k.to_string() + " is not from a source");
    ColumnDef col = require_column(schema, k);
    if (layout.result_schema.has_column(col.name)) {
      throw ValidationError("KEEP column " + k.to_string() + " collides with an existing column of " + layout.result);
    }
    col.nullable = true;
    layout.result_schema.columns.push_back(col);
    layout.keep.push_back(k);
    kept_names.push_back(k.table + "." + k.column);
  }
  for (const auto& s : sources) {
    for (const auto& fk : require_table(schema, s).foreign_keys) {
      if (consumed(fk.target_table)) continue;
      bool all_kept = std::all_of(fk.columns.begin(), fk.columns.end(),
                                  [&](const std::string& c) { return contains(kept_names, s + "." + c); });
      if (all_kept) fks.push_back(fk);
    }
  }
  layout.result_schema.foreign_keys = std::move(fks);
  return layout;
}

ValueType infer_type(const Expr& e, const TableSchema& table) {
  switch (e.kind) {
    case Expr::Kind::kLiteral: return e.literal.type();
    case Expr::Kind::kColumn: {
      if (e.column.table != table.name) {
        throw ValidationError("derivation may only reference " + table.name + ", found " + e.column.to_string());
      }
      const ColumnDef* c = table.find_column(e.column.column);
      if (!c) throw ValidationError("unknown column '" + e.column.to_string() + "'");
      return c->type;
    }
    case Expr::Kind::kCompare: {
      ValueType a = infer_type(e.args[0], table), b = infer_type(e.args[1], table);
      if (a != ValueType::kNull && b != ValueType::kNull && a != b) {
        throw ValidationError("cannot compare " + std::string(type_name(a)) + " with " + std::string(type_name(b)));
      }
      return ValueType::kBoolean;
    }
    case Expr::Kind::kAnd:
    case Expr::Kind::kOr:
    case Expr::Kind::kNot:
      for (const auto& a : e.args) {
        ValueType t = infer_type(a, table);
        if (t != ValueType::kBoolean && t != ValueType::kNull) {
          throw ValidationError("logical operand must be BOOLEAN, found " + std::string(type_name(t)));
        }
      }
      return ValueType::kBoolean;
    case Expr::Kind::kCoalesce: {
      ValueType a = infer_type(e.args[0], table), b = infer_type(e.args[1], table);
      if (a != ValueType::kNull && b != ValueType::kNull && a != b) {
        throw ValidationError("COALESCE arguments differ in type: " + std::string(type_name(a)) + " vs " +
                              std::string(type_name(b)));
      }
      return a == ValueType::kNull ? b : a;
    }
    case Expr::Kind::kIsNull:
      infer_type(e.args[0], table);
      return ValueType::kBoolean;
    case Expr::Kind::kPaidOnDue:
      for (const auto& a : e.args) {
        if (infer_type(a, table) != ValueType::kDate) throw ValidationError("PAID_ON_DUE arguments must be DATE");
      }
      return ValueType::kBoolean;
    case Expr::Kind::kDifficulty: {
      if (!is_numeric(infer_type(e.args[0], table))) {
        throw ValidationError("DIFFICULTY grade column must be INTEGER or DECIMAL");
      }
      infer_type(e.args[1], table);
      if (!(e.hi > e.lo)) throw ValidationError("DIFFICULTY thresholds need hi > lo");
      return ValueType::kText;
    }
  }
  return ValueType::kNull;
}

void apply_to_schema(DatabaseSchema& schema, const Statement& stmt) {
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DropTable>) {
          require_table(schema, s.table);
          for (const auto& [name, t] : schema.tables) {
            if (name == s.table) continue;
            for (const auto& fk : t.foreign_keys) {
              if (fk.target_table == s.table) {
                throw ValidationError("cannot drop '" + s.table + "': still referenced by " + fk.describe(name));
              }
            }
          }
          schema.tables.erase(s.table);
        } else if constexpr (std::is_same_v<T, Merge>) {
          MergeLayout layout = plan_merge(s, schema);
          for (const auto& c : layout.consumed) schema.tables.erase(c);
          for (auto& [name, t] : schema.tables) {
            std::vector<ForeignKey> kept;
            for (auto fk : t.foreign_keys) {
              if (fk.target_table == layout.base && layout.result != layout.base) fk.target_table = layout.result;
              else if (contains(layout.consumed, fk.target_table)) continue;
              kept.push_back(std::move(fk));
            }
            t.foreign_keys = std::move(kept);
          }
          schema.tables[layout.result] = layout.result_schema;
        } else if constexpr (std::is_same_v<T, AddColumn>) {
          TableSchema* t = &require_table(schema, s.column.table);
          if (!is_identifier(s.column.column)) throw ValidationError("invalid column name '" + s.column.column + "'");
          if (t->has_column(s.column.column)) {
            throw ValidationError("column '" + s.column.to_string() + "' already exists");
          }
          ValueType got = infer_type(s.derivation, *t);
          if (got != ValueType::kNull && got != s.type) {
            throw ValidationError("derivation of " + s.column.to_string() + " has type " +
                                  std::string(type_name(got)) + ", declared " + std::string(type_name(s.type)));
          }
          t->columns.push_back({s.column.column, s.type, true});
        } else if constexpr (std::is_same_v<T, RemoveColumn>) {
          TableSchema* t = &require_table(schema, s.column.table);
          auto idx = t->column_index(s.column.column);
          if (!idx) throw ValidationError("unknown column '" + s.column.to_string() + "'");
          if (t->is_key_column(s.column.column)) {
            throw ValidationError("cannot remove key column '" + s.column.to_string() + "'");
          }
          for (const auto& fk : t->foreign_keys) {
            if (contains(fk.columns, s.column.column)) {
              throw ValidationError("cannot remove foreign key column '" + s.column.to_string() + "'");
            }
          }
          for (const auto& [name, other] : schema.tables) {
            for (const auto& fk : other.foreign_keys) {
              if (fk.target_table == t->name && contains(fk.target_columns, s.column.column)) {
                throw ValidationError("cannot remove '" + s.column.to_string() + "': referenced by " +
                                      fk.describe(name));
              }
            }
          }
          t->columns.erase(t->columns.begin() + static_cast<std::ptrdiff_t>(*idx));
        } else if constexpr (std::is_same_v<T, Clean>) {
          const TableSchema& t = require_table(schema, s.column.table);
          check_rule(rule_from_statement(s), t);
        } else {
          // FACT / DIMENSION: checked against the final schema.
        }
      },
      stmt.body);
}

std::string PlanDiagnostic::to_string() const {
  if (statement == 0) return "plan: " + message;
  return "statement " + std::to_string(statement) + ": " + message;
}

std::string PlanCheck::summary() const {
  std::ostringstream out;
  for (const auto& d : diagnostics) out << d.to_string() << '\n';
  return out.str();
}

PlanCheck validate_plan(const Plan& plan, const DatabaseSchema& schema, ValidateOptions options) {
  PlanCheck check;
  DatabaseSchema shadow = schema;
  const auto& stmts = plan.statements;
  for (std::size_t i = 0; i < stmts.size(); ++i) {
    const std::size_t index = i + 1;
    if (const auto* rm = stmts[i].as<RemoveColumn>()) {
      for (std::size_t j = i + 1; j < stmts.size(); ++j) {
        for (const auto& ref : references(stmts[j])) {
          if (ref.table == rm->column.table && ref.column == rm->column.column) {
            check.diagnostics.push_back(
                {index, "removed column '" + rm->column.to_string() + "' is used by statement " + std::to_string(j + 1)});
          }
        }
      }
    }
    try {
      apply_to_schema(shadow, stmts[i]);
    } catch (const ValidationError& e) {
      std::string msg = e.what();
      if (msg.rfind("unknown table", 0) == 0 && index > 1) msg += " after statement " + std::to_string(index - 1);
      check.diagnostics.push_back({index, msg});
    }
  }

  std::size_t facts = 0, dims = 0;
  std::set<std::string> declared;
  for (std::size_t i = 0; i < stmts.size(); ++i) {
    const std::size_t index = i + 1;
    if (const auto* f = stmts[i].as<Fact>()) {
      ++facts;
      if (!shadow.find(f->table)) {
        check.diagnostics.push_back({index, "fact table '" + f->table + "' does not exist in the final schema"});
      }
      if (!declared.insert(f->table).second) {
        check.diagnostics.push_back({index, "table '" + f->table + "' declared more than once"});
      }
    } else if (const auto* d = stmts[i].as<Dimension>()) {
      ++dims;
      const TableSchema* t = shadow.find(d->table);
      if (!t) {
        check.diagnostics.push_back({index, "dimension table '" + d->table + "' does not exist in the final schema"});
      } else if (!t->has_column(d->key)) {
        check.diagnostics.push_back({index, "dimension key '" + d->table + "." + d->key + "' does not exist"});
      }
      if (!declared.insert(d->table).second) {
        check.diagnostics.push_back({index, "table '" + d->table + "' declared more than once"});
      }
    }
  }
  if (facts > 1) check.diagnostics.push_back({0, "duplicate FACT declaration"});
  if (options.require_warehouse_declarations) {
    if (facts == 0) check.diagnostics.push_back({0, "missing FACT declaration"});
    if (dims != ValidateOptions::kDimensionCount) {
      check.diagnostics.push_back({0, "expected " + std::to_string(ValidateOptions::kDimensionCount) +
                                          " dimensions, found " + std::to_string(dims)});
    }
  }
  check.final_schema = std::move(shadow);
  return check;
}

}  // namespace uwh::plan

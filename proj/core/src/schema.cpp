#include "uwh/schema.hpp"

#include <set>

namespace uwh {

std::string ForeignKey::describe(std::string_view table) const {
  std::string out(table);
  out += "(";
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += ") -> " + target_table + "(";
  for (std::size_t i = 0; i < target_columns.size(); ++i) out += (i ? "," : "") + target_columns[i];
  return out + ")";
}

std::optional<std::size_t> TableSchema::column_index(std::string_view column) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == column) return i;
  }
  return std::nullopt;
}

const ColumnDef* TableSchema::find_column(std::string_view column) const {
  auto idx = column_index(column);
  return idx ? &columns[*idx] : nullptr;
}

bool TableSchema::is_key_column(std::string_view column) const {
  for (const auto& k : primary_key) {
    if (k == column) return true;
  }
  return false;
}

std::vector<std::size_t> TableSchema::key_indices() const { return indices_of(primary_key); }

std::vector<std::size_t> TableSchema::indices_of(const std::vector<std::string>& names) const {
  std::vector<std::size_t> out;
  out.reserve(names.size());
  for (const auto& n : names) {
    if (auto idx = column_index(n)) out.push_back(*idx);
  }
  return out;
}

const TableSchema* DatabaseSchema::find(std::string_view name) const {
  auto it = tables.find(std::string(name));
  return it == tables.end() ? nullptr : &it->second;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
  if (!alpha(s.front())) return false;
  for (char c : s) {
    if (!alpha(c) && !(c >= '0' && c <= '9')) return false;
  }
  return true;
}

std::string Diagnostic::to_string() const {
  std::string out = table;
  if (!column.empty()) out += "." + column;
  return out + ": " + message;
}

std::vector<Diagnostic> validate_table_schema(const TableSchema& table) {
  std::vector<Diagnostic> out;
  if (!is_identifier(table.name)) out.push_back({table.name, "", "invalid table name"});
  if (table.columns.empty()) out.push_back({table.name, "", "table has no columns"});
  std::set<std::string> seen;
  for (const auto& col : table.columns) {
    if (!is_identifier(col.name)) out.push_back({table.name, col.name, "invalid column name"});
    if (!seen.insert(col.name).second) out.push_back({table.name, col.name, "duplicate column"});
    if (col.type == ValueType::kNull) out.push_back({table.name, col.name, "column has no type"});
  }
  if (table.primary_key.empty()) out.push_back({table.name, "", "missing primary key"});
  std::set<std::string> key_seen;
  for (const auto& k : table.primary_key) {
    const ColumnDef* col = table.find_column(k);
    if (!col) {
      out.push_back({table.name, k, "primary key column does not exist"});
    } else if (col->nullable) {
      out.push_back({table.name, k, "primary key column is nullable"});
    }
    if (!key_seen.insert(k).second) out.push_back({table.name, k, "primary key column repeated"});
  }
  for (const auto& fk : table.foreign_keys) {
    if (fk.columns.empty() || fk.columns.size() != fk.target_columns.size()) {
      out.push_back({table.name, "", "foreign key arity mismatch: " + fk.describe(table.name)});
    }
    for (const auto& c : fk.columns) {
      if (!table.has_column(c)) out.push_back({table.name, c, "foreign key column does not exist"});
    }
  }
  return out;
}

std::vector<Diagnostic> validate_schema(const DatabaseSchema& schema) {
  std::vector<Diagnostic> out;
  for (const auto& [name, table] : schema.tables) {
    if (name != table.name) out.push_back({name, "", "table registered under a different name"});
    auto local = validate_table_schema(table);
    out.insert(out.end(), local.begin(), local.end());
    for (const auto& fk : table.foreign_keys) {
      const TableSchema* target = schema.find(fk.target_table);
      if (!target) {
        out.push_back({table.name, fk.columns.empty() ? "" : fk.columns.front(),
                       "foreign key references missing table " + fk.target_table});
        continue;
      }
      for (std::size_t i = 0; i < fk.columns.size() && i < fk.target_columns.size(); ++i) {
        const ColumnDef* local_col = table.find_column(fk.columns[i]);
        const ColumnDef* target_col = target->find_column(fk.target_columns[i]);
        if (!target_col) {
          out.push_back({table.name, fk.columns[i],
                         "foreign key references missing column " + fk.target_table + "." + fk.target_columns[i]});
        } else if (local_col && local_col->type != target_col->type) {
          out.push_back({table.name, fk.columns[i],
                         "foreign key type mismatch with " + fk.target_table + "." + fk.target_columns[i]});
        }
      }
    }
  }
  return out;
}

std::size_t KeyTupleHash::operator()(const KeyTuple& key) const noexcept {
  std::size_t seed = key.size();
  for (const auto& v : key) seed ^= hash_value(v) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
  return seed;
}

KeyTuple project(const Row& row, const std::vector<std::size_t>& indices) {
  KeyTuple key;
  key.reserve(indices.size());
  for (std::size_t i : indices) key.push_back(row[i]);
  return key;
}

std::string format_key(const KeyTuple& key) {
  std::string out;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (i) out += "|";
    out += key[i].is_null() ? std::string("NULL") : *key[i].to_text();
  }
  return out;
}

bool any_null(const KeyTuple& key) {
  for (const auto& v : key) {
    if (v.is_null()) return true;
  }
  return false;
}

std::strong_ordering order_keys(const KeyTuple& a, const KeyTuple& b) {
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    auto c = order_values(a[i], b[i]);
    if (c != 0) return c;
  }
  return a.size() <=> b.size();
}

std::string_view reject_reason_name(RejectReason reason) {
  switch (reason) {
    case RejectReason::kArity: return "arity";
    case RejectReason::kType: return "type";
    case RejectReason::kNull: return "null-in-nonnullable";
  }
  return "?";
}

std::string RowRejection::message() const {
  std::string out(reject_reason_name(reason));
  if (!column.empty()) out += " (" + column + ")";
  return out;
}

bool is_raw_cell(const ColumnDef& column, const Value& cell) {
  return column.type != ValueType::kText && cell.type() == ValueType::kText;
}

std::optional<RowRejection> check_row(const TableSchema& schema, const Row& row, bool allow_raw) {
  if (row.size() != schema.columns.size()) return RowRejection{RejectReason::kArity, ""};
  for (std::size_t i = 0; i < row.size(); ++i) {
    const ColumnDef& col = schema.columns[i];
    const Value& cell = row[i];
    if (cell.is_null()) {
      if (!col.nullable) return RowRejection{RejectReason::kNull, col.name};
      continue;
    }
    if (cell.type() == col.type) continue;
    if (allow_raw && is_raw_cell(col, cell)) continue;
    return RowRejection{RejectReason::kType, col.name};
  }
  return std::nullopt;
}

}  // namespace uwh

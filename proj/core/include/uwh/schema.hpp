#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uwh/value.hpp"

namespace uwh {

struct ColumnDef {
  std::string name;
  ValueType type = ValueType::kText;
  bool nullable = false;

  friend bool operator==(const ColumnDef&, const ColumnDef&) = default;
};

struct ForeignKey {
  std::vector<std::string> columns;
  std::string target_table;
  std::vector<std::string> target_columns;

  std::string describe(std::string_view table) const;
  friend bool operator==(const ForeignKey&, const ForeignKey&) = default;
};

struct TableSchema {
  std::string name;
  std::vector<ColumnDef> columns;
  std::vector<std::string> primary_key;
  std::vector<ForeignKey> foreign_keys;

  std::optional<std::size_t> column_index(std::string_view column) const;
  const ColumnDef* find_column(std::string_view column) const;
  bool has_column(std::string_view column) const { return column_index(column).has_value(); }
  bool is_key_column(std::string_view column) const;
  /// Indices of the primary-key columns, in key order.
  std::vector<std::size_t> key_indices() const;
  std::vector<std::size_t> indices_of(const std::vector<std::string>& names) const;

  friend bool operator==(const TableSchema&, const TableSchema&) = default;
};

/// Name-ordered collection of table schemas.
struct DatabaseSchema {
  std::map<std::string, TableSchema> tables;

  const TableSchema* find(std::string_view name) const;
  friend bool operator==(const DatabaseSchema&, const DatabaseSchema&) = default;
};

bool is_identifier(std::string_view s);

struct Diagnostic {
  std::string table;
  std::string column;  // empty when table-level
  std::string message;

  std::string to_string() const;
};

std::vector<Diagnostic> validate_table_schema(const TableSchema& table);
/// Empty result means the schema is valid.
std::vector<Diagnostic> validate_schema(const DatabaseSchema& schema);

using Row = std::vector<Value>;
using KeyTuple = std::vector<Value>;

struct KeyTupleHash {
  std::size_t operator()(const KeyTuple& key) const noexcept;
};

KeyTuple project(const Row& row, const std::vector<std::size_t>& indices);
std::string format_key(const KeyTuple& key);
bool any_null(const KeyTuple& key);
std::strong_ordering order_keys(const KeyTuple& a, const KeyTuple& b);

struct Table {
  TableSchema schema;
  std::vector<Row> rows;

  std::size_t row_count() const { return rows.size(); }
  friend bool operator==(const Table&, const Table&) = default;
};

enum class RejectReason { kArity, kType, kNull };
std::string_view reject_reason_name(RejectReason reason);

struct RowRejection {
  RejectReason reason;
  std::string column;  // empty for arity
  std::string message() const;
};

/// Cells whose tag is Text in a non-TEXT column are raw cells left by extraction.
bool is_raw_cell(const ColumnDef& column, const Value& cell);

/// nullopt means accept. With `allow_raw`, raw cells are not type rejections.
std::optional<RowRejection> check_row(const TableSchema& schema, const Row& row, bool allow_raw = false);

}  // namespace uwh

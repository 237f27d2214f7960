#pragma once

#include <string>
#include <variant>
#include <vector>

#include "uwh/value.hpp"

namespace uwh::plan {

/// Source position. Positions never participate in AST equality, so a
/// reparsed pretty-print compares equal to the original.
struct SourcePos {
  int line = 0;
  int column = 0;
  friend bool operator==(const SourcePos&, const SourcePos&) { return true; }
};

struct QualifiedColumn {
  std::string table;
  std::string column;
  SourcePos pos;

  std::string to_string() const { return table + "." + column; }
  friend bool operator==(const QualifiedColumn&, const QualifiedColumn&) = default;
};

struct Expr {
  enum class Kind { kLiteral, kColumn, kCompare, kAnd, kOr, kNot, kCoalesce, kIsNull, kPaidOnDue, kDifficulty };

  Kind kind = Kind::kLiteral;
  Value literal;
  QualifiedColumn column;
  CompareOp op = CompareOp::kEq;
  std::vector<Expr> args;
  // DIFFICULTY: args = {grade column, group column}; grade mean >= hi is
  // "low", lo <= mean < hi is "medium", below lo is "high".
  Decimal hi;
  Decimal lo;
  SourcePos pos;

  static Expr make_literal(Value v, SourcePos pos = {});
  static Expr make_column(QualifiedColumn c);
  static Expr make(Kind kind, std::vector<Expr> args, SourcePos pos = {});

  friend bool operator==(const Expr& a, const Expr& b);
};

struct DropTable {
  std::string table;
  friend bool operator==(const DropTable&, const DropTable&) = default;
};

struct JoinCondition {
  QualifiedColumn left;
  QualifiedColumn right;
  friend bool operator==(const JoinCondition&, const JoinCondition&) = default;
};

struct Merge {
  std::vector<std::string> sources;
  std::string target;
  std::vector<JoinCondition> conditions;
  std::vector<QualifiedColumn> keep;
  friend bool operator==(const Merge&, const Merge&) = default;
};

struct AddColumn {
  QualifiedColumn column;
  ValueType type = ValueType::kText;
  Expr derivation;
  friend bool operator==(const AddColumn&, const AddColumn&) = default;
};

struct RemoveColumn {
  QualifiedColumn column;
  friend bool operator==(const RemoveColumn&, const RemoveColumn&) = default;
};

struct Clean {
  QualifiedColumn column;
  std::string rule;
  std::vector<Value> args;
  friend bool operator==(const Clean&, const Clean&) = default;
};

struct Fact {
  std::string table;
  friend bool operator==(const Fact&, const Fact&) = default;
};

struct Dimension {
  std::string table;
  std::string key;
  friend bool operator==(const Dimension&, const Dimension&) = default;
};

using StatementBody = std::variant<DropTable, Merge, AddColumn, RemoveColumn, Clean, Fact, Dimension>;

struct Statement {
  StatementBody body;
  SourcePos pos;

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&body);
  }
  friend bool operator==(const Statement&, const Statement&) = default;
};

struct Plan {
  std::vector<Statement> statements;

  const Fact* fact() const;
  std::vector<const Dimension*> dimensions() const;
  friend bool operator==(const Plan&, const Plan&) = default;
};

/// Canonical single-line source text of a statement, including the `;`.
std::string to_source(const Statement& stmt);
std::string to_source(const Expr& expr);
/// One statement per line.
std::string to_source(const Plan& plan);

}  // namespace uwh::plan

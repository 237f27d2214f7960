#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "uwh/plan/ast.hpp"
#include "uwh/staging.hpp"

namespace uwh {

struct LineageLog {
  std::vector<LineageEntry> entries;

  /// One line per executed statement.
  std::string to_text() const;
};

/// Group statistics for every DIFFICULTY node of an expression, computed once
/// per statement over the whole table.
class AggregateContext {
 public:
  struct GroupStats {
    __int128 sum_units = 0;  // grade sum in Decimal units
    std::int64_t count = 0;  // non-Null grades
  };

  static AggregateContext prepare(const plan::Expr& expr, const Table& table);
  const GroupStats* find(const plan::Expr* node, const Value& group) const;

 private:
  std::map<const plan::Expr*, std::unordered_map<Value, GroupStats>> stats_;
};

/// Total evaluation of a type-checked derivation on one row of `schema`.
/// Comparisons with a Null operand are false; Null is false wherever a
/// Boolean is expected.
Value eval_expr(const plan::Expr& expr, const Row& row, const TableSchema& schema, const AggregateContext& context);

/// Each returns the rows affected and throws ValidationError on failure.
std::int64_t exec_drop(StagingArea& staging, const std::string& table);
std::int64_t exec_merge(StagingArea& staging, const plan::Merge& merge);
std::int64_t exec_add_column(StagingArea& staging, const plan::AddColumn& add);
std::int64_t exec_remove_column(StagingArea& staging, const plan::RemoveColumn& remove);
std::int64_t exec_clean(StagingArea& staging, const plan::Clean& clean);

struct ExecOptions {
  std::string timestamp;
};

/// Validates, then runs statements in order on a working copy. The staging is
/// replaced only if every statement succeeds; the first failure throws
/// ValidationError naming the statement index and leaves `staging` untouched.
LineageLog execute_plan(StagingArea& staging, const plan::Plan& plan, const ExecOptions& options = {});

}  // namespace uwh

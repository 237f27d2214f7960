#pragma once

#include <string>
#include <utility>
#include <vector>

#include "uwh/plan/ast.hpp"
#include "uwh/schema.hpp"

namespace uwh::plan {

/// Resolved shape of a MERGE against a concrete schema.
///
/// The base table is the left side of the join. When INTO names an existing
/// table that is not listed, that table is the base and every listed table is
/// a source; otherwise the first listed table is the base and the result is
/// named by INTO. Sources join in an order where each one connects to the
/// already-attached set through ON conditions.
struct MergeLayout {
  struct JoinKey {
    QualifiedColumn attached;  // column on a table joined earlier (or the base)
    std::string column;        // column on the table being joined
  };
  struct Step {
    std::string table;
    std::vector<JoinKey> keys;
  };

  std::string base;
  std::string result;
  std::vector<std::string> consumed;
  std::vector<Step> steps;
  std::vector<QualifiedColumn> keep;
  TableSchema result_schema;
};

/// Throws ValidationError describing the first problem.
MergeLayout plan_merge(const Merge& merge, const DatabaseSchema& schema);

/// Static type of an ADD derivation evaluated on rows of `table`. kNull for a
/// bare NULL literal. Throws ValidationError.
ValueType infer_type(const Expr& expr, const TableSchema& table);

/// Applies the schema effect of one statement. Throws ValidationError.
/// FACT and DIMENSION have no schema effect.
void apply_to_schema(DatabaseSchema& schema, const Statement& stmt);

struct PlanDiagnostic {
  std::size_t statement = 0;  // 1-based; 0 for plan-level problems
  std::string message;

  std::string to_string() const;
};

struct PlanCheck {
  std::vector<PlanDiagnostic> diagnostics;
  DatabaseSchema final_schema;

  bool ok() const { return diagnostics.empty(); }
  std::string summary() const;
};

struct ValidateOptions {
  /// Demand one FACT and exactly seven DIMENSION statements.
  bool require_warehouse_declarations = true;
  static constexpr std::size_t kDimensionCount = 7;
};

/// Simulates every statement against a shadow copy of `schema`. Pure.
PlanCheck validate_plan(const Plan& plan, const DatabaseSchema& schema, ValidateOptions options = {});

}  // namespace uwh::plan

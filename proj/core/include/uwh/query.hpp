#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "uwh/warehouse.hpp"

namespace uwh {

enum class Aggregate { kCount, kSum, kAvg, kMin, kMax };

struct Measure {
  Aggregate aggregate = Aggregate::kCount;
  std::string column;  // empty for COUNT(*)

  /// `AVG(tr_grade)`, `count(*)`. Throws ValidationError.
  static Measure parse(std::string_view text);
  std::string label() const;
};

struct Filter {
  std::string attribute;
  CompareOp op = CompareOp::kEq;
  std::string literal;  // parsed with the attribute's column type

  /// `tr_year>=2011`, `dim_student.st_gender = F`. Throws ValidationError.
  static Filter parse(std::string_view text);
};

/// Attributes are bare column names (unique across the warehouse) or
/// `relation.column`, where relation may also be the staging table name.
struct QuerySpec {
  std::vector<Measure> measures;
  std::vector<std::string> group_by;
  std::vector<Filter> filters;
};

struct QueryResult {
  std::vector<std::string> columns;
  std::vector<Row> rows;

  std::string to_csv() const;
};

/// Inner-joins the fact with the dimensions the query touches (following the
/// snowflake arms), filters, groups and aggregates. Rows come out ordered by
/// the group key. AVG is exact Decimal, rounded half away from zero; a group
/// with no input for some AVG emits no row, and no joined tuples means no
/// rows at all. Throws ValidationError for unknown attributes or aggregates
/// that do not fit the column type.
QueryResult star_query(const Warehouse& warehouse, const QuerySpec& spec);

}  // namespace uwh

#pragma once

#include <string_view>

#include "uwh/plan/ast.hpp"
#include "uwh/plan/lexer.hpp"

namespace uwh::plan {

/// Parses a complete plan. The first error throws ParseError carrying the
/// offending token's line/column and the set of expected tokens. A second
/// FACT statement is rejected here as well.
Plan parse_plan(std::string_view text);

/// Parses a stand-alone expression (used by tests and the query front end).
Expr parse_expression(std::string_view text);

}  // namespace uwh::plan

#pragma once

#include <string>
#include <string_view>

#include "uwh/schema.hpp"

namespace uwh {

// Schema manifest format:
//
//   -- comment
//   TABLE student
//     st_id INTEGER PK
//     st_email TEXT NULL
//     st_major_id INTEGER FK major(mj_id)
//
// Column-level FK clauses of one table that name the same target table form a
// single composite foreign key, in declaration order.

/// Throws ParseError (with line) on syntax or semantic failure. The returned
/// schema always passes validate_schema.
DatabaseSchema parse_schema_manifest(std::string_view text);

std::string format_schema_manifest(const DatabaseSchema& schema);

}  // namespace uwh

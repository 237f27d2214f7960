#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace uwh::csv {

// Dialect: comma separator, '"' quoting with "" escape, UTF-8, LF or CRLF
// record terminators. An unquoted empty field encodes Null; a quoted empty
// field ("") encodes the empty string.

struct Field {
  std::string text;
  bool quoted = false;

  bool is_null() const { return !quoted && text.empty(); }
  friend bool operator==(const Field&, const Field&) = default;
};

using Record = std::vector<Field>;

struct Document {
  std::vector<Record> records;
  std::vector<int> lines;  // 1-based source line where each record starts
};

/// Throws ParseError on an unterminated quote or stray quote.
Document parse(std::string_view text);

/// Encodes a cell; nullopt is Null.
void append_field(std::string& out, const std::optional<std::string>& cell);
void append_record(std::string& out, const std::vector<std::optional<std::string>>& cells);

}  // namespace uwh::csv

#include "uwh/csv.hpp"

#include "uwh/errors.hpp"

namespace uwh::csv {

Document parse(std::string_view text) {
  Document doc;
  std::size_t i = 0;
  int line = 1;
  const std::size_t n = text.size();
  while (i < n) {
    Record record;
    const int record_line = line;
    for (;;) {
      Field field;
      if (i < n && text[i] == '"') {
        field.quoted = true;
        ++i;
        for (;;) {
          if (i >= n) throw ParseError("unterminated quoted field", record_line, 0);
          char c = text[i];
          if (c == '"') {
            if (i + 1 < n && text[i + 1] == '"') {
              field.text += '"';
              i += 2;
              continue;
            }
            ++i;
            break;
          }
          if (c == '\r' && i + 1 < n && text[i + 1] == '\n') {
            ++i;
            continue;
          }
          if (c == '\n') ++line;
          field.text += c;
          ++i;
        }
        if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          throw ParseError("unexpected character after closing quote", line, 0);
        }
      } else {
        while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          if (text[i] == '"') throw ParseError("quote inside unquoted field", line, 0);
          field.text += text[i++];
        }
      }
      record.push_back(std::move(field));
      if (i < n && text[i] == ',') {
        ++i;
        continue;
      }
      break;
    }
    if (i < n && text[i] == '\r') ++i;
    if (i < n && text[i] == '\n') ++i;
    ++line;
    doc.records.push_back(std::move(record));
    doc.lines.push_back(record_line);
  }
  return doc;
}

void append_field(std::string& out, const std::optional<std::string>& cell) {
  if (!cell) return;
  const std::string& s = *cell;
  bool needs_quotes = s.empty() || s.find_first_of(",\"\r\n\t") != std::string::npos;
  if (!needs_quotes) {
    out += s;
    return;
  }
  out += '"';
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

void append_record(std::string& out, const std::vector<std::optional<std::string>>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    append_field(out, cells[i]);
  }
  out += '\n';
}

}  // namespace uwh::csv

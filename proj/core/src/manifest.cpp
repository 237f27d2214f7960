#include "uwh/manifest.hpp"

#include <map>
#include <sstream>

#include "uwh/errors.hpp"

namespace uwh {

namespace {

std::vector<std::string> words(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    char x = a[i], y = b[i];
    if (x >= 'a' && x <= 'z') x = static_cast<char>(x - 32);
    if (y >= 'a' && y <= 'z') y = static_cast<char>(y - 32);
    if (x != y) return false;
  }
  return true;
}

struct PendingTable {
  TableSchema schema;
  int line = 0;
  std::map<std::string, int> column_lines;
};

}  // namespace

DatabaseSchema parse_schema_manifest(std::string_view text) {
  std::vector<PendingTable> tables;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (auto c = line.find("--"); c != std::string_view::npos) line = line.substr(0, c);
    auto w = words(line);
    if (w.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const bool indented = line.front() == ' ' || line.front() == '\t';
    if (!indented) {
      if (!iequals(w[0], "TABLE") || w.size() != 2) {
        throw ParseError("line " + std::to_string(line_no) + ": expected 'TABLE <name>'", line_no, 1);
      }
      if (!is_identifier(w[1])) {
        throw ParseError("line " + std::to_string(line_no) + ": invalid table name '" + w[1] + "'", line_no, 1);
      }
      PendingTable t;
      t.schema.name = w[1];
      t.line = line_no;
      tables.push_back(std::move(t));
    } else {
      if (tables.empty()) {
        throw ParseError("line " + std::to_string(line_no) + ": column outside of a TABLE block", line_no, 1);
      }
      PendingTable& t = tables.back();
      if (w.size() < 2) {
        throw ParseError("line " + std::to_string(line_no) + ": expected '<column> <TYPE>'", line_no, 1);
      }
      ColumnDef col;
      col.name = w[0];
      if (!is_identifier(col.name)) {
        throw ParseError("line " + std::to_string(line_no) + ": invalid column name '" + col.name + "'", line_no, 1);
      }
      auto type = type_from_name(w[1]);
      if (!type) {
        throw ParseError("line " + std::to_string(line_no) + ": unknown type name '" + w[1] + "'", line_no, 1);
      }
      col.type = *type;
      for (std::size_t i = 2; i < w.size(); ++i) {
        if (iequals(w[i], "PK")) {
          t.schema.primary_key.push_back(col.name);
        } else if (iequals(w[i], "NULL")) {
          col.nullable = true;
        } else if (iequals(w[i], "FK") && i + 1 < w.size()) {
          const std::string& ref = w[++i];
          auto open = ref.find('(');
          if (open == std::string::npos || ref.back() != ')' || open == 0) {
            throw ParseError("line " + std::to_string(line_no) + ": expected FK target(column)", line_no, 1);
          }
          std::string target = ref.substr(0, open);
          std::string target_col = ref.substr(open + 1, ref.size() - open - 2);
          if (!is_identifier(target) || !is_identifier(target_col)) {
            throw ParseError("line " + std::to_string(line_no) + ": malformed FK reference '" + ref + "'", line_no, 1);
          }
          ForeignKey* fk = nullptr;
          for (auto& existing : t.schema.foreign_keys) {
            if (existing.target_table == target) fk = &existing;
          }
          if (!fk) {
            t.schema.foreign_keys.push_back({{}, target, {}});
            fk = &t.schema.foreign_keys.back();
          }
          fk->columns.push_back(col.name);
          fk->target_columns.push_back(target_col);
        } else {
          throw ParseError("line " + std::to_string(line_no) + ": unexpected token '" + w[i] + "'", line_no, 1);
        }
      }
      t.column_lines[col.name] = line_no;
      t.schema.columns.push_back(std::move(col));
    }
    if (end == text.size()) break;
  }

  DatabaseSchema schema;
  std::map<std::string, const PendingTable*> by_name;
  for (const auto& t : tables) {
    if (t.schema.primary_key.empty()) {
      throw ParseError("line " + std::to_string(t.line) + ": table " + t.schema.name + ": missing primary key",
                       t.line, 1);
    }
    if (!schema.tables.emplace(t.schema.name, t.schema).second) {
      throw ParseError("line " + std::to_string(t.line) + ": duplicate table " + t.schema.name, t.line, 1);
    }
    by_name[t.schema.name] = &t;
  }
  auto diagnostics = validate_schema(schema);
  if (!diagnostics.empty()) {
    const Diagnostic& d = diagnostics.front();
    int line = 0;
    if (auto it = by_name.find(d.table); it != by_name.end()) {
      line = it->second->line;
      if (auto c = it->second->column_lines.find(d.column); c != it->second->column_lines.end()) line = c->second;
    }
    throw ParseError("line " + std::to_string(line) + ": " + d.to_string(), line, 1);
  }
  return schema;
}

std::string format_schema_manifest(const DatabaseSchema& schema) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [name, table] : schema.tables) {
    if (!first) out << '\n';
    first = false;
    out << "TABLE " << name << '\n';
    for (const auto& col : table.columns) {
      out << "  " << col.name << ' ' << type_name(col.type);
      if (table.is_key_column(col.name)) out << " PK";
      if (col.nullable) out << " NULL";
      for (const auto& fk : table.foreign_keys) {
        for (std::size_t i = 0; i < fk.columns.size(); ++i) {
          if (fk.columns[i] == col.name) out << " FK " << fk.target_table << '(' << fk.target_columns[i] << ')';
        }
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace uwh

#include "uwh/staging.hpp"

#include <sstream>
#include <unordered_set>

#include "uwh/errors.hpp"

namespace uwh {

namespace {

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

QuarantinedRow make_quarantined(const Row& row, std::string stage, std::string reason) {
  QuarantinedRow q;
  q.cells.reserve(row.size());
  for (const auto& v : row) q.cells.push_back(v.to_text());
  q.stage = std::move(stage);
  q.reason = std::move(reason);
  return q;
}

std::string LineageEntry::to_line() const {
  std::string tbl;
  for (std::size_t i = 0; i < tables.size(); ++i) tbl += (i ? "," : "") + tables[i];
  std::ostringstream out;
  out << timestamp << '\t' << stage << '\t' << statement_index << '\t' << rows_affected << '\t' << tbl << '\t'
      << sanitize(text);
  return out.str();
}

LineageEntry LineageEntry::from_line(const std::string& line) {
  auto parts = split(line, '\t');
  if (parts.size() != 6) throw IoError("malformed lineage line: " + line);
  LineageEntry e;
  e.timestamp = parts[0];
  e.stage = parts[1];
  e.statement_index = std::stoi(parts[2]);
  e.rows_affected = std::stoll(parts[3]);
  if (!parts[4].empty()) e.tables = split(parts[4], ',');
  e.text = parts[5];
  return e;
}

Table* StagingArea::find(std::string_view name) {
  auto it = tables.find(std::string(name));
  return it == tables.end() ? nullptr : &it->second;
}

const Table* StagingArea::find(std::string_view name) const {
  auto it = tables.find(std::string(name));
  return it == tables.end() ? nullptr : &it->second;
}

Table& StagingArea::at(std::string_view name) {
  if (Table* t = find(name)) return *t;
  throw ValidationError("unknown table " + std::string(name));
}

const Table& StagingArea::at(std::string_view name) const {
  if (const Table* t = find(name)) return *t;
  throw ValidationError("unknown table " + std::string(name));
}

DatabaseSchema StagingArea::schema() const {
  DatabaseSchema db;
  for (const auto& [name, table] : tables) db.tables.emplace(name, table.schema);
  return db;
}

void StagingArea::quarantine_row(const Table& table, const Row& row, std::string stage, std::string reason) {
  auto& q = quarantine[table.schema.name];
  if (q.columns.empty()) {
    for (const auto& c : table.schema.columns) q.columns.push_back(c.name);
  }
  q.rows.push_back(make_quarantined(row, std::move(stage), std::move(reason)));
}

std::size_t StagingArea::quarantined_count(std::string_view table) const {
  auto it = quarantine.find(std::string(table));
  return it == quarantine.end() ? 0 : it->second.rows.size();
}

OrphanReport check_referential_integrity(const StagingArea& staging) {
  OrphanReport report;
  for (const auto& [name, table] : staging.tables) {
    for (std::size_t f = 0; f < table.schema.foreign_keys.size(); ++f) {
      const ForeignKey& fk = table.schema.foreign_keys[f];
      auto local = table.schema.indices_of(fk.columns);
      const Table* target = staging.find(fk.target_table);
      std::unordered_set<KeyTuple, KeyTupleHash> keys;
      if (target) {
        auto remote = target->schema.indices_of(fk.target_columns);
        if (remote.size() != fk.target_columns.size()) target = nullptr;
        else
          for (const auto& row : target->rows) keys.insert(project(row, remote));
      }
      OrphanEntry entry{name, f, fk.describe(name), {}, {}};
      auto pk = table.schema.key_indices();
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        KeyTuple key = project(table.rows[r], local);
        if (key.size() != fk.columns.size() || any_null(key)) continue;
        if (target && keys.count(key)) continue;
        entry.row_ordinals.push_back(r);
        entry.row_keys.push_back(project(table.rows[r], pk));
      }
      if (!entry.row_ordinals.empty()) report.push_back(std::move(entry));
    }
  }
  return report;
}

std::size_t orphan_count(const OrphanReport& report) {
  std::size_t n = 0;
  for (const auto& e : report) n += e.row_ordinals.size();
  return n;
}

}  // namespace uwh

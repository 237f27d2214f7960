#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uwh/schema.hpp"

namespace uwh {

/// A row removed from a staged table, kept verbatim for audit.
struct QuarantinedRow {
  std::vector<std::optional<std::string>> cells;
  std::string stage;
  std::string reason;

  friend bool operator==(const QuarantinedRow&, const QuarantinedRow&) = default;
};

struct QuarantineTable {
  std::vector<std::string> columns;
  std::vector<QuarantinedRow> rows;

  friend bool operator==(const QuarantineTable&, const QuarantineTable&) = default;
};

QuarantinedRow make_quarantined(const Row& row, std::string stage, std::string reason);

struct LineageEntry {
  std::string timestamp;
  std::string stage;
  int statement_index = -1;
  std::int64_t rows_affected = 0;
  std::vector<std::string> tables;
  std::string text;

  std::string to_line() const;
  static LineageEntry from_line(const std::string& line);
  friend bool operator==(const LineageEntry&, const LineageEntry&) = default;
};

/// Buffer of staged tables between pipeline stages.
class StagingArea {
 public:
  std::map<std::string, Table> tables;
  std::map<std::string, QuarantineTable> quarantine;

  const std::vector<LineageEntry>& lineage() const { return lineage_; }
  void record(LineageEntry entry) { lineage_.push_back(std::move(entry)); }

  Table* find(std::string_view name);
  const Table* find(std::string_view name) const;
  Table& at(std::string_view name);
  const Table& at(std::string_view name) const;

  DatabaseSchema schema() const;
  void quarantine_row(const Table& table, const Row& row, std::string stage, std::string reason);
  std::size_t quarantined_count(std::string_view table) const;

  friend bool operator==(const StagingArea&, const StagingArea&) = default;

 private:
  std::vector<LineageEntry> lineage_;
};

struct OrphanEntry {
  std::string table;
  std::size_t foreign_key = 0;  // index into the table's foreign_keys
  std::string description;
  std::vector<std::size_t> row_ordinals;
  std::vector<KeyTuple> row_keys;
};

using OrphanReport = std::vector<OrphanEntry>;

/// A row is an orphan iff some FK tuple with all components non-Null has no
/// matching target row. FKs whose target table is absent report every
/// non-Null row. Entries are emitted only for FKs with at least one orphan.
OrphanReport check_referential_integrity(const StagingArea& staging);
std::size_t orphan_count(const OrphanReport& report);

}  // namespace uwh

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uwh/schema.hpp"

namespace uwh {

struct GenConfig {
  std::uint64_t seed = 42;
  std::size_t students = 100;
  std::size_t courses_per_dept = 4;
  std::size_t semesters = 3;
  double dirty_rate = 0.05;

  /// Throws ValidationError.
  void validate() const;
};

namespace dirt {
inline constexpr std::string_view kWhitespace = "whitespace";
inline constexpr std::string_view kCase = "case";
inline constexpr std::string_view kNullToken = "null_token";
inline constexpr std::string_view kDateFormat = "date_format";
inline constexpr std::string_view kOutOfDomain = "out_of_domain";
inline constexpr std::string_view kOutOfRange = "out_of_range";
inline constexpr std::string_view kDuplicateRow = "duplicate_row";
inline constexpr std::string_view kOrphanFk = "orphan_fk";
}  // namespace dirt

struct DirtEntry {
  std::string table;
  std::string row_key;  // primary key cells joined with '|'
  std::string column;   // "*" for a duplicated row
  std::optional<std::string> original;
  std::optional<std::string> corrupted;
  std::string kind;

  friend bool operator==(const DirtEntry&, const DirtEntry&) = default;
};

struct DirtLedger {
  std::vector<DirtEntry> entries;
  std::size_t total_cells = 0;  // cells generated before dirt

  std::string to_csv() const;
  static DirtLedger from_csv(std::string_view text);
};

using CellRow = std::vector<std::optional<std::string>>;

struct Dataset {
  DatabaseSchema schema;
  std::map<std::string, std::vector<CellRow>> tables;  // rows in schema column order
  DirtLedger ledger;

  std::string table_csv(const std::string& table) const;
  /// `<table>.csv` for every table, dirt_ledger.csv and row_counts.csv.
  void write(const std::filesystem::path& dir) const;
};

/// Referentially consistent instance of the canonical schema, then dirt at
/// `dirty_rate` of all generated cells. Every injected anomaly is in the
/// ledger. Identical configs give identical datasets.
Dataset generate(const GenConfig& config);

}  // namespace uwh

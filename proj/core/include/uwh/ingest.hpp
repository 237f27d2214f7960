#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "uwh/staging.hpp"

namespace uwh {

struct ExtractionEntry {
  std::string table;
  std::size_t rows_read = 0;
  std::size_t rows_staged = 0;
  std::size_t rows_rejected = 0;
  std::size_t raw_cells = 0;
  std::map<std::string, std::size_t> reasons;
};

struct ExtractionReport {
  std::vector<ExtractionEntry> tables;

  const ExtractionEntry* find(std::string_view table) const;
  std::string to_json() const;
};

struct ExtractedTable {
  Table table;
  QuarantineTable quarantine;
  ExtractionEntry entry;
};

/// Reads one CSV document against `schema`. The header must name exactly the
/// schema's columns (any order); rows are normalized to schema order. Cells
/// that fail strict parsing stay as raw Text; arity faults and Nulls in
/// non-nullable columns are quarantined.
ExtractedTable extract_table(std::string_view csv_text, const TableSchema& schema);

/// Expects `<src_dir>/<table>.csv` for every table of `schema`.
std::pair<StagingArea, ExtractionReport> extract_database(const std::filesystem::path& src_dir,
                                                          const DatabaseSchema& schema,
                                                          const std::string& timestamp = {});

/// Header plus rows in schema order, using the ingest CSV dialect.
std::string table_to_csv(const Table& table);
std::string quarantine_to_csv(const QuarantineTable& quarantine);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Staging directory: schema.txt, <table>.csv, quarantine/<table>.csv, lineage.log.
void save_staging(const StagingArea& staging, const std::filesystem::path& dir);
StagingArea load_staging(const std::filesystem::path& dir);

}  // namespace uwh

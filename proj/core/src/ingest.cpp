#include "uwh/ingest.hpp"

#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include "json.hpp"
#include "uwh/csv.hpp"
#include "uwh/errors.hpp"
#include "uwh/manifest.hpp"

namespace uwh {

namespace fs = std::filesystem;

const ExtractionEntry* ExtractionReport::find(std::string_view table) const {
  for (const auto& e : tables) {
    if (e.table == table) return &e;
  }
  return nullptr;
}

std::string ExtractionReport::to_json() const {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& e : tables) {
    doc.push_back({{"table", e.table},
                   {"rows_read", e.rows_read},
                   {"rows_staged", e.rows_staged},
                   {"rows_rejected", e.rows_rejected},
                   {"raw_cells", e.raw_cells},
                   {"reasons", e.reasons}});
  }
  return doc.dump(2) + "\n";
}

ExtractedTable extract_table(std::string_view csv_text, const TableSchema& schema) {
  ExtractedTable out;
  out.table.schema = schema;
  out.entry.table = schema.name;
  for (const auto& c : schema.columns) out.quarantine.columns.push_back(c.name);

  csv::Document doc = csv::parse(csv_text);
  if (doc.records.empty()) throw ValidationError(schema.name + ": missing header row");
  const csv::Record& header = doc.records.front();
  std::vector<std::size_t> source_of(schema.columns.size(), SIZE_MAX);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string& name = header[i].text;
    if (!seen.insert(name).second) throw ValidationError(schema.name + ": duplicate header column '" + name + "'");
    auto idx = schema.column_index(name);
    if (!idx) throw ValidationError(schema.name + ": unexpected header column '" + name + "'");
    source_of[*idx] = i;
  }
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    if (source_of[c] == SIZE_MAX) {
      throw ValidationError(schema.name + ": header is missing column '" + schema.columns[c].name + "'");
    }
  }

  for (std::size_t r = 1; r < doc.records.size(); ++r) {
    const csv::Record& rec = doc.records[r];
    ++out.entry.rows_read;
    auto reject = [&](const std::string& reason, std::vector<std::optional<std::string>> cells) {
      ++out.entry.rows_rejected;
      ++out.entry.reasons[reason];
      out.quarantine.rows.push_back({std::move(cells), "extract", reason});
    };
    if (rec.size() != header.size()) {
      std::vector<std::optional<std::string>> cells;
      for (const auto& f : rec) {
        cells.push_back(f.is_null() ? std::nullopt : std::optional<std::string>(f.text));
      }
      cells.resize(schema.columns.size());
      reject("arity", std::move(cells));
      continue;
    }
    Row row(schema.columns.size());
    std::optional<std::string> null_column;
    std::size_t raw = 0;
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
      const csv::Field& f = rec[source_of[c]];
      const ColumnDef& col = schema.columns[c];
      if (f.is_null()) {
        if (!col.nullable && !null_column) null_column = col.name;
        continue;
      }
      if (auto v = Value::parse_as(f.text, col.type)) {
        row[c] = std::move(*v);
      } else {
        row[c] = Value::text(f.text);
        ++raw;
      }
    }
    if (null_column) {
      reject("null-in-nonnullable", make_quarantined(row, "extract", "").cells);
      continue;
    }
    out.entry.raw_cells += raw;
    out.table.rows.push_back(std::move(row));
    ++out.entry.rows_staged;
  }
  return out;
}

std::pair<StagingArea, ExtractionReport> extract_database(const fs::path& src_dir, const DatabaseSchema& schema,
                                                          const std::string& timestamp) {
  for (const auto& [name, table] : schema.tables) {
    if (!fs::is_regular_file(src_dir / (name + ".csv"))) {
      throw IoError("missing source file for table " + name + ": " + (src_dir / (name + ".csv")).string());
    }
  }
  std::vector<std::future<ExtractedTable>> jobs;
  for (const auto& [name, table] : schema.tables) {
    const TableSchema* ts = &table;
    fs::path file = src_dir / (name + ".csv");
    jobs.push_back(std::async(std::launch::async, [ts, file] { return extract_table(read_file(file), *ts); }));
  }
  StagingArea staging;
  ExtractionReport report;
  for (auto& job : jobs) {
    ExtractedTable t = job.get();
    const std::string name = t.table.schema.name;
    staging.record({timestamp, "extract", -1, static_cast<std::int64_t>(t.entry.rows_staged), {name},
                    "extract " + name + ".csv"});
    if (!t.quarantine.rows.empty()) staging.quarantine[name] = std::move(t.quarantine);
    staging.tables[name] = std::move(t.table);
    report.tables.push_back(std::move(t.entry));
  }
  return {std::move(staging), std::move(report)};
}

std::string table_to_csv(const Table& table) {
  std::string out;
  std::vector<std::optional<std::string>> cells;
  for (const auto& c : table.schema.columns) cells.emplace_back(c.name);
  csv::append_record(out, cells);
  for (const auto& row : table.rows) {
    cells.clear();
    for (const auto& v : row) cells.push_back(v.to_text());
    csv::append_record(out, cells);
  }
  return out;
}

std::string quarantine_to_csv(const QuarantineTable& q) {
  std::string out;
  std::vector<std::optional<std::string>> cells(q.columns.begin(), q.columns.end());
  cells.emplace_back("_stage");
  cells.emplace_back("_reason");
  csv::append_record(out, cells);
  for (const auto& row : q.rows) {
    cells = row.cells;
    cells.resize(q.columns.size());
    cells.emplace_back(row.stage);
    cells.emplace_back(row.reason);
    csv::append_record(out, cells);
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on " + path.string());
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failure on " + path.string());
}

void save_staging(const StagingArea& staging, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "quarantine", ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "schema.txt", format_schema_manifest(staging.schema()));
  for (const auto& [name, table] : staging.tables) write_file(dir / (name + ".csv"), table_to_csv(table));
  for (const auto& [name, q] : staging.quarantine) write_file(dir / "quarantine" / (name + ".csv"), quarantine_to_csv(q));
  std::string lineage;
  for (const auto& e : staging.lineage()) lineage += e.to_line() + "\n";
  write_file(dir / "lineage.log", lineage);
}

StagingArea load_staging(const fs::path& dir) {
  if (!fs::is_regular_file(dir / "schema.txt")) throw IoError("not a staging directory (no schema.txt): " + dir.string());
  DatabaseSchema schema = parse_schema_manifest(read_file(dir / "schema.txt"));
  StagingArea staging;
  for (const auto& [name, ts] : schema.tables) {
    ExtractedTable t = extract_table(read_file(dir / (name + ".csv")), ts);
    if (t.entry.rows_rejected != 0) throw IoError("staged table " + name + " contains rejected rows");
    staging.tables[name] = std::move(t.table);
  }
  if (fs::is_directory(dir / "quarantine")) {
    for (const auto& entry : fs::directory_iterator(dir / "quarantine")) {
      if (entry.path().extension() != ".csv") continue;
      csv::Document doc = csv::parse(read_file(entry.path()));
      if (doc.records.empty()) continue;
      QuarantineTable q;
      const auto& header = doc.records.front();
      if (header.size() < 2) throw IoError("malformed quarantine file " + entry.path().string());
      for (std::size_t i = 0; i + 2 < header.size(); ++i) q.columns.push_back(header[i].text);
      for (std::size_t r = 1; r < doc.records.size(); ++r) {
        const auto& rec = doc.records[r];
        if (rec.size() != header.size()) throw IoError("malformed quarantine row in " + entry.path().string());
        QuarantinedRow row;
        for (std::size_t i = 0; i + 2 < rec.size(); ++i) {
          row.cells.push_back(rec[i].is_null() ? std::nullopt : std::optional<std::string>(rec[i].text));
        }
        row.stage = rec[rec.size() - 2].text;
        row.reason = rec.back().text;
        q.rows.push_back(std::move(row));
      }
      staging.quarantine[entry.path().stem().string()] = std::move(q);
    }
  }
  if (fs::is_regular_file(dir / "lineage.log")) {
    std::istringstream in(read_file(dir / "lineage.log"));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) staging.record(LineageEntry::from_line(line));
    }
  }
  return staging;
}

}  // namespace uwh

#include "uwh/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "uwh/checksum.hpp"
#include "uwh/cleanse.hpp"
#include "uwh/datagen.hpp"
#include "uwh/errors.hpp"
#include "uwh/ingest.hpp"
#include "uwh/manifest.hpp"
#include "uwh/plan/parser.hpp"
#include "uwh/query.hpp"
#include "uwh/transform.hpp"
#include "uwh/warehouse.hpp"

namespace uwh::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kUsageExit = static_cast<int>(ErrorKind::kValidation);

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Every command that writes somewhere refuses a frozen warehouse first.
void guard_writable(const fs::path& dir) {
  if (is_warehouse(dir)) {
    throw ReadOnlyError(dir.string() + " is a frozen warehouse (catalog.json, frozen=true); it cannot be modified");
  }
}

std::string source_hash(const fs::path& src, const DatabaseSchema& schema) {
  std::string acc;
  for (const auto& [name, table] : schema.tables) {
    acc += name + ".csv " + sha256_hex(read_file(src / (name + ".csv"))) + "\n";
  }
  return sha256_hex(acc);
}

std::string staging_hash(const StagingArea& staging) {
  std::string acc;
  for (const auto& [name, table] : staging.tables) acc += name + ".csv " + sha256_hex(table_to_csv(table)) + "\n";
  return sha256_hex(acc);
}

FkPolicy make_policy(const std::vector<std::string>& nullify) {
  FkPolicy policy;
  for (const auto& c : nullify) policy.overrides[c] = FkAction::kNullify;
  return policy;
}

void load_warehouse(const StagingArea& staging, const plan::Plan& plan, const fs::path& out, const BuildInfo& info,
                    std::ostream& o) {
  SnowflakeSchema schema = assemble_snowflake(staging, plan);
  WarehouseCatalog catalog = load(out, schema, materialize_relations(schema, staging), info);
  o << "loaded " << catalog.relations.size() << " relations and " << catalog.indexes.size() << " indexes into "
    << out.string() << "\n";
}

json staging_summary(const StagingArea& staging) {
  json doc;
  doc["kind"] = "staging";
  json tables = json::array();
  for (const auto& [name, t] : staging.tables) {
    tables.push_back({{"name", name},
                      {"columns", t.schema.columns.size()},
                      {"rows", t.rows.size()},
                      {"quarantined", staging.quarantined_count(name)}});
  }
  doc["tables"] = std::move(tables);
  std::map<std::string, std::size_t> reasons;
  for (const auto& [name, q] : staging.quarantine) {
    for (const auto& r : q.rows) {
      std::string reason = r.reason.substr(0, r.reason.find(' '));
      ++reasons[r.stage + ":" + reason];
    }
  }
  doc["quarantine_reasons"] = reasons;
  doc["orphans"] = orphan_count(check_referential_integrity(staging));
  doc["lineage_entries"] = staging.lineage().size();
  return doc;
}

json warehouse_summary(const Warehouse& w) {
  const auto& c = w.catalog();
  json doc;
  doc["kind"] = "warehouse";
  doc["frozen"] = c.frozen;
  doc["fact"] = c.snowflake.fact;
  json rels = json::array();
  for (const auto& r : c.relations) rels.push_back({{"name", r.name}, {"rows", r.row_count}});
  doc["relations"] = std::move(rels);
  json dims = json::array();
  for (const auto& d : c.snowflake.dimensions) dims.push_back({{"name", d.relation}, {"key", d.key}, {"parent", d.parent}});
  doc["dimensions"] = std::move(dims);
  doc["indexes"] = c.indexes.size();
  doc["build"] = {{"plan_hash", c.build.plan_hash}, {"source_hash", c.build.source_hash}, {"timestamp", c.build.timestamp}};
  doc["notices"] = w.notices();
  return doc;
}

std::string summary_text(const json& doc) {
  std::ostringstream o;
  if (doc["kind"] == "staging") {
    o << "staging: " << doc["tables"].size() << " tables\n";
    for (const auto& t : doc["tables"]) {
      o << "  " << t["name"].get<std::string>() << ": " << t["rows"] << " rows, " << t["columns"] << " columns, "
        << t["quarantined"] << " quarantined\n";
    }
    for (const auto& [reason, n] : doc["quarantine_reasons"].items()) o << "quarantine " << reason << ": " << n << "\n";
    o << "orphans: " << doc["orphans"] << "\n";
    o << "lineage entries: " << doc["lineage_entries"] << "\n";
  } else {
    o << "warehouse: " << doc["relations"].size() << " relations (frozen)\n";
    o << "fact: " << doc["fact"].get<std::string>() << "\n";
    for (const auto& r : doc["relations"]) o << "  " << r["name"].get<std::string>() << ": " << r["rows"] << " rows\n";
    for (const auto& d : doc["dimensions"]) {
      o << "dimension " << d["name"].get<std::string>() << " key " << d["key"].get<std::string>() << " -> "
        << d["parent"].get<std::string>() << "\n";
    }
    o << "indexes: " << doc["indexes"] << "\n";
    o << "built " << doc["build"]["timestamp"].get<std::string>() << "\n";
    for (const auto& n : doc["notices"]) o << "notice: " << n.get<std::string>() << "\n";
  }
  return o.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"uwh: build and query a read-only university data warehouse"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "uwh 0.1.0");

  std::string schema_file, src_dir, staging_dir, plan_file, rules_file, out_dir, warehouse_dir, timestamp;
  std::vector<std::string> nullify, measures, group_by, filters;
  bool as_json = false;
  GenConfig gen;

  auto* c_gen = app.add_subcommand("gen", "Generate a synthetic operational database with injected dirt");
  c_gen->add_option("--out", out_dir, "Output directory")->required();
  c_gen->add_option("--seed", gen.seed, "PRNG seed")->capture_default_str();
  c_gen->add_option("--students", gen.students, "Number of students")->capture_default_str();
  c_gen->add_option("--courses-per-dept", gen.courses_per_dept, "Courses per department")->capture_default_str();
  c_gen->add_option("--semesters", gen.semesters, "Number of semesters")->capture_default_str();
  c_gen->add_option("--dirty-rate", gen.dirty_rate, "Fraction of cells to corrupt")->capture_default_str();

  auto* c_extract = app.add_subcommand("extract", "Extract source CSVs into a staging directory");
  c_extract->add_option("--schema", schema_file, "Schema manifest")->required();
  c_extract->add_option("--src", src_dir, "Directory of <table>.csv files")->required();
  c_extract->add_option("--staging", staging_dir, "Staging directory to write")->required();

  auto* c_cleanse = app.add_subcommand("cleanse", "Apply cleansing rules and reconcile foreign keys in place");
  c_cleanse->add_option("--staging", staging_dir, "Staging directory")->required();
  c_cleanse->add_option("--rules", rules_file, "Rules file")->required();
  c_cleanse->add_option("--nullify", nullify, "table.column whose orphans are set to Null instead of quarantined");
  c_cleanse->add_flag("--json", as_json, "Print the report as JSON");

  auto* c_transform = app.add_subcommand("transform", "Execute a transformation plan on a staging directory");
  c_transform->add_option("--staging", staging_dir, "Staging directory")->required();
  c_transform->add_option("--plan", plan_file, "Plan file")->required();

  auto* c_load = app.add_subcommand("load", "Load a transformed staging directory into a new warehouse");
  c_load->add_option("--staging", staging_dir, "Staging directory")->required();
  c_load->add_option("--plan", plan_file, "Plan file with FACT and DIMENSION declarations")->required();
  c_load->add_option("--out", out_dir, "Warehouse directory (absent or empty)")->required();

  auto* c_build = app.add_subcommand("build", "Extract, cleanse, transform and load in one step");
  c_build->add_option("--schema", schema_file, "Schema manifest")->required();
  c_build->add_option("--src", src_dir, "Directory of <table>.csv files")->required();
  c_build->add_option("--plan", plan_file, "Plan file")->required();
  c_build->add_option("--rules", rules_file, "Rules file")->required();
  c_build->add_option("--out", out_dir, "Warehouse directory (absent or empty)")->required();
  c_build->add_option("--nullify", nullify, "table.column whose orphans are set to Null instead of quarantined");

  auto* c_query = app.add_subcommand("query", "Run a star-join aggregate query; prints CSV");
  c_query->add_option("--warehouse", warehouse_dir, "Warehouse directory")->required();
  c_query->add_option("--measure", measures, "Aggregate such as AVG(tr_grade) or COUNT(*)")->required();
  c_query->add_option("--group-by", group_by, "Grouping attribute");
  c_query->add_option("--filter", filters, "Predicate such as tr_year>=2011");

  auto* c_report = app.add_subcommand("report", "Summarize a staging directory or a warehouse");
  auto* report_staging = c_report->add_option("--staging", staging_dir, "Staging directory");
  auto* report_wh = c_report->add_option("--warehouse", warehouse_dir, "Warehouse directory");
  report_staging->excludes(report_wh);
  c_report->add_flag("--json", as_json, "Print JSON");

  for (auto* c : {c_extract, c_cleanse, c_transform, c_load, c_build}) {
    c->add_option("--timestamp", timestamp, "Timestamp recorded in lineage and catalog (default: now, UTC)");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? 0 : kUsageExit;
  }
  if (timestamp.empty()) timestamp = now_utc();

  try {
    if (c_gen->parsed()) {
      guard_writable(out_dir);
      Dataset data = generate(gen);
      data.write(out_dir);
      out << "generated " << data.tables.size() << " tables with " << data.ledger.entries.size()
          << " injected anomalies into " << out_dir << "\n";
    } else if (c_extract->parsed()) {
      guard_writable(staging_dir);
      DatabaseSchema schema = parse_schema_manifest(read_file(schema_file));
      auto [staging, report] = extract_database(src_dir, schema, timestamp);
      save_staging(staging, staging_dir);
      for (const auto& e : report.tables) {
        out << e.table << ": read " << e.rows_read << ", staged " << e.rows_staged << ", rejected " << e.rows_rejected
            << ", raw cells " << e.raw_cells << "\n";
      }
    } else if (c_cleanse->parsed()) {
      guard_writable(staging_dir);
      StagingArea staging = load_staging(staging_dir);
      CleanseReport report = cleanse_staging(staging, parse_rules(read_file(rules_file)), make_policy(nullify), timestamp);
      save_staging(staging, staging_dir);
      out << (as_json ? report.to_json() : report.to_text());
    } else if (c_transform->parsed()) {
      guard_writable(staging_dir);
      StagingArea staging = load_staging(staging_dir);
      LineageLog log = execute_plan(staging, plan::parse_plan(read_file(plan_file)), {timestamp});
      save_staging(staging, staging_dir);
      out << log.to_text();
    } else if (c_load->parsed()) {
      guard_writable(out_dir);
      StagingArea staging = load_staging(staging_dir);
      const std::string plan_text = read_file(plan_file);
      load_warehouse(staging, plan::parse_plan(plan_text), out_dir,
                     {sha256_hex(plan_text), staging_hash(staging), timestamp}, out);
    } else if (c_build->parsed()) {
      guard_writable(out_dir);
      DatabaseSchema schema = parse_schema_manifest(read_file(schema_file));
      const std::string plan_text = read_file(plan_file);
      plan::Plan plan = plan::parse_plan(plan_text);
      std::vector<CleanseRule> rules = parse_rules(read_file(rules_file));
      auto [staging, extraction] = extract_database(src_dir, schema, timestamp);
      CleanseReport cleansed = cleanse_staging(staging, rules, make_policy(nullify), timestamp);
      execute_plan(staging, plan, {timestamp});
      out << "extracted " << extraction.tables.size() << " tables; cleansed " << cleansed.anomalous_cells()
          << " anomalous cells, quarantined " << cleansed.rows_quarantined() << " rows\n";
      load_warehouse(staging, plan, out_dir, {sha256_hex(plan_text), source_hash(src_dir, schema), timestamp}, out);
    } else if (c_query->parsed()) {
      Warehouse w = Warehouse::open(warehouse_dir);
      for (const auto& n : w.notices()) err << "notice: " << n << "\n";
      QuerySpec spec;
      for (const auto& m : measures) spec.measures.push_back(Measure::parse(m));
      spec.group_by = group_by;
      for (const auto& f : filters) spec.filters.push_back(Filter::parse(f));
      out << star_query(w, spec).to_csv();
    } else if (c_report->parsed()) {
      json doc;
      if (!warehouse_dir.empty()) {
        doc = warehouse_summary(Warehouse::open(warehouse_dir));
      } else if (!staging_dir.empty()) {
        doc = staging_summary(load_staging(staging_dir));
      } else {
        throw ValidationError("report needs --staging or --warehouse");
      }
      out << (as_json ? doc.dump(2) + "\n" : summary_text(doc));
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kIo);
  }
  return 0;
}

}  // namespace uwh::cli

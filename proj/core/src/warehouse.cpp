#include "uwh/warehouse.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <set>
#include <unordered_set>

#include "json.hpp"
#include "uwh/checksum.hpp"
#include "uwh/errors.hpp"
#include "uwh/ingest.hpp"
#include "uwh/manifest.hpp"

namespace uwh {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kCatalogFile = "catalog.json";
constexpr std::string_view kChecksumField = "\"catalog_checksum\": \"";
const std::string kZeroChecksum(64, '0');

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct Edge {
  std::string holder;  // table carrying the foreign key
  ForeignKey fk;
  bool used = false;
};

// Rows of `from` whose `from_cols` tuple (all non-Null) has no match in
// `to_cols` of `to`. Returns the first dangling key, if any.
std::optional<KeyTuple> first_dangling(const Table& from, const std::vector<std::string>& from_cols, const Table& to,
                                       const std::vector<std::string>& to_cols) {
  std::unordered_set<KeyTuple, KeyTupleHash> targets;
  auto to_at = to.schema.indices_of(to_cols);
  for (const auto& row : to.rows) targets.insert(project(row, to_at));
  auto from_at = from.schema.indices_of(from_cols);
  for (const auto& row : from.rows) {
    KeyTuple k = project(row, from_at);
    if (!any_null(k) && !targets.count(k)) return k;
  }
  return std::nullopt;
}

std::string relation_name(const SnowflakeSchema& s, const std::string& table) {
  if (table == s.fact_table) return s.fact;
  for (const auto& d : s.dimensions) {
    if (d.table == table) return d.relation;
  }
  return {};
}

std::string catalog_digest(std::string text) {
  auto at = text.find(kChecksumField);
  if (at == std::string::npos || text.find(kChecksumField, at + 1) != std::string::npos) {
    throw IntegrityError("catalog.json: self-checksum field missing or repeated");
  }
  at += kChecksumField.size();
  if (text.size() < at + 64) throw IntegrityError("catalog.json: truncated self-checksum");
  text.replace(at, 64, kZeroChecksum);
  return sha256_hex(text);
}

json spec_json(const IndexSpec& s) {
  return {{"relation", s.relation},
          {"columns", s.columns},
          {"kind", std::string(index_kind_name(s.kind))},
          {"unique", s.unique}};
}

}  // namespace

const DimensionLink* SnowflakeSchema::find_dimension(std::string_view relation) const {
  for (const auto& d : dimensions) {
    if (d.relation == relation) return &d;
  }
  return nullptr;
}

SnowflakeSchema assemble_snowflake(const StagingArea& staging, const plan::Fact& fact,
                                   const std::vector<plan::Dimension>& dims) {
  if (dims.size() != SnowflakeSchema::kDimensionCount) {
    throw ValidationError("expected " + std::to_string(SnowflakeSchema::kDimensionCount) + " dimensions, found " +
                          std::to_string(dims.size()));
  }
  const Table* fact_table = staging.find(fact.table);
  if (!fact_table) throw ValidationError("unknown fact table '" + fact.table + "'");

  SnowflakeSchema out;
  out.fact_table = fact.table;
  out.fact = fact.table + "_fact";
  std::vector<std::string> members{fact.table};
  std::map<std::string, const plan::Dimension*> declared;
  for (const auto& d : dims) {
    const Table* t = staging.find(d.table);
    if (!t) throw ValidationError("unknown dimension table '" + d.table + "'");
    if (d.table == fact.table) throw ValidationError("table '" + d.table + "' declared as both fact and dimension");
    if (!declared.emplace(d.table, &d).second) throw ValidationError("dimension '" + d.table + "' declared twice");
    auto key = t->schema.column_index(d.key);
    if (!key) throw ValidationError("unknown dimension key " + d.table + "." + d.key);
    std::unordered_set<Value> seen;
    for (const auto& row : t->rows) {
      const Value& v = row[*key];
      if (v.is_null()) throw ValidationError("null key in dimension " + d.table + "." + d.key);
      if (!seen.insert(v).second) {
        throw ValidationError("duplicate key " + v.debug_string() + " in dimension " + d.table + "." + d.key);
      }
    }
    members.push_back(d.table);
  }

  std::vector<Edge> edges;
  for (const auto& m : members) {
    for (const auto& fk : staging.at(m).schema.foreign_keys) {
      if (std::find(members.begin(), members.end(), fk.target_table) != members.end()) edges.push_back({m, fk});
    }
  }
  std::set<std::string> attached{fact.table};
  std::deque<std::string> frontier{fact.table};
  while (!frontier.empty()) {
    std::string node = frontier.front();
    frontier.pop_front();
    for (auto& e : edges) {
      if (e.used || (e.holder != node && e.fk.target_table != node)) continue;
      e.used = true;
      const bool holder_is_node = e.holder == node;
      const std::string other = holder_is_node ? e.fk.target_table : e.holder;
      if (attached.count(other)) {
        throw ValidationError("dimension links form a cycle through " + e.fk.describe(e.holder));
      }
      const plan::Dimension* d = declared.at(other);
      DimensionLink link;
      link.table = other;
      link.relation = "dim_" + other;
      link.key = d->key;
      link.parent = node;  // renamed below
      link.columns = holder_is_node ? e.fk.target_columns : e.fk.columns;
      link.parent_columns = holder_is_node ? e.fk.columns : e.fk.target_columns;
      out.dimensions.push_back(std::move(link));
      attached.insert(other);
      frontier.push_back(other);
    }
  }
  for (const auto& d : dims) {
    if (!attached.count(d.table)) throw ValidationError("dimension '" + d.table + "' is not linked to the fact");
  }
  for (auto& d : out.dimensions) d.parent = relation_name(out, d.parent);

  // Every foreign key among warehouse tables must resolve.
  for (const auto& e : edges) {
    const Table& from = staging.at(e.holder);
    const Table& to = staging.at(e.fk.target_table);
    if (auto k = first_dangling(from, e.fk.columns, to, e.fk.target_columns)) {
      const std::string what = e.holder == fact.table ? "unresolvable fact key (" : "unresolvable dimension link (";
      throw ValidationError(what + format_key(*k) + ") in " + e.fk.describe(e.holder));
    }
  }

  std::set<std::string> fk_columns;
  for (const auto& fk : fact_table->schema.foreign_keys) fk_columns.insert(fk.columns.begin(), fk.columns.end());
  for (const auto& d : out.dimensions) {
    if (d.parent != out.fact) continue;
    for (const auto& c : d.parent_columns) {
      if (std::find(out.dimension_keys.begin(), out.dimension_keys.end(), c) == out.dimension_keys.end()) {
        out.dimension_keys.push_back(c);
      }
    }
  }
  for (const auto& c : fact_table->schema.columns) {
    const bool numeric = c.type == ValueType::kInteger || c.type == ValueType::kDecimal;
    if (numeric && !fact_table->schema.is_key_column(c.name) && !fk_columns.count(c.name)) out.measures.push_back(c.name);
  }
  for (std::string_view suffix : {"year", "semester"}) {
    for (const auto& c : fact_table->schema.columns) {
      if (ends_with(lower(c.name), suffix)) out.time_columns.push_back(c.name);
    }
  }
  return out;
}

SnowflakeSchema assemble_snowflake(const StagingArea& staging, const plan::Plan& plan) {
  const plan::Fact* fact = plan.fact();
  if (!fact) throw ValidationError("plan declares no FACT table");
  std::vector<plan::Dimension> dims;
  for (const auto* d : plan.dimensions()) dims.push_back(*d);
  return assemble_snowflake(staging, *fact, dims);
}

std::vector<Table> materialize_relations(const SnowflakeSchema& schema, const StagingArea& staging) {
  std::vector<std::string> tables{schema.fact_table};
  for (const auto& d : schema.dimensions) tables.push_back(d.table);
  std::vector<Table> out;
  for (const auto& t : tables) {
    Table rel = staging.at(t);
    rel.schema.name = relation_name(schema, t);
    std::vector<ForeignKey> kept;
    for (auto fk : rel.schema.foreign_keys) {
      std::string target = relation_name(schema, fk.target_table);
      if (target.empty()) continue;
      fk.target_table = std::move(target);
      kept.push_back(std::move(fk));
    }
    rel.schema.foreign_keys = std::move(kept);
    for (const auto& row : rel.rows) {
      if (auto bad = check_row(rel.schema, row)) {
        throw IntegrityError("relation " + rel.schema.name + " holds an invalid row: " + bad->message());
      }
    }
    out.push_back(std::move(rel));
  }
  return out;
}

std::vector<IndexSpec> plan_indexes(const SnowflakeSchema& schema) {
  std::vector<IndexSpec> out;
  auto add = [&](IndexSpec spec) {
    for (const auto& s : out) {
      if (s.relation == spec.relation && s.columns == spec.columns) return;
    }
    out.push_back(std::move(spec));
  };
  for (const auto& d : schema.dimensions) add({d.relation, {d.key}, IndexKind::kHash, true});
  for (const auto& c : schema.dimension_keys) add({schema.fact, {c}, IndexKind::kHash, false});
  for (const auto& d : schema.dimensions) {
    add({d.relation, d.columns, IndexKind::kHash, false});
    add({d.parent, d.parent_columns, IndexKind::kHash, false});
  }
  if (!schema.time_columns.empty()) add({schema.fact, schema.time_columns, IndexKind::kOrdered, false});
  return out;
}

std::string WarehouseCatalog::to_json() const {
  json doc;
  doc["format_version"] = format_version;
  doc["frozen"] = frozen;
  doc["fact"] = snowflake.fact;
  doc["fact_table"] = snowflake.fact_table;
  doc["measures"] = snowflake.measures;
  doc["dimension_keys"] = snowflake.dimension_keys;
  doc["time_columns"] = snowflake.time_columns;
  json dims = json::array();
  for (const auto& d : snowflake.dimensions) {
    dims.push_back({{"name", d.relation},
                    {"table", d.table},
                    {"key", d.key},
                    {"parent", d.parent},
                    {"columns", d.columns},
                    {"parent_columns", d.parent_columns}});
  }
  doc["dimensions"] = std::move(dims);
  json rels = json::array();
  for (const auto& r : relations) {
    rels.push_back({{"name", r.name}, {"file", r.file}, {"checksum", r.checksum}, {"row_count", r.row_count}});
  }
  doc["relations"] = std::move(rels);
  json idx = json::array();
  for (const auto& i : indexes) {
    json e = spec_json(i.spec);
    e["file"] = i.file;
    e["checksum"] = i.checksum;
    idx.push_back(std::move(e));
  }
  doc["indexes"] = std::move(idx);
  doc["build"] = {{"plan_hash", build.plan_hash}, {"source_hash", build.source_hash}, {"timestamp", build.timestamp}};
  doc["schema"] = format_schema_manifest(schema);
  doc["catalog_checksum"] = kZeroChecksum;
  std::string text = doc.dump(2) + "\n";
  const std::string digest = catalog_digest(text);
  text.replace(text.find(kChecksumField) + kChecksumField.size(), 64, digest);
  return text;
}

WarehouseCatalog WarehouseCatalog::from_json(std::string_view text) {
  const std::string body(text);
  const std::string digest = catalog_digest(body);
  const std::string stored = body.substr(body.find(kChecksumField) + kChecksumField.size(), 64);
  if (digest != stored) throw IntegrityError("checksum mismatch for catalog.json");

  WarehouseCatalog c;
  try {
    json doc = json::parse(body);
    c.format_version = doc.at("format_version").get<int>();
    c.frozen = doc.at("frozen").get<bool>();
    if (c.format_version != kFormatVersion) {
      throw IntegrityError("unsupported catalog format_version " + std::to_string(c.format_version));
    }
    if (!c.frozen) throw IntegrityError("catalog is not frozen");
    auto& s = c.snowflake;
    s.fact = doc.at("fact").get<std::string>();
    s.fact_table = doc.at("fact_table").get<std::string>();
    s.measures = doc.at("measures").get<std::vector<std::string>>();
    s.dimension_keys = doc.at("dimension_keys").get<std::vector<std::string>>();
    s.time_columns = doc.at("time_columns").get<std::vector<std::string>>();
    for (const auto& d : doc.at("dimensions")) {
      s.dimensions.push_back({d.at("table").get<std::string>(), d.at("name").get<std::string>(),
                              d.at("key").get<std::string>(), d.at("parent").get<std::string>(),
                              d.at("columns").get<std::vector<std::string>>(),
                              d.at("parent_columns").get<std::vector<std::string>>()});
    }
    for (const auto& r : doc.at("relations")) {
      c.relations.push_back({r.at("name").get<std::string>(), r.at("file").get<std::string>(),
                             r.at("checksum").get<std::string>(), r.at("row_count").get<std::size_t>()});
    }
    for (const auto& i : doc.at("indexes")) {
      auto kind = index_kind_from_name(i.at("kind").get<std::string>());
      if (!kind) throw IntegrityError("unknown index kind in catalog");
      c.indexes.push_back({{i.at("relation").get<std::string>(), i.at("columns").get<std::vector<std::string>>(), *kind,
                            i.at("unique").get<bool>()},
                           i.at("file").get<std::string>(),
                           i.at("checksum").get<std::string>()});
    }
    const auto& b = doc.at("build");
    c.build = {b.at("plan_hash").get<std::string>(), b.at("source_hash").get<std::string>(),
               b.at("timestamp").get<std::string>()};
    c.schema = parse_schema_manifest(doc.at("schema").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("malformed catalog.json: ") + e.what());
  } catch (const ParseError& e) {
    throw IntegrityError(std::string("malformed schema in catalog.json: ") + e.what());
  }
  return c;
}

bool is_warehouse(const fs::path& dir) { return fs::is_regular_file(dir / kCatalogFile); }

WarehouseCatalog load(const fs::path& out_dir, const SnowflakeSchema& schema, const std::vector<Table>& relations,
                      const BuildInfo& build) {
  if (is_warehouse(out_dir)) {
    throw ReadOnlyError(out_dir.string() + " holds a frozen warehouse catalog; warehouses are never overwritten");
  }
  if (fs::exists(out_dir) && !(fs::is_directory(out_dir) && fs::is_empty(out_dir))) {
    throw IoError("refusing to load into non-empty path " + out_dir.string());
  }
  fs::path target = out_dir;
  if (target.filename().empty()) target = target.parent_path();
  const fs::path tmp = target.parent_path() / ("." + target.filename().string() + ".partial");
  std::error_code ec;
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp, ec);
  if (ec) throw IoError("cannot create " + tmp.string() + ": " + ec.message());

  WarehouseCatalog catalog;
  catalog.snowflake = schema;
  catalog.build = build;
  try {
    std::map<std::string, const Table*> by_name;
    for (const auto& rel : relations) {
      catalog.schema.tables[rel.schema.name] = rel.schema;
      by_name[rel.schema.name] = &rel;
      const std::string file = rel.schema.name + ".csv";
      const std::string content = table_to_csv(rel);
      write_file(tmp / file, content);
      catalog.relations.push_back({rel.schema.name, file, sha256_hex(content), rel.rows.size()});
    }
    if (auto problems = validate_schema(catalog.schema); !problems.empty()) {
      throw ValidationError("warehouse schema invalid: " + problems.front().to_string());
    }
    for (const auto& spec : plan_indexes(schema)) {
      auto it = by_name.find(spec.relation);
      if (it == by_name.end()) throw ValidationError("index names unknown relation " + spec.relation);
      Index idx = Index::build(*it->second, spec.columns, spec.kind, spec.unique);
      const std::string content = idx.to_sidecar();
      write_file(tmp / idx.file_name(), content);
      catalog.indexes.push_back({spec, idx.file_name(), sha256_hex(content)});
    }
    write_file(tmp / kCatalogFile, catalog.to_json());
    if (fs::exists(target)) fs::remove(target);
    fs::rename(tmp, target);
  } catch (...) {
    fs::remove_all(tmp, ec);
    throw;
  }
  return catalog;
}

Warehouse Warehouse::open(const fs::path& dir) {
  if (!is_warehouse(dir)) throw IoError("not a warehouse (no catalog.json): " + dir.string());
  Warehouse w;
  w.catalog_ = WarehouseCatalog::from_json(read_file(dir / kCatalogFile));
  for (const auto& r : w.catalog_.relations) {
    const fs::path file = dir / r.file;
    if (!fs::is_regular_file(file)) throw IntegrityError("missing relation file " + r.file);
    const std::string content = read_file(file);
    if (sha256_hex(content) != r.checksum) throw IntegrityError("checksum mismatch for " + r.file);
    const TableSchema* schema = w.catalog_.schema.find(r.name);
    if (!schema) throw IntegrityError("catalog has no schema for relation " + r.name);
    ExtractedTable t = extract_table(content, *schema);
    if (t.entry.rows_rejected || t.entry.raw_cells || t.table.rows.size() != r.row_count) {
      throw IntegrityError("relation file " + r.file + " does not match its schema");
    }
    w.relations_.emplace(r.name, std::move(t.table));
  }
  for (const auto& e : w.catalog_.indexes) {
    const Table* rel = w.find_relation(e.spec.relation);
    if (!rel) throw IntegrityError("index " + e.file + " names unknown relation " + e.spec.relation);
    const fs::path file = dir / e.file;
    if (!fs::is_regular_file(file)) {
      Index idx = Index::build(*rel, e.spec.columns, e.spec.kind, e.spec.unique);
      if (sha256_hex(idx.to_sidecar()) != e.checksum) {
        throw IntegrityError("rebuilt index " + e.file + " does not match its catalog checksum");
      }
      w.notices_.push_back("index sidecar " + e.file + " missing; rebuilt from " + rel->schema.name);
      w.indexes_.push_back(std::move(idx));
      continue;
    }
    const std::string content = read_file(file);
    if (sha256_hex(content) != e.checksum) throw IntegrityError("checksum mismatch for " + e.file);
    w.indexes_.push_back(Index::from_sidecar(content, rel->schema, e.spec.columns, e.spec.kind, e.spec.unique));
  }
  return w;
}

const Table* Warehouse::find_relation(std::string_view name) const {
  auto it = relations_.find(name);
  return it == relations_.end() ? nullptr : &it->second;
}

const Table& Warehouse::relation(std::string_view name) const {
  const Table* t = find_relation(name);
  if (!t) throw ValidationError("unknown relation '" + std::string(name) + "'");
  return *t;
}

std::vector<std::string> Warehouse::relation_names() const {
  std::vector<std::string> out;
  for (const auto& r : catalog_.relations) out.push_back(r.name);
  return out;
}

const Index* Warehouse::index(std::string_view relation, const std::vector<std::string>& columns) const {
  for (const auto& i : indexes_) {
    if (i.relation() == relation && i.columns() == columns) return &i;
  }
  return nullptr;
}

}  // namespace uwh

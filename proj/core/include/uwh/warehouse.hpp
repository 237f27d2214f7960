#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "uwh/index.hpp"
#include "uwh/plan/ast.hpp"
#include "uwh/staging.hpp"

namespace uwh {

/// One dimension of the snowflake and the join that attaches it to its
/// parent (the fact or another dimension): columns[i] = parent_columns[i].
struct DimensionLink {
  std::string table;     // staging table
  std::string relation;  // persisted name, dim_<table>
  std::string key;
  std::string parent;    // parent relation
  std::vector<std::string> columns;
  std::vector<std::string> parent_columns;

  friend bool operator==(const DimensionLink&, const DimensionLink&) = default;
};

struct SnowflakeSchema {
  std::string fact_table;
  std::string fact;  // persisted name, <table>_fact
  std::vector<std::string> measures;        // numeric fact columns outside every key
  std::vector<std::string> dimension_keys;  // fact columns that reference a dimension
  std::vector<std::string> time_columns;    // year then semester columns of the fact
  std::vector<DimensionLink> dimensions;    // breadth-first from the fact

  static constexpr std::size_t kDimensionCount = 7;

  const DimensionLink* find_dimension(std::string_view relation) const;
  friend bool operator==(const SnowflakeSchema&, const SnowflakeSchema&) = default;
};

/// Checks counts, dimension key uniqueness and fact key resolution, and
/// derives the snowflake arms from the foreign keys among the declared
/// tables. Throws ValidationError.
SnowflakeSchema assemble_snowflake(const StagingArea& staging, const plan::Fact& fact,
                                   const std::vector<plan::Dimension>& dimensions);
SnowflakeSchema assemble_snowflake(const StagingArea& staging, const plan::Plan& plan);

/// Fact first, then dimensions, renamed to their persisted names with foreign
/// keys retargeted. Throws IntegrityError when a join key dangles.
std::vector<Table> materialize_relations(const SnowflakeSchema& schema, const StagingArea& staging);

struct IndexSpec {
  std::string relation;
  std::vector<std::string> columns;
  IndexKind kind = IndexKind::kHash;
  bool unique = false;
};

/// Hash on every dimension key (unique) and link column, hash on every fact
/// dimension-key column, ordered on the fact's time columns.
std::vector<IndexSpec> plan_indexes(const SnowflakeSchema& schema);

struct RelationEntry {
  std::string name;
  std::string file;
  std::string checksum;
  std::size_t row_count = 0;
};

struct IndexEntry {
  IndexSpec spec;
  std::string file;
  std::string checksum;
};

struct BuildInfo {
  std::string plan_hash;
  std::string source_hash;
  std::string timestamp;
};

struct WarehouseCatalog {
  static constexpr int kFormatVersion = 1;

  int format_version = kFormatVersion;
  bool frozen = true;
  DatabaseSchema schema;  // persisted relation schemas
  SnowflakeSchema snowflake;
  std::vector<RelationEntry> relations;
  std::vector<IndexEntry> indexes;
  BuildInfo build;

  /// Serialized catalog including its self-checksum.
  std::string to_json() const;
  /// Verifies the self-checksum first. Throws IntegrityError.
  static WarehouseCatalog from_json(std::string_view text);
};

/// Writes relations, sidecars and catalog.json into `out_dir`, which must be
/// absent or empty. The directory appears only once complete.
WarehouseCatalog load(const std::filesystem::path& out_dir, const SnowflakeSchema& schema,
                      const std::vector<Table>& relations, const BuildInfo& build);

/// True when `dir` holds a frozen catalog.
bool is_warehouse(const std::filesystem::path& dir);

/// Read-only handle over a persisted warehouse.
class Warehouse {
 public:
  /// Verifies every checksum (IntegrityError) and loads or rebuilds indexes.
  static Warehouse open(const std::filesystem::path& dir);

  const WarehouseCatalog& catalog() const { return catalog_; }
  const SnowflakeSchema& snowflake() const { return catalog_.snowflake; }
  const std::vector<std::string>& notices() const { return notices_; }

  std::size_t relation_count() const { return relations_.size(); }
  const Table& relation(std::string_view name) const;
  const Table* find_relation(std::string_view name) const;
  std::vector<std::string> relation_names() const;

  /// Index over exactly `columns` of `relation`, or nullptr.
  const Index* index(std::string_view relation, const std::vector<std::string>& columns) const;
  const std::vector<Index>& indexes() const { return indexes_; }

 private:
  Warehouse() = default;

  WarehouseCatalog catalog_;
  std::map<std::string, Table, std::less<>> relations_;
  std::vector<Index> indexes_;
  std::vector<std::string> notices_;
};

}  // namespace uwh

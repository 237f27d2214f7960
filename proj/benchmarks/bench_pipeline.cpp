#include <benchmark/benchmark.h>

#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <unistd.h>

#include "uwh/canonical.hpp"
#include "uwh/cleanse.hpp"
#include "uwh/datagen.hpp"
#include "uwh/ingest.hpp"
#include "uwh/manifest.hpp"
#include "uwh/plan/parser.hpp"
#include "uwh/query.hpp"
#include "uwh/transform.hpp"
#include "uwh/warehouse.hpp"

namespace fs = std::filesystem;
using namespace uwh;

namespace {

constexpr const char* kTimestamp = "2024-01-01T00:00:00Z";

// One generated source tree and warehouse per student count, built on first use.
struct Fixture {
  fs::path root;
  StagingArea cleansed;
  std::unique_ptr<Warehouse> warehouse;

  explicit Fixture(std::size_t students) {
    root = fs::temp_directory_path() / ("uwh-bench-" + std::to_string(::getpid()) + "-" + std::to_string(students));
    fs::remove_all(root);
    Dataset data = generate({.seed = 42, .students = students});
    data.write(root / "src");
    cleansed = extract_database(root / "src", data.schema, kTimestamp).first;
    cleanse_staging(cleansed, parse_rules(canonical_rules()), FkPolicy{}, kTimestamp);
    StagingArea transformed = cleansed;
    plan::Plan p = plan::parse_plan(canonical_plan());
    execute_plan(transformed, p, {kTimestamp});
    SnowflakeSchema sf = assemble_snowflake(transformed, p);
    load(root / "wh", sf, materialize_relations(sf, transformed), {"bench", "bench", kTimestamp});
    warehouse = std::make_unique<Warehouse>(Warehouse::open(root / "wh"));
  }
  ~Fixture() { fs::remove_all(root); }
};

Fixture& fixture(std::size_t students) {
  static std::map<std::size_t, std::unique_ptr<Fixture>> cache;
  auto& slot = cache[students];
  if (!slot) slot = std::make_unique<Fixture>(students);
  return *slot;
}

void BM_Extract(benchmark::State& state) {
  Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
  DatabaseSchema schema = parse_schema_manifest(canonical_manifest());
  for (auto _ : state) {
    auto staged = extract_database(f.root / "src", schema, kTimestamp);
    benchmark::DoNotOptimize(staged);
  }
}
BENCHMARK(BM_Extract)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_CanonicalPlan(benchmark::State& state) {
  Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
  plan::Plan p = plan::parse_plan(canonical_plan());
  for (auto _ : state) {
    StagingArea s = f.cleansed;
    execute_plan(s, p, {kTimestamp});
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_CanonicalPlan)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_IndexLookup(benchmark::State& state) {
  Fixture& f = fixture(10000);
  const Index* idx = f.warehouse->index("dim_student", {"st_id"});
  const Table& students = f.warehouse->relation("dim_student");
  std::size_t col = *students.schema.column_index("st_id");
  std::mt19937_64 rng(1);
  for (auto _ : state) {
    const Row& row = students.rows[rng() % students.rows.size()];
    benchmark::DoNotOptimize(idx->lookup({row[col]}));
  }
}
BENCHMARK(BM_IndexLookup);

void BM_StarQuery(benchmark::State& state) {
  Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
  QuerySpec q{{Measure::parse("AVG(tr_grade)"), Measure::parse("COUNT(*)")}, {"dep_name", "st_gender"}, {}};
  for (auto _ : state) benchmark::DoNotOptimize(star_query(*f.warehouse, q));
}
BENCHMARK(BM_StarQuery)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

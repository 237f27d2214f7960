#include "test_support.hpp"

#include <atomic>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include "uwh/canonical.hpp"
#include "uwh/cli.hpp"
#include "uwh/ingest.hpp"
#include "uwh/manifest.hpp"
#include "uwh/plan/parser.hpp"
#include "uwh/transform.hpp"

namespace uwh::support {

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("uwh-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& file, const std::string& content) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << content;
}

std::map<std::string, std::string> snapshot_dir(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
  }
  return files;
}

StagingArea extract_dataset(const Dataset& data, const fs::path& dir) {
  data.write(dir);
  return extract_database(dir, data.schema, kPinnedTimestamp).first;
}

const std::vector<CleanseRule>& canonical_rule_set() {
  static const std::vector<CleanseRule> rules = parse_rules(canonical_rules());
  return rules;
}

const plan::Plan& canonical_plan_ast() {
  static const plan::Plan p = plan::parse_plan(canonical_plan());
  return p;
}

Stages run_stages(const GenConfig& config, const fs::path& work_dir) {
  Stages s;
  s.data = generate(config);
  s.extracted = extract_dataset(s.data, work_dir);
  s.cleansed = s.extracted;
  s.cleanse_report = cleanse_staging(s.cleansed, canonical_rule_set(), FkPolicy{}, kPinnedTimestamp);
  s.transformed = s.cleansed;
  execute_plan(s.transformed, canonical_plan_ast(), {kPinnedTimestamp});
  return s;
}

int cli(const std::vector<std::string>& args, std::string* out_text, std::string* err_text) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

int cli_build(const GenConfig& config, const fs::path& work_dir, std::string* err_text) {
  generate(config).write(work_dir / "src");
  spit(work_dir / "schema.txt", std::string(canonical_manifest()));
  spit(work_dir / "plan.uwh", std::string(canonical_plan()));
  spit(work_dir / "rules.txt", std::string(canonical_rules()));
  return cli({"build", "--schema", (work_dir / "schema.txt").string(), "--src", (work_dir / "src").string(), "--plan",
              (work_dir / "plan.uwh").string(), "--rules", (work_dir / "rules.txt").string(), "--out",
              (work_dir / "wh").string(), "--timestamp", kPinnedTimestamp},
             nullptr, err_text);
}

namespace {

std::size_t column_of(const Table& t, const std::string& name) {
  for (std::size_t i = 0; i < t.schema.columns.size(); ++i) {
    if (t.schema.columns[i].name == name) return i;
  }
  throw std::runtime_error("oracle: no column " + name + " in " + t.schema.name);
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  for (const auto& x : v) {
    if (x == s) return true;
  }
  return false;
}

}  // namespace

std::vector<Row> oracle_merge(const StagingArea& before, const plan::Merge& merge) {
  std::string base;
  std::vector<std::string> sources;
  if (!contains(merge.sources, merge.target) && before.find(merge.target)) {
    base = merge.target;
    sources = merge.sources;
  } else {
    base = merge.sources.front();
    for (const auto& s : merge.sources) {
      if (s != base) sources.push_back(s);
    }
  }
  auto physical = [&](const std::string& t) { return t == merge.target ? base : t; };

  std::vector<Row> out;
  for (const Row& base_row : before.at(base).rows) {
    std::map<std::string, const Row*> bound{{base, &base_row}};
    std::set<std::string> settled{base};
    bool progress = true;
    while (progress) {
      progress = false;
      for (const auto& src : sources) {
        if (settled.count(src)) continue;
        // Conditions joining src with something already settled.
        std::vector<std::pair<std::string, std::pair<std::string, std::string>>> links;  // src col, (table, col)
        for (const auto& c : merge.conditions) {
          std::string lt = physical(c.left.table), rt = physical(c.right.table);
          if (lt == src && settled.count(rt)) links.push_back({c.left.column, {rt, c.right.column}});
          if (rt == src && settled.count(lt)) links.push_back({c.right.column, {lt, c.left.column}});
        }
        if (links.empty()) continue;
        settled.insert(src);
        progress = true;
        const Table& st = before.at(src);
        const Row* match = nullptr;
        for (const Row& cand : st.rows) {
          bool ok = true;
          for (const auto& [col, other] : links) {
            const Row* o = bound.count(other.first) ? bound[other.first] : nullptr;
            if (!o) {
              ok = false;
              break;
            }
            const Value& a = cand[column_of(st, col)];
            const Value& b = (*o)[column_of(before.at(other.first), other.second)];
            if (a.is_null() || b.is_null() || !(a == b)) {
              ok = false;
              break;
            }
          }
          if (!ok) continue;
          if (match) throw std::runtime_error("oracle: ambiguous match in " + src);
          match = &cand;
        }
        if (match) bound[src] = match;
      }
    }
    Row row = base_row;
    for (const auto& k : merge.keep) {
      std::string t = physical(k.table);
      row.push_back(bound.count(t) ? (*bound[t])[column_of(before.at(t), k.column)] : Value::null());
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<std::string> unrecovered_dirt(const DirtLedger& ledger, const StagingArea& cleansed) {
  auto key_of_row = [](const TableSchema& s, const Row& row) {
    std::string k;
    for (std::size_t i : s.key_indices()) {
      if (!k.empty()) k += "|";
      k += row[i].is_null() ? std::string("NULL") : *row[i].to_text();
    }
    return k;
  };
  // Per table: key -> rows present; key -> quarantined.
  std::map<std::string, std::multimap<std::string, const Row*>> live;
  std::map<std::string, std::set<std::string>> held;
  for (const auto& [name, t] : cleansed.tables) {
    for (const Row& r : t.rows) live[name].emplace(key_of_row(t.schema, r), &r);
    auto q = cleansed.quarantine.find(name);
    if (q == cleansed.quarantine.end()) continue;
    std::vector<std::size_t> key_at;
    for (const auto& pk : t.schema.primary_key) {
      for (std::size_t i = 0; i < q->second.columns.size(); ++i) {
        if (q->second.columns[i] == pk) key_at.push_back(i);
      }
    }
    for (const auto& qr : q->second.rows) {
      std::string k;
      for (std::size_t i : key_at) {
        if (!k.empty()) k += "|";
        k += qr.cells[i].value_or("NULL");
      }
      held[name].insert(k);
    }
  }

  std::vector<std::string> failures;
  for (const auto& e : ledger.entries) {
    const std::string where = e.table + "[" + e.row_key + "]." + e.column + " (" + e.kind + ")";
    const Table* t = cleansed.find(e.table);
    if (!t) {
      failures.push_back(where + ": table missing");
      continue;
    }
    auto [lo, hi] = live[e.table].equal_range(e.row_key);
    const auto present = static_cast<std::size_t>(std::distance(lo, hi));
    const bool quarantined = held[e.table].count(e.row_key) > 0;
    if (e.kind == dirt::kDuplicateRow) {
      if (present > 1) failures.push_back(where + ": duplicate survived");
      if (present == 0 && !quarantined) failures.push_back(where + ": row vanished without quarantine");
      continue;
    }
    if (e.kind == dirt::kOrphanFk) {
      if (present != 0 || !quarantined) failures.push_back(where + ": orphan not quarantined");
      continue;
    }
    if (present == 0) {
      if (!quarantined) failures.push_back(where + ": row vanished without quarantine");
      continue;
    }
    const Value& v = (*lo->second)[column_of(*t, e.column)];
    if (v.to_text() != e.original) {
      failures.push_back(where + ": holds '" + v.debug_string() + "', expected '" + e.original.value_or("NULL") + "'");
    }
  }
  return failures;
}

std::size_t nested_loop_orphans(const StagingArea& staging) {
  std::size_t orphans = 0;
  for (const auto& [name, t] : staging.tables) {
    for (const auto& fk : t.schema.foreign_keys) {
      const Table* target = staging.find(fk.target_table);
      for (const Row& row : t.rows) {
        bool has_null = false;
        for (const auto& c : fk.columns) has_null |= row[column_of(t, c)].is_null();
        if (has_null) continue;
        bool found = false;
        if (target) {
          for (const Row& cand : target->rows) {
            bool eq = true;
            for (std::size_t i = 0; i < fk.columns.size() && eq; ++i) {
              eq = row[column_of(t, fk.columns[i])] == cand[column_of(*target, fk.target_columns[i])];
            }
            if (eq) {
              found = true;
              break;
            }
          }
        }
        if (!found) ++orphans;
      }
    }
  }
  return orphans;
}

std::string oracle_difficulty(const std::vector<Value>& grades, std::int64_t hi_units, std::int64_t lo_units) {
  __int128 sum = 0;
  std::int64_t n = 0;
  for (const auto& g : grades) {
    if (g.is_null()) continue;
    sum += g.as_decimal().units();
    ++n;
  }
  if (n == 0) return "unknown";
  if (sum >= static_cast<__int128>(hi_units) * n) return "low";
  if (sum >= static_cast<__int128>(lo_units) * n) return "medium";
  return "high";
}

namespace {

struct OracleAttr {
  std::string relation;
  std::size_t column = 0;
  ValueType type = ValueType::kNull;
};

OracleAttr oracle_resolve(const Warehouse& w, const std::string& name) {
  auto dot = name.find('.');
  std::vector<OracleAttr> hits;
  for (const auto& rel : w.relation_names()) {
    const Table& t = w.relation(rel);
    std::string col = name;
    if (dot != std::string::npos) {
      std::string prefix = name.substr(0, dot);
      col = name.substr(dot + 1);
      const DimensionLink* d = w.snowflake().find_dimension(rel);
      bool named = prefix == rel || (d && d->table == prefix) || (rel == w.snowflake().fact && prefix == w.snowflake().fact_table);
      if (!named) continue;
    }
    for (std::size_t i = 0; i < t.schema.columns.size(); ++i) {
      if (t.schema.columns[i].name == col) hits.push_back({rel, i, t.schema.columns[i].type});
    }
  }
  if (hits.size() != 1) throw std::runtime_error("oracle: cannot resolve " + name);
  return hits.front();
}

// Rounds n / d half away from zero.
std::int64_t round_div(__int128 n, __int128 d) {
  bool neg = (n < 0) != (d < 0);
  __int128 an = n < 0 ? -n : n, ad = d < 0 ? -d : d;
  __int128 q = an / ad, r = an % ad;
  if (2 * r >= ad) ++q;
  return static_cast<std::int64_t>(neg ? -q : q);
}

}  // namespace

QueryResult oracle_query(const Warehouse& w, const QuerySpec& spec) {
  const SnowflakeSchema& sf = w.snowflake();
  std::vector<OracleAttr> groups, inputs(spec.measures.size());
  std::vector<bool> has_input(spec.measures.size(), false);
  std::vector<std::pair<OracleAttr, std::pair<CompareOp, Value>>> filters;
  std::set<std::string> needed;
  for (const auto& g : spec.group_by) groups.push_back(oracle_resolve(w, g));
  for (std::size_t m = 0; m < spec.measures.size(); ++m) {
    if (!spec.measures[m].column.empty()) {
      inputs[m] = oracle_resolve(w, spec.measures[m].column);
      has_input[m] = true;
      needed.insert(inputs[m].relation);
    }
  }
  for (const auto& f : spec.filters) {
    OracleAttr a = oracle_resolve(w, f.attribute);
    filters.push_back({a, {f.op, *Value::parse_as(f.literal, a.type)}});
    needed.insert(a.relation);
  }
  for (const auto& g : groups) needed.insert(g.relation);
  // Close over parents.
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& d : sf.dimensions) {
      if (needed.count(d.relation) && !needed.count(d.parent)) {
        needed.insert(d.parent);
        grew = true;
      }
    }
  }
  std::vector<const DimensionLink*> order;
  for (const auto& d : sf.dimensions) {
    if (needed.count(d.relation)) order.push_back(&d);
  }

  // Materialize every joined tuple.
  std::vector<std::map<std::string, const Row*>> tuples;
  std::map<std::string, const Row*> bound;
  std::function<void(std::size_t)> expand = [&](std::size_t i) {
    if (i == order.size()) {
      tuples.push_back(bound);
      return;
    }
    const DimensionLink& d = *order[i];
    const Table& dim = w.relation(d.relation);
    const Table& parent = w.relation(d.parent);
    const Row& p = *bound.at(d.parent);
    for (const Row& r : dim.rows) {
      bool eq = true;
      for (std::size_t c = 0; c < d.columns.size() && eq; ++c) {
        const Value& a = r[column_of(dim, d.columns[c])];
        const Value& b = p[column_of(parent, d.parent_columns[c])];
        eq = !a.is_null() && !b.is_null() && a == b;
      }
      if (!eq) continue;
      bound[d.relation] = &r;
      expand(i + 1);
    }
    bound.erase(d.relation);
  };
  for (const Row& f : w.relation(sf.fact).rows) {
    bound.clear();
    bound[sf.fact] = &f;
    expand(0);
  }

  struct Acc {
    std::int64_t count = 0;
    __int128 sum = 0;
    Value extreme;
  };
  struct KeyLess {
    bool operator()(const KeyTuple& a, const KeyTuple& b) const { return order_keys(a, b) < 0; }
  };
  std::map<KeyTuple, std::vector<Acc>, KeyLess> acc;
  for (const auto& t : tuples) {
    bool keep = true;
    for (const auto& [a, pred] : filters) {
      keep = keep && compare_predicate((*t.at(a.relation))[a.column], pred.first, pred.second);
    }
    if (!keep) continue;
    KeyTuple key;
    for (const auto& g : groups) key.push_back((*t.at(g.relation))[g.column]);
    auto& accs = acc[key];
    accs.resize(spec.measures.size());
    for (std::size_t m = 0; m < spec.measures.size(); ++m) {
      if (!has_input[m]) {
        ++accs[m].count;
        continue;
      }
      const Value& v = (*t.at(inputs[m].relation))[inputs[m].column];
      if (v.is_null()) continue;
      ++accs[m].count;
      if (v.type() == ValueType::kInteger) accs[m].sum += v.as_integer();
      if (v.type() == ValueType::kDecimal) accs[m].sum += v.as_decimal().units();
      if (accs[m].extreme.is_null()) {
        accs[m].extreme = v;
      } else {
        auto c = compare_values(v, accs[m].extreme);
        if ((spec.measures[m].aggregate == Aggregate::kMin && c < 0) ||
            (spec.measures[m].aggregate == Aggregate::kMax && c > 0)) {
          accs[m].extreme = v;
        }
      }
    }
  }

  QueryResult result;
  result.columns = spec.group_by;
  for (const auto& m : spec.measures) result.columns.push_back(m.label());
  for (const auto& [key, accs] : acc) {
    Row row = key;
    bool emit = true;
    for (std::size_t m = 0; m < spec.measures.size(); ++m) {
      const Acc& a = accs[m];
      switch (spec.measures[m].aggregate) {
        case Aggregate::kCount: row.push_back(Value::integer(a.count)); break;
        case Aggregate::kSum:
          if (a.count == 0) {
            row.push_back(Value::null());
          } else if (inputs[m].type == ValueType::kInteger) {
            row.push_back(Value::integer(static_cast<std::int64_t>(a.sum)));
          } else {
            row.push_back(Value::decimal(Decimal::from_units(static_cast<std::int64_t>(a.sum))));
          }
          break;
        case Aggregate::kAvg:
          if (a.count == 0) {
            emit = false;
          } else {
            __int128 units = inputs[m].type == ValueType::kInteger ? a.sum * Decimal::kScale : a.sum;
            row.push_back(Value::decimal(Decimal::from_units(round_div(units, a.count))));
          }
          break;
        case Aggregate::kMin:
        case Aggregate::kMax: row.push_back(a.extreme); break;
      }
    }
    if (emit) result.rows.push_back(std::move(row));
  }
  return result;
}

std::size_t pick_index(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

std::string random_text(Rng& rng, std::size_t max_len, bool hostile) {
  static const std::string plain = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 _-";
  static const std::string nasty = ",\"\r\n\t;'|\\";
  std::size_t len = pick_index(rng, max_len + 1);
  std::string s;
  for (std::size_t i = 0; i < len; ++i) {
    if (hostile && pick_index(rng, 4) == 0) {
      s += nasty[pick_index(rng, nasty.size())];
    } else {
      s += plain[pick_index(rng, plain.size())];
    }
  }
  return s;
}

Value random_value(Rng& rng, ValueType type) {
  switch (type) {
    case ValueType::kNull: return Value::null();
    case ValueType::kInteger:
      return Value::integer(std::uniform_int_distribution<std::int64_t>(-1000000, 1000000)(rng));
    case ValueType::kDecimal:
      return Value::decimal(Decimal::from_units(std::uniform_int_distribution<std::int64_t>(-100000000, 100000000)(rng)));
    case ValueType::kText: return Value::text(random_text(rng, 12, true));
    case ValueType::kBoolean: return Value::boolean(pick_index(rng, 2) == 1);
    case ValueType::kDate:
      return Value::date(Date::from_days(std::uniform_int_distribution<std::int32_t>(-30000, 60000)(rng)));
  }
  return Value::null();
}

QuerySpec random_query(Rng& rng, const Warehouse& w) {
  static const std::vector<std::string> group_pool = {
      "tr_year",   "tr_semester", "dep_name",  "co_code",   "co_credits",     "st_gender",           "in_rank",
      "mj_name",   "ac_status",   "re_semester", "re_paidOnDueDate", "act_type", "al_degree", "tr_courseDifficulty",
      "dim_student.st_gender", "instructor.in_rank", "transcript_fact.tr_year"};
  static const std::vector<std::string> numeric_pool = {"tr_grade",  "co_credits", "re_amount",
                                                        "ac_balance", "tr_year",    "re_year"};
  static const std::vector<std::string> any_pool = {"tr_grade", "st_name", "re_amount", "in_name", "st_dob",
                                                    "al_gradDate", "co_code", "re_paidOnDueDate"};
  static const std::vector<std::string> filter_pool = {"tr_year",   "tr_semester", "tr_grade", "st_gender",
                                                       "dep_name",  "co_credits",  "in_rank",  "re_amount",
                                                       "ac_status", "al_degree",   "st_dob",   "re_paidOnDueDate"};
  static const std::vector<CompareOp> ops = {CompareOp::kEq, CompareOp::kNe, CompareOp::kLt,
                                             CompareOp::kLe, CompareOp::kGt, CompareOp::kGe};
  QuerySpec q;
  std::size_t n_groups = pick_index(rng, 3);
  std::set<std::string> used;
  for (std::size_t i = 0; i < n_groups; ++i) {
    const std::string& g = group_pool[pick_index(rng, group_pool.size())];
    if (used.insert(g).second) q.group_by.push_back(g);
  }
  std::size_t n_measures = 1 + pick_index(rng, 3);
  for (std::size_t i = 0; i < n_measures; ++i) {
    Measure m;
    m.aggregate = static_cast<Aggregate>(pick_index(rng, 5));
    if (m.aggregate == Aggregate::kCount) {
      m.column = pick_index(rng, 2) ? "" : any_pool[pick_index(rng, any_pool.size())];
    } else if (m.aggregate == Aggregate::kSum || m.aggregate == Aggregate::kAvg) {
      m.column = numeric_pool[pick_index(rng, numeric_pool.size())];
    } else {
      m.column = any_pool[pick_index(rng, any_pool.size())];
    }
    q.measures.push_back(m);
  }
  std::size_t n_filters = pick_index(rng, 3);
  for (std::size_t i = 0; i < n_filters; ++i) {
    Filter f;
    f.attribute = filter_pool[pick_index(rng, filter_pool.size())];
    f.op = ops[pick_index(rng, ops.size())];
    OracleAttr a = oracle_resolve(w, f.attribute);
    const Table& t = w.relation(a.relation);
    std::optional<std::string> lit;
    for (int tries = 0; tries < 8 && !lit && !t.rows.empty(); ++tries) {
      lit = t.rows[pick_index(rng, t.rows.size())][a.column].to_text();
    }
    if (!lit) continue;
    f.literal = *lit;
    q.filters.push_back(f);
  }
  return q;
}

}  // namespace uwh::support

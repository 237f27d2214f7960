#include "uwh/query.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <optional>
#include <limits>
#include <map>
#include <unordered_map>

#include "uwh/csv.hpp"
#include "uwh/errors.hpp"

namespace uwh {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view aggregate_name(Aggregate a) {
  switch (a) {
    case Aggregate::kCount: return "COUNT";
    case Aggregate::kSum: return "SUM";
    case Aggregate::kAvg: return "AVG";
    case Aggregate::kMin: return "MIN";
    case Aggregate::kMax: return "MAX";
  }
  return "?";
}

struct Attribute {
  std::size_t slot;  // 0 = fact, i = i-th joined dimension
  std::size_t column;
  ValueType type;
};

struct Join {
  const DimensionLink* link;
  std::size_t parent_slot;
  std::vector<std::size_t> parent_at;
  const Table* table;
  const Index* index;
  std::unordered_map<KeyTuple, std::vector<std::size_t>, KeyTupleHash> fallback;
};

struct Accumulator {
  std::int64_t count = 0;  // non-Null inputs (all tuples for COUNT(*))
  __int128 sum = 0;        // Integer values or Decimal units
  Value extreme;
};

struct GroupLess {
  bool operator()(const KeyTuple& a, const KeyTuple& b) const { return order_keys(a, b) < 0; }
};

class Planner {
 public:
  explicit Planner(const Warehouse& w) : w_(w) {
    const auto& sf = w.snowflake();
    fact_ = &w.relation(sf.fact);
    slots_.push_back(sf.fact);
  }

  Attribute resolve(const std::string& name) {
    const auto& sf = w_.snowflake();
    std::vector<std::pair<std::string, std::size_t>> hits;
    auto consider = [&](const std::string& relation, std::string_view column) {
      const Table& t = w_.relation(relation);
      if (auto c = t.schema.column_index(column)) hits.emplace_back(relation, *c);
    };
    auto dot = name.find('.');
    if (dot != std::string::npos) {
      const std::string prefix = name.substr(0, dot);
      const std::string column = name.substr(dot + 1);
      if (prefix == sf.fact || prefix == sf.fact_table) consider(sf.fact, column);
      for (const auto& d : sf.dimensions) {
        if (prefix == d.relation || prefix == d.table) consider(d.relation, column);
      }
    } else {
      consider(sf.fact, name);
      for (const auto& d : sf.dimensions) consider(d.relation, name);
    }
    if (hits.empty()) throw ValidationError("unknown attribute '" + name + "'");
    if (hits.size() > 1) {
      throw ValidationError("ambiguous attribute '" + name + "'; qualify it as relation.column");
    }
    const auto& [relation, column] = hits.front();
    return {slot_for(relation), column, w_.relation(relation).schema.columns[column].type};
  }

  std::vector<Join>& joins() { return joins_; }
  const Table& fact() const { return *fact_; }

 private:
  std::size_t slot_for(const std::string& relation) {
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (slots_[i] == relation) return i;
    }
    const DimensionLink* link = w_.snowflake().find_dimension(relation);
    const std::size_t parent = slot_for(link->parent);
    Join j;
    j.link = link;
    j.parent_slot = parent;
    j.parent_at = w_.relation(link->parent).schema.indices_of(link->parent_columns);
    j.table = &w_.relation(relation);
    j.index = w_.index(relation, link->columns);
    if (!j.index) {
      auto at = j.table->schema.indices_of(link->columns);
      for (std::size_t r = 0; r < j.table->rows.size(); ++r) j.fallback[project(j.table->rows[r], at)].push_back(r);
    }
    joins_.push_back(std::move(j));
    slots_.push_back(relation);
    return slots_.size() - 1;
  }

  const Warehouse& w_;
  const Table* fact_ = nullptr;
  std::vector<std::string> slots_;
  std::vector<Join> joins_;
};

}  // namespace

Measure Measure::parse(std::string_view text) {
  text = strip(text);
  auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') {
    throw ValidationError("measure must look like AGG(column): '" + std::string(text) + "'");
  }
  const std::string agg = upper(strip(text.substr(0, open)));
  const std::string column(strip(text.substr(open + 1, text.size() - open - 2)));
  Measure m;
  if (agg == "COUNT") {
    m.aggregate = Aggregate::kCount;
  } else if (agg == "SUM") {
    m.aggregate = Aggregate::kSum;
  } else if (agg == "AVG") {
    m.aggregate = Aggregate::kAvg;
  } else if (agg == "MIN") {
    m.aggregate = Aggregate::kMin;
  } else if (agg == "MAX") {
    m.aggregate = Aggregate::kMax;
  } else {
    throw ValidationError("unknown aggregate '" + agg + "'");
  }
  if (column.empty()) throw ValidationError("measure needs a column: '" + std::string(text) + "'");
  if (column == "*") {
    if (m.aggregate != Aggregate::kCount) throw ValidationError("only COUNT accepts *");
  } else {
    m.column = column;
  }
  return m;
}

std::string Measure::label() const {
  return std::string(aggregate_name(aggregate)) + "(" + (column.empty() ? "*" : column) + ")";
}

Filter Filter::parse(std::string_view text) {
  static constexpr std::pair<std::string_view, CompareOp> kOps[] = {
      {"<>", CompareOp::kNe}, {"<=", CompareOp::kLe}, {">=", CompareOp::kGe},
      {"=", CompareOp::kEq},  {"<", CompareOp::kLt},  {">", CompareOp::kGt}};
  std::size_t best = std::string_view::npos;
  std::pair<std::string_view, CompareOp> op{};
  for (const auto& candidate : kOps) {
    auto at = text.find(candidate.first);
    if (at < best) {
      best = at;
      op = candidate;
    }
  }
  if (best == std::string_view::npos) throw ValidationError("filter needs an operator: '" + std::string(text) + "'");
  Filter f;
  f.attribute = std::string(strip(text.substr(0, best)));
  f.op = op.second;
  f.literal = std::string(strip(text.substr(best + op.first.size())));
  if (f.attribute.empty()) throw ValidationError("filter needs an attribute: '" + std::string(text) + "'");
  return f;
}

std::string QueryResult::to_csv() const {
  std::string out;
  std::vector<std::optional<std::string>> cells(columns.begin(), columns.end());
  csv::append_record(out, cells);
  for (const auto& row : rows) {
    cells.clear();
    for (const auto& v : row) cells.push_back(v.to_text());
    csv::append_record(out, cells);
  }
  return out;
}

QueryResult star_query(const Warehouse& warehouse, const QuerySpec& spec) {
  Planner planner(warehouse);
  std::vector<Attribute> groups;
  for (const auto& g : spec.group_by) groups.push_back(planner.resolve(g));

  struct BoundMeasure {
    Aggregate aggregate;
    std::optional<Attribute> input;
  };
  std::vector<BoundMeasure> measures;
  for (const auto& m : spec.measures) {
    BoundMeasure b{m.aggregate, std::nullopt};
    if (!m.column.empty()) {
      b.input = planner.resolve(m.column);
      const ValueType t = b.input->type;
      const bool numeric = t == ValueType::kInteger || t == ValueType::kDecimal;
      if ((m.aggregate == Aggregate::kSum || m.aggregate == Aggregate::kAvg) && !numeric) {
        throw ValidationError(m.label() + " needs an INTEGER or DECIMAL column, " + m.column + " is " +
                              std::string(type_name(t)));
      }
    }
    measures.push_back(b);
  }

  struct BoundFilter {
    Attribute attr;
    CompareOp op;
    Value literal;
  };
  std::vector<BoundFilter> filters;
  for (const auto& f : spec.filters) {
    Attribute a = planner.resolve(f.attribute);
    auto v = Value::parse_as(f.literal, a.type);
    if (!v) {
      throw ValidationError("filter literal '" + f.literal + "' is not a valid " + std::string(type_name(a.type)) +
                            " for " + f.attribute);
    }
    filters.push_back({a, f.op, std::move(*v)});
  }

  std::vector<Join>& joins = planner.joins();
  const std::size_t slots = joins.size() + 1;
  // Filters run as soon as their slot is bound.
  std::vector<std::vector<const BoundFilter*>> filters_at(slots);
  for (const auto& f : filters) filters_at[f.attr.slot].push_back(&f);

  std::map<KeyTuple, std::vector<Accumulator>, GroupLess> acc;
  std::vector<const Row*> bound(slots, nullptr);

  auto passes = [&](std::size_t slot) {
    for (const auto* f : filters_at[slot]) {
      if (!compare_predicate((*bound[slot])[f->attr.column], f->op, f->literal)) return false;
    }
    return true;
  };
  auto accumulate = [&] {
    KeyTuple key;
    key.reserve(groups.size());
    for (const auto& g : groups) key.push_back((*bound[g.slot])[g.column]);
    auto [it, inserted] = acc.try_emplace(std::move(key));
    if (inserted) it->second.resize(measures.size());
    for (std::size_t m = 0; m < measures.size(); ++m) {
      Accumulator& a = it->second[m];
      if (!measures[m].input) {
        ++a.count;
        continue;
      }
      const Value& v = (*bound[measures[m].input->slot])[measures[m].input->column];
      if (v.is_null()) continue;
      ++a.count;
      switch (measures[m].aggregate) {
        case Aggregate::kCount: break;
        case Aggregate::kSum:
        case Aggregate::kAvg:
          if (v.type() == ValueType::kInteger) {
            a.sum += measures[m].aggregate == Aggregate::kAvg ? static_cast<__int128>(v.as_integer()) * Decimal::kScale
                                                              : v.as_integer();
          } else {
            a.sum += v.as_decimal().units();
          }
          break;
        case Aggregate::kMin:
          if (a.extreme.is_null() || compare_values(v, a.extreme) < 0) a.extreme = v;
          break;
        case Aggregate::kMax:
          if (a.extreme.is_null() || compare_values(v, a.extreme) > 0) a.extreme = v;
          break;
      }
    }
  };
  std::function<void(std::size_t)> expand = [&](std::size_t j) {
    if (j == joins.size()) {
      accumulate();
      return;
    }
    Join& join = joins[j];
    KeyTuple probe = project(*bound[join.parent_slot], join.parent_at);
    if (any_null(probe)) return;
    std::vector<std::size_t> matches;
    if (join.index) {
      matches = join.index->lookup(probe);
    } else if (auto it = join.fallback.find(probe); it != join.fallback.end()) {
      matches = it->second;
    }
    for (std::size_t r : matches) {
      bound[j + 1] = &join.table->rows[r];
      if (passes(j + 1)) expand(j + 1);
    }
    bound[j + 1] = nullptr;
  };
  for (const Row& row : planner.fact().rows) {
    bound[0] = &row;
    if (passes(0)) expand(0);
  }

  QueryResult result;
  result.columns = spec.group_by;
  for (const auto& m : spec.measures) result.columns.push_back(m.label());
  for (auto& [key, accs] : acc) {
    Row row = key;
    bool emit = true;
    for (std::size_t m = 0; m < measures.size() && emit; ++m) {
      const Accumulator& a = accs[m];
      switch (measures[m].aggregate) {
        case Aggregate::kCount: row.push_back(Value::integer(a.count)); break;
        case Aggregate::kSum:
          if (a.count == 0) {
            row.push_back(Value::null());
          } else if (measures[m].input->type == ValueType::kInteger) {
            if (a.sum > std::numeric_limits<std::int64_t>::max() || a.sum < std::numeric_limits<std::int64_t>::min()) {
              throw ValidationError(spec.measures[m].label() + " overflows INTEGER");
            }
            row.push_back(Value::integer(static_cast<std::int64_t>(a.sum)));
          } else {
            row.push_back(Value::decimal(Decimal::divide(a.sum, 1)));
          }
          break;
        case Aggregate::kAvg:
          if (a.count == 0) {
            emit = false;
          } else {
            row.push_back(Value::decimal(Decimal::divide(a.sum, a.count)));
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

}  // namespace uwh

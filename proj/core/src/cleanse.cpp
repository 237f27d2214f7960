#include "uwh/cleanse.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "uwh/errors.hpp"
#include "uwh/plan/parser.hpp"

namespace uwh {

namespace {

using json = nlohmann::ordered_json;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

char to_upper(char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 32) : c; }
char to_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = to_lower(c);
  return out;
}

std::string text_arg(const Value& v, const std::string& rule) {
  if (v.type() != ValueType::kText) throw ValidationError(rule + ": expected text argument, got " + v.debug_string());
  return v.as_text();
}

std::optional<int> small_int(std::string_view s, std::size_t min_len, std::size_t max_len) {
  if (s.size() < min_len || s.size() > max_len) return std::nullopt;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
  }
  int v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

// Splits "a/b/c" (separators '/', '-', '.'; all three the same) into parts.
std::optional<std::array<std::string_view, 3>> split_numeric_date(std::string_view s) {
  std::size_t first = s.find_first_of("/-.");
  if (first == std::string_view::npos) return std::nullopt;
  char sep = s[first];
  std::size_t second = s.find(sep, first + 1);
  if (second == std::string_view::npos || s.find(sep, second + 1) != std::string_view::npos) return std::nullopt;
  return std::array<std::string_view, 3>{s.substr(0, first), s.substr(first + 1, second - first - 1),
                                         s.substr(second + 1)};
}

std::optional<Date> read_one(std::string_view s, DateFormat f) {
  switch (f) {
    case DateFormat::kIso: return Date::parse_iso(s);
    case DateFormat::kDayFirst:
    case DateFormat::kMonthFirst: {
      auto parts = split_numeric_date(s);
      if (!parts) return std::nullopt;
      auto a = small_int((*parts)[0], 1, 2);
      auto b = small_int((*parts)[1], 1, 2);
      auto y = small_int((*parts)[2], 4, 4);
      if (!a || !b || !y) return std::nullopt;
      return f == DateFormat::kDayFirst ? Date::from_ymd(*y, *b, *a) : Date::from_ymd(*y, *a, *b);
    }
    case DateFormat::kMonthName: {
      static constexpr std::array<std::string_view, 12> kMonths = {
          "january", "february", "march", "april", "may", "june",
          "july", "august", "september", "october", "november", "december"};
      std::size_t space = s.find(' ');
      std::size_t comma = s.find(", ");
      if (space == std::string_view::npos || comma == std::string_view::npos || comma < space) return std::nullopt;
      std::string month = lower(s.substr(0, space));
      auto day = small_int(s.substr(space + 1, comma - space - 1), 1, 2);
      auto year = small_int(s.substr(comma + 2), 4, 4);
      if (!day || !year) return std::nullopt;
      for (std::size_t m = 0; m < kMonths.size(); ++m) {
        if (month == kMonths[m] || (month.size() == 3 && kMonths[m].substr(0, 3) == month)) {
          return Date::from_ymd(*year, static_cast<int>(m) + 1, *day);
        }
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::string cell_text(const Value& v) { return v.to_text().value_or(""); }

bool numeric(ValueType t) { return t == ValueType::kInteger || t == ValueType::kDecimal; }

// Rows are never removed while rules run, so cell coordinates stay stable.
struct Work {
  Table table;
  std::vector<std::vector<std::string>> blame;
  std::set<std::pair<std::size_t, std::size_t>> touched;
  std::vector<std::string> notes;
};

RuleTally run_rule(Work& w, const CleanseRule& rule, std::vector<Anomaly>* anomalies) {
  RuleTally tally;
  tally.rule = rule.describe();
  auto col_idx = w.table.schema.column_index(rule.column);
  if (!col_idx) throw ValidationError("unknown column " + rule.table + "." + rule.column);
  const std::size_t c = *col_idx;
  for (std::size_t r = 0; r < w.table.rows.size(); ++r) {
    Value& cell = w.table.rows[r][c];
    ++tally.cells_examined;
    std::optional<Value> replacement;
    std::optional<std::string> problem;
    switch (rule.kind) {
      case RuleKind::kTrim:
      case RuleKind::kCollapseWhitespace:
      case RuleKind::kCase: {
        if (cell.type() != ValueType::kText) break;
        const std::string& s = cell.as_text();
        std::string out;
        if (rule.kind == RuleKind::kTrim) {
          out = trim(s);
        } else if (rule.kind == RuleKind::kCollapseWhitespace) {
          out = collapse_whitespace(s);
        } else if (rule.case_mode == CaseMode::kTitle) {
          out = title_case(s);
        } else {
          out = s;
          for (char& ch : out) ch = rule.case_mode == CaseMode::kUpper ? to_upper(ch) : to_lower(ch);
        }
        if (out != s) replacement = Value::text(std::move(out));
        break;
      }
      case RuleKind::kNullStandardize: {
        if (cell.type() != ValueType::kText) break;
        std::string key = lower(trim(cell.as_text()));
        for (const auto& token : rule.null_tokens) {
          if (key == lower(trim(token))) {
            replacement = Value::null();
            break;
          }
        }
        break;
      }
      case RuleKind::kNormalizeDate: {
        if (cell.type() != ValueType::kText) break;
        auto reading = read_date(cell.as_text(), rule.date_formats);
        if (!reading) {
          problem = "unparseable date";
          break;
        }
        if (reading->ambiguous) {
          w.notes.push_back(rule.table + "." + rule.column + " row " + std::to_string(r) + ": '" + cell.as_text() +
                            "' read as " + std::string(date_format_name(reading->format)));
        }
        replacement = Value::date(reading->date);
        break;
      }
      case RuleKind::kDomain: {
        if (cell.is_null()) break;
        if (std::find(rule.domain.begin(), rule.domain.end(), cell) == rule.domain.end()) {
          problem = "out of domain";
        }
        break;
      }
      case RuleKind::kRange: {
        if (cell.is_null() || !numeric(cell.type())) break;
        Value lo = rule.min, hi = rule.max;
        if (cell.type() == ValueType::kDecimal && lo.type() == ValueType::kInteger) {
          lo = Value::decimal(Decimal::from_integer(lo.as_integer()));
          hi = Value::decimal(Decimal::from_integer(hi.as_integer()));
        }
        if (lo.type() != cell.type()) break;
        if (compare_values(cell, lo) < 0 || compare_values(cell, hi) > 0) problem = "out of range";
        break;
      }
    }
    if (replacement && !(*replacement == cell)) {
      cell = std::move(*replacement);
      ++tally.cells_changed;
      w.touched.insert({r, c});
    }
    if (problem) {
      std::string reason = *problem + " " + rule.column + "='" + cell_text(cell) + "'";
      if (anomalies) anomalies->push_back({r, rule.column, cell_text(cell), *problem});
      w.blame[r].push_back(std::move(reason));
      w.touched.insert({r, c});
      ++tally.cells_quarantined;
    }
  }
  return tally;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

Work make_work(const Table& table) {
  Work w;
  w.table = table;
  w.blame.resize(table.rows.size());
  return w;
}

}  // namespace

std::string_view date_format_name(DateFormat f) {
  switch (f) {
    case DateFormat::kIso: return "iso";
    case DateFormat::kDayFirst: return "day_first";
    case DateFormat::kMonthFirst: return "month_first";
    case DateFormat::kMonthName: return "month_name";
  }
  return "?";
}

std::string CleanseRule::describe() const {
  std::string out = table + "." + column + " ";
  switch (kind) {
    case RuleKind::kTrim: return out + "trim";
    case RuleKind::kCollapseWhitespace: return out + "collapse_whitespace";
    case RuleKind::kCase:
      return out + "case(" + (case_mode == CaseMode::kTitle ? "title" : case_mode == CaseMode::kUpper ? "upper" : "lower") +
             ")";
    case RuleKind::kNormalizeDate: {
      out += "normalize_date(";
      for (std::size_t i = 0; i < date_formats.size(); ++i) out += (i ? "," : "") + std::string(date_format_name(date_formats[i]));
      return out + ")";
    }
    case RuleKind::kNullStandardize: return out + "null_standardize";
    case RuleKind::kDomain: return out + "domain";
    case RuleKind::kRange: return out + "range(" + min.debug_string() + "," + max.debug_string() + ")";
  }
  return out;
}

CleanseRule rule_from_statement(const plan::Clean& clean) {
  CleanseRule rule;
  rule.table = clean.column.table;
  rule.column = clean.column.column;
  const std::string kind = lower(clean.rule);
  const std::string where = clean.column.to_string() + " " + kind;
  auto want_args = [&](std::size_t n) {
    if (clean.args.size() != n) {
      throw ValidationError(where + ": expected " + std::to_string(n) + " argument(s), got " +
                            std::to_string(clean.args.size()));
    }
  };
  if (kind == "trim") {
    want_args(0);
    rule.kind = RuleKind::kTrim;
  } else if (kind == "collapse_whitespace" || kind == "collapse") {
    want_args(0);
    rule.kind = RuleKind::kCollapseWhitespace;
  } else if (kind == "case" || kind == "upper" || kind == "lower" || kind == "title") {
    rule.kind = RuleKind::kCase;
    std::string mode = kind;
    if (kind == "case") {
      want_args(1);
      mode = lower(text_arg(clean.args[0], where));
    } else {
      want_args(0);
    }
    if (mode == "upper") rule.case_mode = CaseMode::kUpper;
    else if (mode == "lower") rule.case_mode = CaseMode::kLower;
    else if (mode == "title") rule.case_mode = CaseMode::kTitle;
    else throw ValidationError(where + ": case mode must be upper, lower, or title");
  } else if (kind == "normalize_date") {
    rule.kind = RuleKind::kNormalizeDate;
    if (clean.args.empty()) {
      rule.date_formats = {DateFormat::kIso, DateFormat::kDayFirst, DateFormat::kMonthFirst, DateFormat::kMonthName};
    }
    for (const auto& a : clean.args) {
      std::string f = lower(text_arg(a, where));
      if (f == "iso") rule.date_formats.push_back(DateFormat::kIso);
      else if (f == "day_first") rule.date_formats.push_back(DateFormat::kDayFirst);
      else if (f == "month_first") rule.date_formats.push_back(DateFormat::kMonthFirst);
      else if (f == "month_name") rule.date_formats.push_back(DateFormat::kMonthName);
      else throw ValidationError(where + ": unknown date format '" + f + "'");
    }
  } else if (kind == "null_standardize") {
    rule.kind = RuleKind::kNullStandardize;
    if (clean.args.empty()) throw ValidationError(where + ": needs at least one token");
    for (const auto& a : clean.args) rule.null_tokens.push_back(text_arg(a, where));
  } else if (kind == "domain") {
    rule.kind = RuleKind::kDomain;
    if (clean.args.empty()) throw ValidationError(where + ": needs at least one value");
    rule.domain = clean.args;
  } else if (kind == "range") {
    rule.kind = RuleKind::kRange;
    want_args(2);
    rule.min = clean.args[0];
    rule.max = clean.args[1];
    if (!numeric(rule.min.type()) || !numeric(rule.max.type())) {
      throw ValidationError(where + ": range bounds must be numbers");
    }
    if (rule.min.type() != rule.max.type()) {
      auto widen = [](const Value& v) {
        return v.type() == ValueType::kInteger ? Value::decimal(Decimal::from_integer(v.as_integer())) : v;
      };
      rule.min = widen(rule.min);
      rule.max = widen(rule.max);
    }
    if (compare_values(rule.min, rule.max) > 0) throw ValidationError(where + ": range min exceeds max");
  } else {
    throw ValidationError(where + ": unknown rule kind '" + clean.rule + "'");
  }
  return rule;
}

void check_rule(const CleanseRule& rule, const TableSchema& schema) {
  const ColumnDef* col = schema.find_column(rule.column);
  const std::string where = rule.describe();
  if (!col) throw ValidationError(where + ": unknown column " + rule.table + "." + rule.column);
  switch (rule.kind) {
    case RuleKind::kTrim:
    case RuleKind::kCollapseWhitespace:
    case RuleKind::kCase:
      if (col->type != ValueType::kText) throw ValidationError(where + ": requires a TEXT column");
      break;
    case RuleKind::kNormalizeDate:
      if (col->type != ValueType::kDate) throw ValidationError(where + ": requires a DATE column");
      break;
    case RuleKind::kNullStandardize: break;
    case RuleKind::kDomain:
      for (const auto& v : rule.domain) {
        if (!v.is_null() && v.type() != col->type) {
          throw ValidationError(where + ": domain value " + v.debug_string() + " does not match column type " +
                                std::string(type_name(col->type)));
        }
      }
      break;
    case RuleKind::kRange:
      if (!numeric(col->type)) throw ValidationError(where + ": requires an INTEGER or DECIMAL column");
      if (col->type == ValueType::kInteger && rule.min.type() != ValueType::kInteger) {
        throw ValidationError(where + ": INTEGER column needs integer bounds");
      }
      break;
  }
}

std::vector<CleanseRule> parse_rules(std::string_view text) {
  plan::Plan p = plan::parse_plan(text);
  std::vector<CleanseRule> rules;
  for (const auto& s : p.statements) {
    const auto* clean = s.as<plan::Clean>();
    if (!clean) {
      throw ParseError("line " + std::to_string(s.pos.line) + ": rules file may only contain CLEAN statements",
                       s.pos.line, s.pos.column);
    }
    try {
      rules.push_back(rule_from_statement(*clean));
    } catch (const ValidationError& e) {
      throw ParseError("line " + std::to_string(s.pos.line) + ": " + e.what(), s.pos.line, s.pos.column);
    }
  }
  return rules;
}

std::optional<DateReading> read_date(std::string_view text, const std::vector<DateFormat>& priority) {
  std::optional<DateReading> chosen;
  for (DateFormat f : priority) {
    auto d = read_one(text, f);
    if (!d) continue;
    if (!chosen) {
      chosen = DateReading{*d, f, false};
    } else if (d->days() != chosen->date.days()) {
      chosen->ambiguous = true;
    }
  }
  return chosen;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_space = false;
  for (char c : s) {
    if (is_space(c)) {
      if (!in_space) out += ' ';
      in_space = true;
    } else {
      out += c;
      in_space = false;
    }
  }
  return out;
}

std::string title_case(std::string_view s) {
  std::string out(s);
  bool word_start = true;
  for (char& c : out) {
    if (is_space(c)) {
      word_start = true;
      continue;
    }
    c = word_start ? to_upper(c) : to_lower(c);
    word_start = false;
  }
  return out;
}

RuleOutcome apply_rule(const Table& table, const CleanseRule& rule) {
  check_rule(rule, table.schema);
  Work w = make_work(table);
  RuleOutcome out;
  out.tally = run_rule(w, rule, &out.anomalies);
  out.table.schema = table.schema;
  for (std::size_t r = 0; r < w.table.rows.size(); ++r) {
    if (w.blame[r].empty()) out.table.rows.push_back(std::move(w.table.rows[r]));
    else out.quarantined_rows.push_back(r);
  }
  out.notes = std::move(w.notes);
  return out;
}

std::size_t TableCleanseReport::cells_changed() const {
  std::size_t n = raw_cells_repaired;
  for (const auto& r : rules) n += r.cells_changed;
  return n;
}

CleanseResult cleanse_table(const Table& table, const std::vector<CleanseRule>& rules) {
  Work w = make_work(table);
  CleanseResult result;
  TableCleanseReport& report = result.report;
  report.table = table.schema.name;
  report.rows_in = table.rows.size();
  for (const auto& rule : rules) {
    if (rule.table != table.schema.name) continue;
    check_rule(rule, table.schema);
    report.rules.push_back(run_rule(w, rule, nullptr));
  }
  const auto& cols = table.schema.columns;
  for (std::size_t r = 0; r < w.table.rows.size(); ++r) {
    Row& row = w.table.rows[r];
    if (row.size() != cols.size()) {
      w.blame[r].push_back("arity");
      continue;
    }
    for (std::size_t c = 0; c < cols.size(); ++c) {
      Value& cell = row[c];
      if (is_raw_cell(cols[c], cell)) {
        if (auto parsed = Value::parse_as(cell.as_text(), cols[c].type)) {
          cell = std::move(*parsed);
          ++report.raw_cells_repaired;
          w.touched.insert({r, c});
        } else {
          w.blame[r].push_back("raw " + std::string(type_name(cols[c].type)) + " " + cols[c].name + "='" +
                               cell.as_text() + "'");
          w.touched.insert({r, c});
          ++report.type_check_quarantined;
        }
      } else if (cell.is_null() && !cols[c].nullable) {
        w.blame[r].push_back("null-in-nonnullable " + cols[c].name);
        w.touched.insert({r, c});
        ++report.type_check_quarantined;
      }
    }
  }
  result.table.schema = table.schema;
  for (std::size_t r = 0; r < w.table.rows.size(); ++r) {
    if (w.blame[r].empty()) {
      result.table.rows.push_back(std::move(w.table.rows[r]));
    } else {
      result.quarantined.push_back(make_quarantined(w.table.rows[r], "cleanse", join(w.blame[r], "; ")));
    }
  }
  report.rows_out = result.table.rows.size();
  report.rows_quarantined = result.quarantined.size();
  report.anomalous_cells = w.touched.size();
  report.notes = std::move(w.notes);
  return result;
}

CleanseResult dedup(const Table& table) {
  CleanseResult result;
  result.table.schema = table.schema;
  result.report.table = table.schema.name;
  result.report.rows_in = table.rows.size();
  auto pk = table.schema.key_indices();
  std::unordered_set<Row, KeyTupleHash> seen_rows;
  std::unordered_set<KeyTuple, KeyTupleHash> seen_keys;
  for (const auto& row : table.rows) {
    if (seen_rows.count(row)) {
      ++result.report.exact_duplicates;
      result.quarantined.push_back(make_quarantined(row, "dedup", "duplicate"));
      continue;
    }
    KeyTuple key = project(row, pk);
    if (!seen_keys.insert(key).second) {
      ++result.report.pk_conflicts;
      result.quarantined.push_back(make_quarantined(row, "dedup", "pk-conflict " + format_key(key)));
      continue;
    }
    seen_rows.insert(row);
    result.table.rows.push_back(row);
  }
  result.report.rows_out = result.table.rows.size();
  result.report.rows_quarantined = result.quarantined.size();
  return result;
}

FkAction FkPolicy::action_for(const std::string& table, const ForeignKey& fk) const {
  for (const auto& c : fk.columns) {
    if (auto it = overrides.find(table + "." + c); it != overrides.end()) return it->second;
  }
  return default_action;
}

void FkPolicy::validate(const StagingArea& staging) const {
  for (const auto& [key, action] : overrides) {
    auto dot = key.find('.');
    if (dot == std::string::npos) throw ValidationError("fk policy key must be table.column: " + key);
    const Table* t = staging.find(key.substr(0, dot));
    if (!t || !t->schema.has_column(key.substr(dot + 1))) throw ValidationError("fk policy names unknown column " + key);
  }
  for (const auto& [name, table] : staging.tables) {
    for (const auto& fk : table.schema.foreign_keys) {
      if (action_for(name, fk) != FkAction::kNullify) continue;
      for (const auto& c : fk.columns) {
        const ColumnDef* col = table.schema.find_column(c);
        if (col && !col->nullable) {
          throw ValidationError("cannot nullify non-nullable foreign key column " + name + "." + c);
        }
      }
    }
  }
}

ReconcileReport reconcile_foreign_keys(StagingArea& staging, const FkPolicy& policy, const std::string& timestamp) {
  policy.validate(staging);
  ReconcileReport report;
  for (;;) {
    OrphanReport orphans = check_referential_integrity(staging);
    if (orphans.empty()) break;
    ++report.passes;
    std::map<std::string, std::set<std::size_t>> doomed;
    std::map<std::string, std::size_t> nullified;
    for (const auto& entry : orphans) {
      Table& table = staging.at(entry.table);
      const ForeignKey& fk = table.schema.foreign_keys[entry.foreign_key];
      if (policy.action_for(entry.table, fk) == FkAction::kNullify) {
        auto cols = table.schema.indices_of(fk.columns);
        for (std::size_t r : entry.row_ordinals) {
          for (std::size_t c : cols) table.rows[r][c] = Value::null();
        }
        nullified[entry.table] += entry.row_ordinals.size();
        report.rows_nullified += entry.row_ordinals.size();
      } else {
        doomed[entry.table].insert(entry.row_ordinals.begin(), entry.row_ordinals.end());
      }
    }
    for (auto& [name, rows] : doomed) {
      Table& table = staging.at(name);
      std::vector<Row> kept;
      kept.reserve(table.rows.size() - rows.size());
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (rows.count(r)) {
          staging.quarantine_row(table, table.rows[r], "reconcile", "orphan");
        } else {
          kept.push_back(std::move(table.rows[r]));
        }
      }
      table.rows = std::move(kept);
      report.rows_quarantined += rows.size();
      report.per_table[name] += rows.size();
    }
    for (const auto& [name, n] : nullified) report.per_table[name] += n;
    for (const auto& [name, rows] : doomed) {
      staging.record({timestamp, "reconcile", -1, static_cast<std::int64_t>(rows.size()), {name},
                      "quarantine orphan rows"});
    }
    for (const auto& [name, n] : nullified) {
      staging.record({timestamp, "reconcile", -1, static_cast<std::int64_t>(n), {name}, "nullify orphan keys"});
    }
  }
  return report;
}

std::size_t CleanseReport::anomalous_cells() const {
  std::size_t n = 0;
  for (const auto& t : tables) n += t.anomalous_cells;
  return n;
}

std::size_t CleanseReport::cells_changed() const {
  std::size_t n = 0;
  for (const auto& t : tables) n += t.cells_changed();
  return n;
}

std::size_t CleanseReport::rows_quarantined() const {
  std::size_t n = reconcile.rows_quarantined;
  for (const auto& t : tables) n += t.rows_quarantined;
  return n;
}

std::string CleanseReport::to_json() const {
  json doc;
  doc["tables"] = json::array();
  for (const auto& t : tables) {
    json jt;
    jt["table"] = t.table;
    jt["rows_in"] = t.rows_in;
    jt["rows_out"] = t.rows_out;
    jt["rows_quarantined"] = t.rows_quarantined;
    jt["anomalous_cells"] = t.anomalous_cells;
    jt["raw_cells_repaired"] = t.raw_cells_repaired;
    jt["type_check_quarantined"] = t.type_check_quarantined;
    jt["exact_duplicates"] = t.exact_duplicates;
    jt["pk_conflicts"] = t.pk_conflicts;
    jt["rules"] = json::array();
    for (const auto& r : t.rules) {
      jt["rules"].push_back({{"rule", r.rule},
                             {"cells_examined", r.cells_examined},
                             {"cells_changed", r.cells_changed},
                             {"cells_quarantined", r.cells_quarantined}});
    }
    jt["notes"] = t.notes;
    doc["tables"].push_back(std::move(jt));
  }
  json rec;
  rec["passes"] = reconcile.passes;
  rec["rows_quarantined"] = reconcile.rows_quarantined;
  rec["rows_nullified"] = reconcile.rows_nullified;
  rec["per_table"] = reconcile.per_table;
  doc["reconcile"] = std::move(rec);
  doc["totals"] = {{"anomalous_cells", anomalous_cells()},
                   {"cells_changed", cells_changed()},
                   {"rows_quarantined", rows_quarantined()}};
  return doc.dump(2) + "\n";
}

std::string CleanseReport::to_text() const {
  std::ostringstream out;
  out << "cleanse summary\n";
  for (const auto& t : tables) {
    out << "  " << t.table << ": rows " << t.rows_in << " -> " << t.rows_out << ", quarantined " << t.rows_quarantined
        << ", cells changed " << t.cells_changed() << ", anomalous cells " << t.anomalous_cells;
    if (t.exact_duplicates || t.pk_conflicts) {
      out << ", duplicates " << t.exact_duplicates << ", pk conflicts " << t.pk_conflicts;
    }
    out << '\n';
  }
  out << "  reconcile: " << reconcile.rows_quarantined << " rows quarantined, " << reconcile.rows_nullified
      << " rows nullified in " << reconcile.passes << " pass(es)\n";
  out << "  total: " << anomalous_cells() << " anomalous cells, " << rows_quarantined() << " rows quarantined\n";
  return out.str();
}

CleanseReport cleanse_staging(StagingArea& staging, const std::vector<CleanseRule>& rules, const FkPolicy& policy,
                              const std::string& timestamp) {
  for (const auto& rule : rules) {
    const Table* t = staging.find(rule.table);
    if (!t) throw ValidationError(rule.describe() + ": unknown table " + rule.table);
    check_rule(rule, t->schema);
  }
  policy.validate(staging);
  CleanseReport report;
  for (auto& [name, table] : staging.tables) {
    CleanseResult cleaned = cleanse_table(table, rules);
    CleanseResult unique = dedup(cleaned.table);
    auto& q = staging.quarantine[name];
    if (q.columns.empty()) {
      for (const auto& c : table.schema.columns) q.columns.push_back(c.name);
    }
    for (auto& row : cleaned.quarantined) q.rows.push_back(std::move(row));
    for (auto& row : unique.quarantined) q.rows.push_back(std::move(row));
    if (q.rows.empty()) staging.quarantine.erase(name);

    TableCleanseReport tr = std::move(cleaned.report);
    tr.exact_duplicates = unique.report.exact_duplicates;
    tr.pk_conflicts = unique.report.pk_conflicts;
    tr.rows_quarantined += unique.report.rows_quarantined;
    tr.rows_out = unique.table.rows.size();
    table = std::move(unique.table);
    staging.record({timestamp, "cleanse", -1, static_cast<std::int64_t>(tr.anomalous_cells + tr.rows_quarantined),
                    {name}, "rules " + std::to_string(tr.rules.size()) + ", dedup"});
    report.tables.push_back(std::move(tr));
  }
  report.reconcile = reconcile_foreign_keys(staging, policy, timestamp);
  if (!check_referential_integrity(staging).empty()) {
    throw ValidationError("orphan rows survived foreign-key reconciliation");
  }
  return report;
}

}  // namespace uwh

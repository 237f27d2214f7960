#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "uwh/plan/ast.hpp"
#include "uwh/staging.hpp"

namespace uwh {

enum class RuleKind { kTrim, kCollapseWhitespace, kCase, kNormalizeDate, kNullStandardize, kDomain, kRange };
enum class CaseMode { kUpper, kLower, kTitle };
enum class DateFormat { kIso, kDayFirst, kMonthFirst, kMonthName };

std::string_view date_format_name(DateFormat f);

struct CleanseRule {
  std::string table;
  std::string column;
  RuleKind kind = RuleKind::kTrim;
  CaseMode case_mode = CaseMode::kTitle;
  std::vector<DateFormat> date_formats;  // priority order
  std::vector<std::string> null_tokens;  // matched trimmed, case-insensitively
  std::vector<Value> domain;
  Value min;
  Value max;

  /// e.g. `student.st_name trim`
  std::string describe() const;
};

/// Converts a CLEAN statement into a rule. Throws ValidationError for an
/// unknown kind or malformed arguments.
CleanseRule rule_from_statement(const plan::Clean& clean);

/// Throws ValidationError when the target column is missing or the rule kind
/// does not fit the column type.
void check_rule(const CleanseRule& rule, const TableSchema& schema);

/// Rules file: CLEAN statements, one per line, `--` comments.
std::vector<CleanseRule> parse_rules(std::string_view text);

/// Parses `text` with the given formats in priority order.
struct DateReading {
  Date date;
  DateFormat format;
  bool ambiguous = false;  // a lower-priority format would have produced a different date
};
std::optional<DateReading> read_date(std::string_view text, const std::vector<DateFormat>& priority);

std::string title_case(std::string_view s);
std::string collapse_whitespace(std::string_view s);
std::string trim(std::string_view s);

struct Anomaly {
  std::size_t row = 0;  // ordinal in the input table
  std::string column;
  std::string value;    // cell text before the rule ran
  std::string reason;
};

struct RuleTally {
  std::string rule;
  std::size_t cells_examined = 0;
  std::size_t cells_changed = 0;
  std::size_t cells_quarantined = 0;
};

struct RuleOutcome {
  Table table;                  // quarantined rows removed
  std::vector<Anomaly> anomalies;
  std::vector<std::size_t> quarantined_rows;  // input ordinals
  RuleTally tally;
  std::vector<std::string> notes;
};

/// Pure application of one rule. Cells the rule cannot repair become
/// anomalies and their rows are removed from the returned table.
RuleOutcome apply_rule(const Table& table, const CleanseRule& rule);

struct TableCleanseReport {
  std::string table;
  std::size_t rows_in = 0;
  std::size_t rows_out = 0;
  std::size_t rows_quarantined = 0;
  std::size_t anomalous_cells = 0;  // distinct cells changed or blamed for a quarantine
  std::size_t raw_cells_repaired = 0;
  std::size_t type_check_quarantined = 0;
  std::size_t exact_duplicates = 0;
  std::size_t pk_conflicts = 0;
  std::vector<RuleTally> rules;
  std::vector<std::string> notes;

  std::size_t cells_changed() const;
};

struct CleanseResult {
  Table table;
  TableCleanseReport report;
  std::vector<QuarantinedRow> quarantined;
};

/// Applies the rules that target `table` in listed order, then settles raw
/// cells: ones that now parse as the declared type are converted, the rest
/// quarantine their rows, as do Nulls left in non-nullable columns.
CleanseResult cleanse_table(const Table& table, const std::vector<CleanseRule>& rules);

/// Exact duplicates collapse to their first occurrence; later rows repeating
/// a primary key with a different payload are quarantined as pk-conflict.
/// Removed rows of both kinds are returned for audit.
CleanseResult dedup(const Table& table);

enum class FkAction { kQuarantine, kNullify };

struct FkPolicy {
  FkAction default_action = FkAction::kQuarantine;
  /// Keyed by `table.column` of any local FK column.
  std::map<std::string, FkAction> overrides;

  FkAction action_for(const std::string& table, const ForeignKey& fk) const;
  /// Throws ValidationError for nullify on a non-nullable FK column.
  void validate(const StagingArea& staging) const;
};

struct ReconcileReport {
  std::size_t passes = 0;
  std::size_t rows_quarantined = 0;
  std::size_t rows_nullified = 0;
  std::map<std::string, std::size_t> per_table;
};

/// Repeats until no orphan remains (quarantining a parent can orphan children).
ReconcileReport reconcile_foreign_keys(StagingArea& staging, const FkPolicy& policy,
                                       const std::string& timestamp = {});

struct CleanseReport {
  std::vector<TableCleanseReport> tables;
  ReconcileReport reconcile;

  std::size_t anomalous_cells() const;
  std::size_t cells_changed() const;
  std::size_t rows_quarantined() const;
  std::string to_json() const;
  std::string to_text() const;
};

/// Full stage: cleanse_table + dedup per table, then FK reconciliation.
/// Throws ValidationError if orphans survive reconciliation.
CleanseReport cleanse_staging(StagingArea& staging, const std::vector<CleanseRule>& rules, const FkPolicy& policy,
                              const std::string& timestamp = {});

}  // namespace uwh

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "uwh/schema.hpp"

namespace uwh {

enum class IndexKind { kHash, kOrdered };

std::string_view index_kind_name(IndexKind kind);
std::optional<IndexKind> index_kind_from_name(std::string_view name);

/// Secondary index over one relation: key tuple -> row ordinals.
///
/// Sidecar format: one line per entry, sorted by key then ordinal, each line
/// the key cells in the ingest CSV dialect, a TAB, and the decimal ordinal.
class Index {
 public:
  Index() = default;

  /// Throws ValidationError naming the key when `unique` and a tuple repeats.
  static Index build(const Table& relation, std::vector<std::string> columns, IndexKind kind, bool unique);
  /// Throws IntegrityError on malformed content or a duplicate in a unique index.
  static Index from_sidecar(std::string_view text, const TableSchema& schema, std::vector<std::string> columns,
                            IndexKind kind, bool unique);

  const std::string& relation() const { return relation_; }
  const std::vector<std::string>& columns() const { return columns_; }
  IndexKind kind() const { return kind_; }
  bool unique() const { return unique_; }
  std::size_t size() const { return entries_.size(); }

  /// Ascending ordinals of rows whose key equals `key`.
  std::vector<std::size_t> lookup(const KeyTuple& key) const;
  /// Ordered indexes only: rows with lo <= key <= hi, in key then ordinal order.
  std::vector<std::size_t> range(const KeyTuple& lo, const KeyTuple& hi) const;

  std::string to_sidecar() const;
  /// `<relation>.<col1+col2>.idx`
  std::string file_name() const;

  friend bool operator==(const Index& a, const Index& b) {
    return a.relation_ == b.relation_ && a.columns_ == b.columns_ && a.kind_ == b.kind_ && a.unique_ == b.unique_ &&
           a.entries_ == b.entries_;
  }

 private:
  void finish();

  std::string relation_;
  std::vector<std::string> columns_;
  IndexKind kind_ = IndexKind::kHash;
  bool unique_ = false;
  std::vector<std::pair<KeyTuple, std::size_t>> entries_;  // sorted
  std::unordered_map<KeyTuple, std::pair<std::size_t, std::size_t>, KeyTupleHash> spans_;  // [first, last) in entries_
};

std::string index_file_name(std::string_view relation, const std::vector<std::string>& columns);

}  // namespace uwh

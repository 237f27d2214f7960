#include "uwh/index.hpp"

#include <algorithm>

#include "uwh/csv.hpp"
#include "uwh/errors.hpp"

namespace uwh {

namespace {

bool key_less(const std::pair<KeyTuple, std::size_t>& a, const std::pair<KeyTuple, std::size_t>& b) {
  auto c = order_keys(a.first, b.first);
  if (c != 0) return c < 0;
  return a.second < b.second;
}

}  // namespace

std::string_view index_kind_name(IndexKind kind) { return kind == IndexKind::kHash ? "hash" : "ordered"; }

std::optional<IndexKind> index_kind_from_name(std::string_view name) {
  if (name == "hash") return IndexKind::kHash;
  if (name == "ordered") return IndexKind::kOrdered;
  return std::nullopt;
}

std::string index_file_name(std::string_view relation, const std::vector<std::string>& columns) {
  std::string out(relation);
  out += '.';
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += '+';
    out += columns[i];
  }
  return out + ".idx";
}

void Index::finish() {
  std::sort(entries_.begin(), entries_.end(), key_less);
  spans_.clear();
  for (std::size_t i = 0; i < entries_.size();) {
    std::size_t j = i + 1;
    while (j < entries_.size() && entries_[j].first == entries_[i].first) ++j;
    if (unique_ && j - i > 1) {
      throw ValidationError("duplicate key (" + format_key(entries_[i].first) + ") in unique index " + file_name());
    }
    spans_.emplace(entries_[i].first, std::make_pair(i, j));
    i = j;
  }
}

Index Index::build(const Table& relation, std::vector<std::string> columns, IndexKind kind, bool unique) {
  Index idx;
  idx.relation_ = relation.schema.name;
  idx.kind_ = kind;
  idx.unique_ = unique;
  std::vector<std::size_t> at;
  for (const auto& c : columns) {
    auto i = relation.schema.column_index(c);
    if (!i) throw ValidationError("cannot index unknown column " + relation.schema.name + "." + c);
    at.push_back(*i);
  }
  idx.columns_ = std::move(columns);
  idx.entries_.reserve(relation.rows.size());
  for (std::size_t r = 0; r < relation.rows.size(); ++r) idx.entries_.emplace_back(project(relation.rows[r], at), r);
  idx.finish();
  return idx;
}

Index Index::from_sidecar(std::string_view text, const TableSchema& schema, std::vector<std::string> columns,
                          IndexKind kind, bool unique) {
  Index idx;
  idx.relation_ = schema.name;
  idx.kind_ = kind;
  idx.unique_ = unique;
  std::vector<ValueType> types;
  for (const auto& c : columns) {
    const ColumnDef* def = schema.find_column(c);
    if (!def) throw IntegrityError("index " + index_file_name(schema.name, columns) + " names unknown column " + c);
    types.push_back(def->type);
  }
  idx.columns_ = std::move(columns);
  const std::string name = idx.file_name();
  std::size_t pos = 0;
  int line = 0;
  while (pos < text.size()) {
    ++line;
    // The key part may contain quoted TABs or newlines; find the separator outside quotes.
    bool quoted = false;
    std::size_t tab = pos;
    for (; tab < text.size(); ++tab) {
      char ch = text[tab];
      if (ch == '"') quoted = !quoted;
      if (!quoted && (ch == '\t' || ch == '\n')) break;
    }
    if (tab >= text.size() || text[tab] != '\t') throw IntegrityError(name + ": malformed entry " + std::to_string(line));
    std::size_t eol = text.find('\n', tab);
    if (eol == std::string_view::npos) throw IntegrityError(name + ": unterminated entry " + std::to_string(line));
    std::string_view ord = text.substr(tab + 1, eol - tab - 1);
    if (ord.empty() || !std::all_of(ord.begin(), ord.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw IntegrityError(name + ": bad ordinal on entry " + std::to_string(line));
    }
    csv::Document doc;
    try {
      doc = csv::parse(text.substr(pos, tab - pos));
    } catch (const ParseError&) {
      throw IntegrityError(name + ": malformed key on entry " + std::to_string(line));
    }
    if (tab == pos) doc.records = {csv::Record(1)};  // a lone Null key cell
    if (doc.records.size() != 1 || doc.records[0].size() != types.size()) {
      throw IntegrityError(name + ": wrong key arity on entry " + std::to_string(line));
    }
    KeyTuple key;
    for (std::size_t i = 0; i < types.size(); ++i) {
      const csv::Field& f = doc.records[0][i];
      if (f.is_null()) {
        key.push_back(Value::null());
        continue;
      }
      auto v = Value::parse_as(f.text, types[i]);
      if (!v) throw IntegrityError(name + ": bad key value on entry " + std::to_string(line));
      key.push_back(std::move(*v));
    }
    idx.entries_.emplace_back(std::move(key), std::stoull(std::string(ord)));
    pos = eol + 1;
  }
  if (!std::is_sorted(idx.entries_.begin(), idx.entries_.end(), key_less)) throw IntegrityError(name + ": entries not sorted");
  try {
    idx.finish();
  } catch (const ValidationError& e) {
    throw IntegrityError(e.what());
  }
  return idx;
}

std::vector<std::size_t> Index::lookup(const KeyTuple& key) const {
  std::vector<std::size_t> out;
  auto it = spans_.find(key);
  if (it == spans_.end()) return out;
  for (std::size_t i = it->second.first; i < it->second.second; ++i) out.push_back(entries_[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> Index::range(const KeyTuple& lo, const KeyTuple& hi) const {
  if (kind_ != IndexKind::kOrdered) throw ValidationError("range scan needs an ordered index: " + file_name());
  auto first = std::lower_bound(entries_.begin(), entries_.end(), lo,
                                [](const auto& e, const KeyTuple& k) { return order_keys(e.first, k) < 0; });
  std::vector<std::size_t> out;
  for (auto it = first; it != entries_.end() && order_keys(it->first, hi) <= 0; ++it) out.push_back(it->second);
  return out;
}

std::string Index::to_sidecar() const {
  std::string out;
  for (const auto& [key, ordinal] : entries_) {
    for (std::size_t i = 0; i < key.size(); ++i) {
      if (i) out += ',';
      csv::append_field(out, key[i].to_text());
    }
    out += '\t';
    out += std::to_string(ordinal);
    out += '\n';
  }
  return out;
}

std::string Index::file_name() const { return index_file_name(relation_, columns_); }

}  // namespace uwh

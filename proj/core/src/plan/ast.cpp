#include "uwh/plan/ast.hpp"

#include <sstream>

namespace uwh::plan {

Expr Expr::make_literal(Value v, SourcePos pos) {
  Expr e;
  e.kind = Kind::kLiteral;
  e.literal = std::move(v);
  e.pos = pos;
  return e;
}

Expr Expr::make_column(QualifiedColumn c) {
  Expr e;
  e.kind = Kind::kColumn;
  e.pos = c.pos;
  e.column = std::move(c);
  return e;
}

Expr Expr::make(Kind kind, std::vector<Expr> args, SourcePos pos) {
  Expr e;
  e.kind = kind;
  e.args = std::move(args);
  e.pos = pos;
  return e;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::kLiteral: return a.literal == b.literal;
    case Expr::Kind::kColumn: return a.column == b.column;
    case Expr::Kind::kCompare:
      if (a.op != b.op) return false;
      break;
    case Expr::Kind::kDifficulty:
      if (a.hi != b.hi || a.lo != b.lo) return false;
      break;
    default: break;
  }
  return a.args == b.args;
}

const Fact* Plan::fact() const {
  for (const auto& s : statements) {
    if (const auto* f = s.as<Fact>()) return f;
  }
  return nullptr;
}

std::vector<const Dimension*> Plan::dimensions() const {
  std::vector<const Dimension*> out;
  for (const auto& s : statements) {
    if (const auto* d = s.as<Dimension>()) out.push_back(d);
  }
  return out;
}

namespace {

std::string literal_source(const Value& v) {
  switch (v.type()) {
    case ValueType::kNull: return "NULL";
    case ValueType::kBoolean: return v.as_boolean() ? "TRUE" : "FALSE";
    case ValueType::kInteger: return std::to_string(v.as_integer());
    case ValueType::kDecimal: {
      std::string s = v.as_decimal().to_string();
      if (s.find('.') == std::string::npos) s += ".0";
      return s;
    }
    case ValueType::kDate: return "DATE '" + v.as_date().to_string() + "'";
    case ValueType::kText: {
      std::string out = "'";
      for (char c : v.as_text()) {
        if (c == '\'') out += '\'';
        out += c;
      }
      return out + "'";
    }
  }
  return "NULL";
}

}  // namespace

std::string to_source(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::kLiteral: return literal_source(e.literal);
    case Expr::Kind::kColumn: return e.column.to_string();
    case Expr::Kind::kCompare:
      return "(" + to_source(e.args[0]) + " " + std::string(compare_op_symbol(e.op)) + " " + to_source(e.args[1]) +
             ")";
    case Expr::Kind::kAnd: return "(" + to_source(e.args[0]) + " AND " + to_source(e.args[1]) + ")";
    case Expr::Kind::kOr: return "(" + to_source(e.args[0]) + " OR " + to_source(e.args[1]) + ")";
    case Expr::Kind::kNot: return "(NOT " + to_source(e.args[0]) + ")";
    case Expr::Kind::kCoalesce: return "COALESCE(" + to_source(e.args[0]) + ", " + to_source(e.args[1]) + ")";
    case Expr::Kind::kIsNull: return "IS_NULL(" + to_source(e.args[0]) + ")";
    case Expr::Kind::kPaidOnDue: return "PAID_ON_DUE(" + to_source(e.args[0]) + ", " + to_source(e.args[1]) + ")";
    case Expr::Kind::kDifficulty:
      return "DIFFICULTY(" + to_source(e.args[0]) + " GROUP BY " + to_source(e.args[1]) + " THRESHOLDS " +
             e.hi.to_string() + ", " + e.lo.to_string() + ")";
  }
  return "";
}

std::string to_source(const Statement& stmt) {
  std::ostringstream out;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DropTable>) {
          out << "DROP TABLE " << s.table;
        } else if constexpr (std::is_same_v<T, Merge>) {
          out << "MERGE ";
          for (std::size_t i = 0; i < s.sources.size(); ++i) out << (i ? ", " : "") << s.sources[i];
          out << " INTO " << s.target << " ON ";
          for (std::size_t i = 0; i < s.conditions.size(); ++i) {
            out << (i ? " AND " : "") << s.conditions[i].left.to_string() << " = " << s.conditions[i].right.to_string();
          }
          out << " KEEP ";
          for (std::size_t i = 0; i < s.keep.size(); ++i) out << (i ? ", " : "") << s.keep[i].to_string();
        } else if constexpr (std::is_same_v<T, AddColumn>) {
          out << "ADD COLUMN " << s.column.to_string() << ' ' << type_name(s.type) << " AS " << to_source(s.derivation);
        } else if constexpr (std::is_same_v<T, RemoveColumn>) {
          out << "REMOVE COLUMN " << s.column.to_string();
        } else if constexpr (std::is_same_v<T, Clean>) {
          out << "CLEAN " << s.column.to_string() << " WITH " << s.rule;
          if (!s.args.empty()) {
            out << '(';
            for (std::size_t i = 0; i < s.args.size(); ++i) out << (i ? ", " : "") << literal_source(s.args[i]);
            out << ')';
          }
        } else if constexpr (std::is_same_v<T, Fact>) {
          out << "FACT " << s.table;
        } else if constexpr (std::is_same_v<T, Dimension>) {
          out << "DIMENSION " << s.table << " KEY " << s.key;
        }
      },
      stmt.body);
  out << " ;";
  return out.str();
}

std::string to_source(const Plan& plan) {
  std::string out;
  for (const auto& s : plan.statements) out += to_source(s) + "\n";
  return out;
}

}  // namespace uwh::plan

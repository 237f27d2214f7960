#include "uwh/plan/parser.hpp"

#include <initializer_list>

#include "uwh/errors.hpp"

namespace uwh::plan {

namespace {

std::string describe(const Token& t) {
  switch (t.kind) {
    case TokenKind::kEnd: return "end of input";
    case TokenKind::kText: return "text literal '" + t.lexeme + "'";
    case TokenKind::kDate: return "date literal '" + t.lexeme + "'";
    case TokenKind::kIdentifier: return "identifier '" + t.lexeme + "'";
    default: return "'" + t.lexeme + "'";
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(tokenize(text)) {
    Token end;
    end.kind = TokenKind::kEnd;
    if (!tokens_.empty()) {
      end.line = tokens_.back().line;
      end.column = tokens_.back().column + static_cast<int>(tokens_.back().lexeme.size());
    }
    tokens_.push_back(end);
  }

  Plan plan() {
    Plan p;
    bool has_fact = false;
    while (peek().kind != TokenKind::kEnd) {
      const Token& start = peek();
      Statement s = statement();
      if (s.as<Fact>()) {
        if (has_fact) fail_at(start, "duplicate FACT declaration");
        has_fact = true;
      }
      p.statements.push_back(std::move(s));
    }
    return p;
  }

  Expr standalone_expression() {
    Expr e = expression();
    if (peek().kind != TokenKind::kEnd) fail({"end of input"});
    return e;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }
  const Token& next() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }

  [[noreturn]] void fail_at(const Token& t, const std::string& message) const {
    throw ParseError("line " + std::to_string(t.line) + ", column " + std::to_string(t.column) + ": " + message,
                     t.line, t.column);
  }

  [[noreturn]] void fail(std::initializer_list<std::string_view> expected) const {
    std::string msg = "expected ";
    if (expected.size() > 1) msg += "one of {";
    bool first = true;
    for (auto e : expected) {
      if (!first) msg += ", ";
      msg += e;
      first = false;
    }
    if (expected.size() > 1) msg += "}";
    msg += ", found " + describe(peek());
    fail_at(peek(), msg);
  }

  bool accept_keyword(std::string_view kw) {
    if (peek().is_keyword(kw)) {
      next();
      return true;
    }
    return false;
  }
  bool accept_symbol(std::string_view sym) {
    if (peek().is_symbol(sym)) {
      next();
      return true;
    }
    return false;
  }
  const Token& expect_keyword(std::string_view kw) {
    if (!peek().is_keyword(kw)) fail({kw});
    return next();
  }
  const Token& expect_symbol(std::string_view sym) {
    if (!peek().is_symbol(sym)) {
      std::string quoted = "'" + std::string(sym) + "'";
      fail({quoted});
    }
    return next();
  }
  std::string identifier() {
    if (peek().kind != TokenKind::kIdentifier) fail({"identifier"});
    return next().lexeme;
  }

  QualifiedColumn qcol() {
    QualifiedColumn q;
    q.pos = {peek().line, peek().column};
    q.table = identifier();
    expect_symbol(".");
    q.column = identifier();
    return q;
  }

  ValueType type() {
    for (std::string_view kw : {"INTEGER", "DECIMAL", "TEXT", "BOOLEAN", "DATE"}) {
      if (accept_keyword(kw)) return *type_from_name(kw);
    }
    fail({"INTEGER", "DECIMAL", "TEXT", "BOOLEAN", "DATE"});
  }

  Value number(bool negative) {
    const Token& t = next();
    std::string text = negative ? "-" + t.lexeme : t.lexeme;
    auto v = Value::parse_as(text, t.lexeme.find('.') == std::string::npos ? ValueType::kInteger
                                                                               : ValueType::kDecimal);
    if (!v) fail_at(t, "numeric literal out of range: " + t.lexeme);
    return *v;
  }

  Decimal decimal_literal() {
    bool negative = accept_symbol("-");
    if (peek().kind != TokenKind::kNumber) fail({"number literal"});
    const Token& t = next();
    auto d = Decimal::parse(negative ? "-" + t.lexeme : t.lexeme);
    if (!d) fail_at(t, "threshold is not a DECIMAL with at most 4 fractional digits: " + t.lexeme);
    return *d;
  }

  // literal := text | number | '-' number | date | DATE text | TRUE | FALSE | NULL
  bool at_literal() const {
    const Token& t = peek();
    return t.kind == TokenKind::kText || t.kind == TokenKind::kNumber || t.kind == TokenKind::kDate ||
           t.kind == TokenKind::kBool || t.kind == TokenKind::kNull || t.is_keyword("DATE") ||
           (t.is_symbol("-") && peek(1).kind == TokenKind::kNumber);
  }

  Value literal() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::kText: return Value::text(next().lexeme);
      case TokenKind::kNumber: return number(false);
      case TokenKind::kDate: return Value::date(*Date::parse_iso(next().lexeme));
      case TokenKind::kBool: return Value::boolean(next().lexeme == "TRUE");
      case TokenKind::kNull: next(); return Value::null();
      default: break;
    }
    if (t.is_symbol("-") && peek(1).kind == TokenKind::kNumber) {
      next();
      return number(true);
    }
    if (t.is_keyword("DATE")) {
      next();
      const Token& lit = peek();
      if (lit.kind == TokenKind::kDate) return Value::date(*Date::parse_iso(next().lexeme));
      if (lit.kind == TokenKind::kText) fail_at(lit, "invalid date literal '" + lit.lexeme + "' (expected 'YYYY-MM-DD')");
      fail({"date literal"});
    }
    fail({"literal"});
  }

  Statement statement() {
    const Token& start = peek();
    Statement s;
    s.pos = {start.line, start.column};
    if (accept_keyword("DROP")) {
      expect_keyword("TABLE");
      s.body = DropTable{identifier()};
    } else if (accept_keyword("MERGE")) {
      Merge m;
      m.sources.push_back(identifier());
      do {
        expect_symbol(",");
        m.sources.push_back(identifier());
      } while (peek().is_symbol(","));
      expect_keyword("INTO");
      m.target = identifier();
      expect_keyword("ON");
      do {
        JoinCondition c;
        c.left = qcol();
        expect_symbol("=");
        c.right = qcol();
        m.conditions.push_back(std::move(c));
      } while (accept_keyword("AND"));
      expect_keyword("KEEP");
      m.keep.push_back(qcol());
      while (accept_symbol(",")) m.keep.push_back(qcol());
      s.body = std::move(m);
    } else if (accept_keyword("ADD")) {
      expect_keyword("COLUMN");
      AddColumn a;
      a.column = qcol();
      a.type = type();
      expect_keyword("AS");
      a.derivation = expression();
      s.body = std::move(a);
    } else if (accept_keyword("REMOVE")) {
      expect_keyword("COLUMN");
      s.body = RemoveColumn{qcol()};
    } else if (accept_keyword("CLEAN")) {
      Clean c;
      c.column = qcol();
      expect_keyword("WITH");
      c.rule = identifier();
      if (accept_symbol("(")) {
        if (!at_literal()) fail({"literal"});
        c.args.push_back(literal());
        while (accept_symbol(",")) {
          if (!at_literal()) fail({"literal"});
          c.args.push_back(literal());
        }
        expect_symbol(")");
      }
      s.body = std::move(c);
    } else if (accept_keyword("FACT")) {
      s.body = Fact{identifier()};
    } else if (accept_keyword("DIMENSION")) {
      Dimension d;
      d.table = identifier();
      expect_keyword("KEY");
      d.key = identifier();
      s.body = std::move(d);
    } else {
      fail({"DROP", "MERGE", "ADD", "REMOVE", "CLEAN", "FACT", "DIMENSION"});
    }
    expect_symbol(";");
    return s;
  }

  Expr expression() {
    Expr lhs = conjunction();
    while (peek().is_keyword("OR")) {
      SourcePos pos{peek().line, peek().column};
      next();
      lhs = Expr::make(Expr::Kind::kOr, {std::move(lhs), conjunction()}, pos);
    }
    return lhs;
  }

  Expr conjunction() {
    Expr lhs = negation();
    while (peek().is_keyword("AND")) {
      SourcePos pos{peek().line, peek().column};
      next();
      lhs = Expr::make(Expr::Kind::kAnd, {std::move(lhs), negation()}, pos);
    }
    return lhs;
  }

  Expr negation() {
    if (peek().is_keyword("NOT")) {
      SourcePos pos{peek().line, peek().column};
      next();
      return Expr::make(Expr::Kind::kNot, {negation()}, pos);
    }
    return comparison();
  }

  Expr comparison() {
    Expr lhs = primary();
    static constexpr std::pair<std::string_view, CompareOp> kOps[] = {
        {"=", CompareOp::kEq}, {"<>", CompareOp::kNe}, {"<", CompareOp::kLt},
        {"<=", CompareOp::kLe}, {">", CompareOp::kGt}, {">=", CompareOp::kGe}};
    for (const auto& [sym, op] : kOps) {
      if (peek().is_symbol(sym)) {
        SourcePos pos{peek().line, peek().column};
        next();
        Expr e = Expr::make(Expr::Kind::kCompare, {std::move(lhs), primary()}, pos);
        e.op = op;
        return e;
      }
    }
    return lhs;
  }

  Expr primary() {
    const Token& t = peek();
    SourcePos pos{t.line, t.column};
    if (accept_symbol("(")) {
      Expr e = expression();
      expect_symbol(")");
      return e;
    }
    if (accept_keyword("COALESCE")) {
      expect_symbol("(");
      Expr a = expression();
      expect_symbol(",");
      Expr b = expression();
      expect_symbol(")");
      return Expr::make(Expr::Kind::kCoalesce, {std::move(a), std::move(b)}, pos);
    }
    if (accept_keyword("IS_NULL")) {
      expect_symbol("(");
      Expr a = expression();
      expect_symbol(")");
      return Expr::make(Expr::Kind::kIsNull, {std::move(a)}, pos);
    }
    if (accept_keyword("PAID_ON_DUE")) {
      expect_symbol("(");
      Expr p = Expr::make_column(qcol());
      expect_symbol(",");
      Expr d = Expr::make_column(qcol());
      expect_symbol(")");
      return Expr::make(Expr::Kind::kPaidOnDue, {std::move(p), std::move(d)}, pos);
    }
    if (accept_keyword("DIFFICULTY")) {
      expect_symbol("(");
      Expr grade = Expr::make_column(qcol());
      expect_keyword("GROUP");
      expect_keyword("BY");
      Expr group = Expr::make_column(qcol());
      expect_keyword("THRESHOLDS");
      Decimal hi = decimal_literal();
      expect_symbol(",");
      Decimal lo = decimal_literal();
      expect_symbol(")");
      Expr e = Expr::make(Expr::Kind::kDifficulty, {std::move(grade), std::move(group)}, pos);
      e.hi = hi;
      e.lo = lo;
      return e;
    }
    if (t.kind == TokenKind::kIdentifier) return Expr::make_column(qcol());
    if (at_literal()) return Expr::make_literal(literal(), pos);
    fail({"literal", "column reference", "'('", "NOT", "COALESCE", "IS_NULL", "PAID_ON_DUE", "DIFFICULTY"});
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

Plan parse_plan(std::string_view text) { return Parser(text).plan(); }

Expr parse_expression(std::string_view text) { return Parser(text).standalone_expression(); }

}  // namespace uwh::plan

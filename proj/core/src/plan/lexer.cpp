#include "uwh/plan/lexer.hpp"

#include <array>

#include "uwh/errors.hpp"
#include "uwh/value.hpp"

namespace uwh::plan {

namespace {

constexpr std::array<std::string_view, 30> kKeywords = {
    "DROP",   "TABLE",   "MERGE",      "INTO",    "ON",       "AND",         "OR",         "NOT",
    "KEEP",   "ADD",     "COLUMN",     "AS",      "REMOVE",   "CLEAN",       "WITH",       "FACT",
    "DIMENSION", "KEY",  "INTEGER",    "DECIMAL", "TEXT",     "BOOLEAN",     "DATE",       "COALESCE",
    "IS_NULL", "PAID_ON_DUE", "DIFFICULTY", "GROUP", "BY",    "THRESHOLDS"};

bool ident_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 32);
  }
  return out;
}

}  // namespace

std::string_view token_kind_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::kKeyword: return "keyword";
    case TokenKind::kIdentifier: return "identifier";
    case TokenKind::kText: return "text literal";
    case TokenKind::kNumber: return "number literal";
    case TokenKind::kDate: return "date literal";
    case TokenKind::kBool: return "boolean literal";
    case TokenKind::kNull: return "NULL";
    case TokenKind::kSymbol: return "symbol";
    case TokenKind::kEnd: return "end of input";
  }
  return "?";
}

bool is_keyword(std::string_view up) {
  for (auto kw : kKeywords) {
    if (kw == up) return true;
  }
  return false;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;
  const std::size_t n = text.size();
  auto advance = [&](std::size_t k) {
    for (std::size_t j = 0; j < k && i < n; ++j, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < n) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < n && text[i + 1] == '-') {
      while (i < n && text[i] != '\n') advance(1);
      continue;
    }
    Token tok;
    tok.line = line;
    tok.column = col;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < n && ident_char(text[j])) ++j;
      std::string_view word = text.substr(i, j - i);
      std::string up = upper(word);
      if (up == "TRUE" || up == "FALSE") {
        tok.kind = TokenKind::kBool;
        tok.lexeme = up;
      } else if (up == "NULL") {
        tok.kind = TokenKind::kNull;
        tok.lexeme = up;
      } else if (is_keyword(up)) {
        tok.kind = TokenKind::kKeyword;
        tok.lexeme = up;
      } else {
        tok.kind = TokenKind::kIdentifier;
        tok.lexeme = std::string(word);
      }
      advance(j - i);
    } else if (digit(c)) {
      std::size_t j = i;
      while (j < n && digit(text[j])) ++j;
      if (j + 1 < n && text[j] == '.' && digit(text[j + 1])) {
        ++j;
        while (j < n && digit(text[j])) ++j;
      }
      tok.kind = TokenKind::kNumber;
      tok.lexeme = std::string(text.substr(i, j - i));
      advance(j - i);
    } else if (c == '\'') {
      std::string value;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < n) {
        if (text[j] == '\'') {
          if (j + 1 < n && text[j + 1] == '\'') {
            value += '\'';
            j += 2;
            continue;
          }
          closed = true;
          ++j;
          break;
        }
        value += text[j++];
      }
      if (!closed) {
        throw ParseError("line " + std::to_string(tok.line) + ", column " + std::to_string(tok.column) +
                             ": unterminated string literal",
                         tok.line, tok.column);
      }
      tok.kind = Date::parse_iso(value) ? TokenKind::kDate : TokenKind::kText;
      tok.lexeme = std::move(value);
      advance(j - i);
    } else {
      std::string_view two = i + 1 < n ? text.substr(i, 2) : std::string_view();
      if (two == "<>" || two == "<=" || two == ">=") {
        tok.kind = TokenKind::kSymbol;
        tok.lexeme = std::string(two);
        advance(2);
      } else if (std::string_view(";,.()=<>-").find(c) != std::string_view::npos) {
        tok.kind = TokenKind::kSymbol;
        tok.lexeme = std::string(1, c);
        advance(1);
      } else {
        std::string shown = (static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) >= 0x7f)
                                ? "byte " + std::to_string(static_cast<unsigned char>(c))
                                : std::string("'") + c + "'";
        throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(col) +
                             ": illegal character " + shown,
                         line, col);
      }
    }
    out.push_back(std::move(tok));
  }
  return out;
}

}  // namespace uwh::plan

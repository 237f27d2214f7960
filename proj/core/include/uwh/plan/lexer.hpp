#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace uwh::plan {

enum class TokenKind {
  kKeyword,
  kIdentifier,
  kText,
  kNumber,
  kDate,
  kBool,
  kNull,
  kSymbol,
  kEnd,
};

std::string_view token_kind_name(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::kEnd;
  std::string lexeme;  // keywords are upper-cased; text literals are unescaped
  int line = 1;        // 1-based position of the lexeme's first byte
  int column = 1;

  bool is(TokenKind k, std::string_view text) const { return kind == k && lexeme == text; }
  bool is_keyword(std::string_view kw) const { return is(TokenKind::kKeyword, kw); }
  bool is_symbol(std::string_view sym) const { return is(TokenKind::kSymbol, sym); }
};

bool is_keyword(std::string_view upper);

/// Throws ParseError on an unterminated string or illegal character. The
/// returned list has no trailing end token.
std::vector<Token> tokenize(std::string_view text);

}  // namespace uwh::plan

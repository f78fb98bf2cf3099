// Tokens of the BASCOM-style firmware dialect. Statements are line oriented,
// so line breaks are tokens; other whitespace and ' comments are dropped.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace clocksim::basic {

enum class TokenKind {
  Keyword,     // lexeme case-folded to lower case
  Identifier,  // lexeme case-folded to lower case
  PinRef,      // P<port>.<bit>, port 0-3, bit 0-7
  Integer,     // decimal, &H hex or &B binary; value in `value`
  String,      // "..." for Lcd; lexeme is the unquoted text
  Operator,    // = <> < > + - , ; ( )
  EndOfLine,
  EndOfFile,
};

struct PinRef {
  int port = 0;
  int bit = 0;

  friend auto operator<=>(const PinRef&, const PinRef&) = default;
};

struct Token {
  TokenKind kind = TokenKind::EndOfFile;
  std::string lexeme;
  std::int32_t value = 0;
  PinRef pin{};
  int line = 1;
  int column = 1;

  bool is_keyword(std::string_view kw) const { return kind == TokenKind::Keyword && lexeme == kw; }
  bool is_op(std::string_view op) const { return kind == TokenKind::Operator && lexeme == op; }
};

bool is_keyword(std::string_view folded);

/// Throws BasicError(LexError) on characters outside the dialect.
std::vector<Token> tokenize(std::string_view source);

}  // namespace clocksim::basic

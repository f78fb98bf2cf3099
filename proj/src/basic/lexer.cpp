#include "clocksim/basic/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "clocksim/basic/error.hpp"

namespace clocksim::basic {
namespace {

constexpr std::array<std::string_view, 16> kKeywords = {
    "if",  "then", "else", "end",    "do",         "loop", "exit",   "incr",
    "decr", "lcd", "locate", "deflcdchar", "cls", "waitms", "scan", "chr",
};

constexpr std::int32_t kMaxLiteral = 65535;

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::string fold(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else if (c == '\'') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == '\n') {
        emit(TokenKind::EndOfLine, "\n");
        advance();
        ++line_;
        col_ = 1;
      } else if (pin_ahead()) {
        lex_pin();
      } else if (ident_start(c)) {
        lex_word();
      } else if (digit(c)) {
        lex_decimal();
      } else if (c == '&') {
        lex_radix();
      } else if (c == '"') {
        lex_string();
      } else {
        lex_operator();
      }
    }
    emit(TokenKind::EndOfFile, "");
    return std::move(tokens_);
  }

 private:
  char peek(std::size_t ahead = 0) const { return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0'; }
  void advance(std::size_t n = 1) {
    pos_ += n;
    col_ += static_cast<int>(n);
  }

  [[noreturn]] void fail(const std::string& msg) const { throw BasicError(BasicErrc::LexError, msg, line_, col_); }

  Token& emit(TokenKind kind, std::string lexeme) {
    Token t;
    t.kind = kind;
    t.lexeme = std::move(lexeme);
    t.line = line_;
    t.column = col_;
    return tokens_.emplace_back(std::move(t));
  }

  // P<digit>.<digit> not followed by more word characters.
  bool pin_ahead() const {
    return (peek() == 'P' || peek() == 'p') && digit(peek(1)) && peek(2) == '.' && digit(peek(3)) &&
           !ident_char(peek(4));
  }

  void lex_pin() {
    const int port = peek(1) - '0';
    const int bit = peek(3) - '0';
    if (port > 3) fail("port P" + std::to_string(port) + " does not exist (P0-P3)");
    if (bit > 7) fail("bit " + std::to_string(bit) + " out of range (0-7)");
    Token& t = emit(TokenKind::PinRef, "P" + std::to_string(port) + "." + std::to_string(bit));
    t.pin = {port, bit};
    advance(4);
  }

  void lex_word() {
    const std::size_t start = pos_;
    const int col = col_;
    while (ident_char(peek())) advance();
    std::string word = fold(src_.substr(start, pos_ - start));
    const TokenKind kind = is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier;
    Token& t = emit(kind, std::move(word));
    t.column = col;
  }

  void push_integer(std::int64_t value, std::size_t start, int col) {
    Token& t = emit(TokenKind::Integer, std::string(src_.substr(start, pos_ - start)));
    t.value = static_cast<std::int32_t>(value);
    t.column = col;
  }

  void lex_decimal() {
    const std::size_t start = pos_;
    const int col = col_;
    std::int64_t v = 0;
    while (digit(peek())) {
      v = v * 10 + (peek() - '0');
      if (v > kMaxLiteral) fail("integer literal too large");
      advance();
    }
    if (ident_char(peek())) fail(std::string("unexpected '") + peek() + "' after number");
    push_integer(v, start, col);
  }

  void lex_radix() {
    const std::size_t start = pos_;
    const int col = col_;
    const char r = static_cast<char>(std::tolower(static_cast<unsigned char>(peek(1))));
    if (r != 'h' && r != 'b') fail("expected &H or &B");
    advance(2);
    const int base = r == 'h' ? 16 : 2;
    std::int64_t v = 0;
    int n = 0;
    for (;; ++n) {
      const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(peek())));
      int d = -1;
      if (digit(c)) d = c - '0';
      if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
      if (d < 0 || d >= base) break;
      v = v * base + d;
      if (v > kMaxLiteral) fail("integer literal too large");
      advance();
    }
    if (n == 0) fail("missing digits after &" + std::string(1, static_cast<char>(std::toupper(r))));
    if (ident_char(peek())) fail(std::string("unexpected '") + peek() + "' after number");
    push_integer(v, start, col);
  }

  void lex_string() {
    const int col = col_;
    advance();
    std::string text;
    while (peek() != '"') {
      if (pos_ >= src_.size() || peek() == '\n') fail("unterminated string");
      text += peek();
      advance();
    }
    advance();
    Token& t = emit(TokenKind::String, std::move(text));
    t.column = col;
  }

  void lex_operator() {
    const char c = peek();
    if (c == '<' && peek(1) == '>') {
      emit(TokenKind::Operator, "<>");
      advance(2);
      return;
    }
    constexpr std::string_view kSingle = "=<>+-,;()";
    if (kSingle.find(c) == std::string_view::npos || c == '\0') {
      fail(std::string("illegal character '") + c + "'");
    }
    emit(TokenKind::Operator, std::string(1, c));
    advance();
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  std::vector<Token> tokens_;
};

}  // namespace

bool is_keyword(std::string_view folded) {
  return std::find(kKeywords.begin(), kKeywords.end(), folded) != kKeywords.end();
}

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace clocksim::basic

#pragma once

#include <stdexcept>
#include <string>

namespace clocksim::basic {

enum class BasicErrc {
  LexError,
  UnterminatedIf,
  UnterminatedDo,
  ExitOutsideLoop,
  MalformedStatement,
  FuelExhausted,
  UndefinedPinPort,
  BadArgument,
};

std::string_view to_string(BasicErrc code);

/// Lex, parse and runtime failures. `line`/`column` are 1-based, 0 if unknown.
class BasicError : public std::runtime_error {
 public:
  BasicError(BasicErrc code, const std::string& message, int line = 0, int column = 0);

  BasicErrc code() const noexcept { return code_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }

 private:
  BasicErrc code_;
  int line_;
  int column_;
  std::string message_;
};

}  // namespace clocksim::basic

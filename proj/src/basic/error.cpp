#include "clocksim/basic/error.hpp"

namespace clocksim::basic {

std::string_view to_string(BasicErrc code) {
  switch (code) {
    case BasicErrc::LexError: return "LexError";
    case BasicErrc::UnterminatedIf: return "UnterminatedIf";
    case BasicErrc::UnterminatedDo: return "UnterminatedDo";
    case BasicErrc::ExitOutsideLoop: return "ExitOutsideLoop";
    case BasicErrc::MalformedStatement: return "MalformedStatement";
    case BasicErrc::FuelExhausted: return "FuelExhausted";
    case BasicErrc::UndefinedPinPort: return "UndefinedPinPort";
    case BasicErrc::BadArgument: return "BadArgument";
  }
  return "?";
}

BasicError::BasicError(BasicErrc code, const std::string& message, int line, int column)
    : std::runtime_error(std::string(to_string(code)) +
                         (line > 0 ? " at line " + std::to_string(line) +
                                         (column > 0 ? ":" + std::to_string(column) : std::string())
                                   : std::string()) +
                         ": " + message),
      code_(code),
      line_(line),
      column_(column),
      message_(message) {}

}  // namespace clocksim::basic

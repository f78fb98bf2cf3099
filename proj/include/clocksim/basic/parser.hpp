#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "clocksim/basic/ast.hpp"
#include "clocksim/basic/lexer.hpp"

namespace clocksim::basic {

/// Recursive descent over the line-oriented grammar. Throws BasicError with
/// UnterminatedIf, UnterminatedDo, ExitOutsideLoop or MalformedStatement.
Program parse(const std::vector<Token>& tokens);

/// tokenize + parse.
Program parse_source(std::string_view source);
Program load_program(const std::string& path);

/// Canonical source text: one-space indentation per block level, keywords in
/// BASCOM capitalisation, identifiers with a leading capital.
std::string print(const Program& program);
std::string print(const Expr& expr);

}  // namespace clocksim::basic

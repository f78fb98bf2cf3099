// Syntax tree for the firmware dialect. Equality is structural and ignores
// source positions, so a pretty-printed program can be compared with the
// original after re-parsing.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "clocksim/basic/lexer.hpp"

namespace clocksim::basic {

struct Expr {
  enum class Kind : std::uint8_t { Literal, Variable, Pin, Negate, Binary };
  // Binary operators; comparisons yield 0 or 1.
  enum class Op : std::uint8_t { Add, Sub, Eq, Ne, Lt, Gt };

  Kind kind = Kind::Literal;
  std::int32_t value = 0;     // Literal
  std::string name;           // Variable (case-folded)
  PinRef pin{};               // Pin
  Op op = Op::Add;            // Binary
  std::vector<Expr> operands;  // Negate: 1, Binary: 2

  static Expr literal(std::int32_t v);
  static Expr variable(std::string name);
  static Expr pin_ref(PinRef p);
  static Expr negate(Expr e);
  static Expr binary(Op op, Expr lhs, Expr rhs);

  friend bool operator==(const Expr&, const Expr&) = default;
};

/// One item of an Lcd statement: text, a number printed in decimal, or a
/// raw character code via Chr().
struct LcdArg {
  enum class Kind : std::uint8_t { Text, Number, Char };
  Kind kind = Kind::Text;
  std::string text;
  Expr expr;

  friend bool operator==(const LcdArg&, const LcdArg&) = default;
};

struct Stmt;
using Block = std::vector<Stmt>;

struct Assign {
  std::string name;
  Expr value;
  friend bool operator==(const Assign&, const Assign&) = default;
};
struct Incr {
  std::string name;
  friend bool operator==(const Incr&, const Incr&) = default;
};
struct Decr {
  std::string name;
  friend bool operator==(const Decr&, const Decr&) = default;
};
struct If {
  Expr cond;
  Block then_block;
  bool has_else = false;
  Block else_block;
  friend bool operator==(const If&, const If&);
};
struct DoLoop {
  Block body;
  friend bool operator==(const DoLoop&, const DoLoop&);
};
struct ExitLoop {
  friend bool operator==(const ExitLoop&, const ExitLoop&) = default;
};
/// Explicit yield point; every Do/Loop iteration has an implicit one.
struct Scan {
  friend bool operator==(const Scan&, const Scan&) = default;
};
struct LcdPrint {
  std::vector<LcdArg> args;
  friend bool operator==(const LcdPrint&, const LcdPrint&) = default;
};
/// Locate row, col (1-based, as in BASCOM).
struct LcdLocate {
  Expr row;
  Expr col;
  friend bool operator==(const LcdLocate&, const LcdLocate&) = default;
};
struct DefChar {
  Expr slot;
  std::array<Expr, 8> rows;
  friend bool operator==(const DefChar&, const DefChar&) = default;
};
struct Cls {
  friend bool operator==(const Cls&, const Cls&) = default;
};
struct Waitms {
  Expr ms;
  friend bool operator==(const Waitms&, const Waitms&) = default;
};

struct Stmt {
  using Node = std::variant<Assign, Incr, Decr, If, DoLoop, ExitLoop, Scan, LcdPrint, LcdLocate, DefChar, Cls, Waitms>;

  Node node;
  int line = 0;

  friend bool operator==(const Stmt& a, const Stmt& b) { return a.node == b.node; }
};

inline bool operator==(const If& a, const If& b) {
  return a.cond == b.cond && a.then_block == b.then_block && a.has_else == b.has_else &&
         a.else_block == b.else_block;
}
inline bool operator==(const DoLoop& a, const DoLoop& b) { return a.body == b.body; }

struct Program {
  Block body;
  friend bool operator==(const Program&, const Program&) = default;
};

}  // namespace clocksim::basic

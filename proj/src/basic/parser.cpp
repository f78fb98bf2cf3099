#include "clocksim/basic/parser.hpp"

#include <fstream>
#include <sstream>

#include "clocksim/basic/error.hpp"

namespace clocksim::basic {

Expr Expr::literal(std::int32_t v) {
  Expr e;
  e.kind = Kind::Literal;
  e.value = v;
  return e;
}

Expr Expr::variable(std::string n) {
  Expr e;
  e.kind = Kind::Variable;
  e.name = std::move(n);
  return e;
}

Expr Expr::pin_ref(PinRef p) {
  Expr e;
  e.kind = Kind::Pin;
  e.pin = p;
  return e;
}

Expr Expr::negate(Expr inner) {
  Expr e;
  e.kind = Kind::Negate;
  e.operands.push_back(std::move(inner));
  return e;
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  Expr e;
  e.kind = Kind::Binary;
  e.op = op;
  e.operands.push_back(std::move(lhs));
  e.operands.push_back(std::move(rhs));
  return e;
}

namespace {

constexpr std::int32_t kInt16Min = -32768;
constexpr std::int32_t kInt16Max = 32767;

class Parser {
 public:
  explicit Parser(const std::vector<Token>& tokens) : toks_(tokens) {}

  Program run() {
    Program p;
    p.body = block();
    const Token& t = cur();
    if (t.kind != TokenKind::EndOfFile) {
      // A terminator with nothing open.
      std::string what = t.lexeme == "end" ? "End If" : t.lexeme == "loop" ? "Loop" : "Else";
      fail(BasicErrc::MalformedStatement, what + " without a matching opener", t);
    }
    return p;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(BasicErrc code, const std::string& msg, const Token& at) const {
    throw BasicError(code, msg, at.line, at.column);
  }

  bool at_terminator() const {
    const Token& t = cur();
    return t.kind == TokenKind::EndOfFile || t.is_keyword("else") || t.is_keyword("end") || t.is_keyword("loop");
  }

  void expect_eol(const char* after) {
    const Token& t = cur();
    if (t.kind == TokenKind::EndOfLine) {
      ++pos_;
      return;
    }
    if (t.kind == TokenKind::EndOfFile) return;
    fail(BasicErrc::MalformedStatement, std::string("unexpected '") + t.lexeme + "' after " + after, t);
  }

  void expect_op(std::string_view op, const char* context) {
    const Token& t = cur();
    if (!t.is_op(op)) {
      fail(BasicErrc::MalformedStatement, "expected '" + std::string(op) + "' in " + context, t);
    }
    ++pos_;
  }

  Block block() {
    Block b;
    for (;;) {
      while (cur().kind == TokenKind::EndOfLine) ++pos_;
      if (at_terminator()) return b;
      b.push_back(statement());
    }
  }

  Stmt statement() {
    const Token& t = cur();
    Stmt s;
    s.line = t.line;
    if (t.kind == TokenKind::Identifier) {
      ++pos_;
      expect_op("=", "assignment");
      s.node = Assign{t.lexeme, expr()};
      expect_eol("assignment");
      return s;
    }
    if (t.kind != TokenKind::Keyword) {
      fail(BasicErrc::MalformedStatement, "statement cannot start with '" + t.lexeme + "'", t);
    }
    ++pos_;
    const std::string& kw = t.lexeme;
    if (kw == "if") {
      s.node = if_statement(t);
      return s;
    }
    if (kw == "do") {
      s.node = do_statement(t);
      return s;
    }
    if (kw == "exit") {
      if (!cur().is_keyword("loop")) fail(BasicErrc::MalformedStatement, "expected Exit Loop", cur());
      if (loop_depth_ == 0) fail(BasicErrc::ExitOutsideLoop, "Exit Loop outside Do ... Loop", t);
      ++pos_;
      s.node = ExitLoop{};
    } else if (kw == "incr" || kw == "decr") {
      const Token& name = cur();
      if (name.kind != TokenKind::Identifier) {
        fail(BasicErrc::MalformedStatement, "expected a variable after " + kw, name);
      }
      ++pos_;
      if (kw == "incr") {
        s.node = Incr{name.lexeme};
      } else {
        s.node = Decr{name.lexeme};
      }
    } else if (kw == "lcd") {
      s.node = lcd_print();
    } else if (kw == "locate") {
      LcdLocate loc;
      loc.row = expr();
      expect_op(",", "Locate");
      loc.col = expr();
      s.node = std::move(loc);
    } else if (kw == "deflcdchar") {
      DefChar def;
      def.slot = expr();
      for (auto& row : def.rows) {
        expect_op(",", "Deflcdchar (slot followed by 8 row values)");
        row = expr();
      }
      s.node = std::move(def);
    } else if (kw == "cls") {
      s.node = Cls{};
    } else if (kw == "scan") {
      s.node = Scan{};
    } else if (kw == "waitms") {
      s.node = Waitms{expr()};
    } else {
      fail(BasicErrc::MalformedStatement, "unexpected keyword '" + kw + "'", t);
    }
    expect_eol(kw.c_str());
    return s;
  }

  If if_statement(const Token& opener) {
    If node;
    node.cond = expr();
    if (!cur().is_keyword("then")) fail(BasicErrc::MalformedStatement, "expected Then", cur());
    ++pos_;
    if (cur().kind != TokenKind::EndOfLine) {
      fail(BasicErrc::MalformedStatement, "statements after Then must start on a new line", cur());
    }
    node.then_block = block();
    if (cur().is_keyword("else")) {
      ++pos_;
      expect_eol("Else");
      node.has_else = true;
      node.else_block = block();
    }
    if (!cur().is_keyword("end")) {
      fail(BasicErrc::UnterminatedIf, "If on line " + std::to_string(opener.line) + " has no End If", opener);
    }
    ++pos_;
    if (!cur().is_keyword("if")) fail(BasicErrc::MalformedStatement, "expected End If", cur());
    ++pos_;
    expect_eol("End If");
    return node;
  }

  DoLoop do_statement(const Token& opener) {
    expect_eol("Do");
    ++loop_depth_;
    DoLoop node{block()};
    --loop_depth_;
    if (!cur().is_keyword("loop")) {
      fail(BasicErrc::UnterminatedDo, "Do on line " + std::to_string(opener.line) + " has no Loop", opener);
    }
    ++pos_;
    expect_eol("Loop");
    return node;
  }

  LcdPrint lcd_print() {
    LcdPrint p;
    do {
      LcdArg arg;
      const Token& t = cur();
      if (t.kind == TokenKind::String) {
        ++pos_;
        arg.kind = LcdArg::Kind::Text;
        arg.text = t.lexeme;
      } else if (t.is_keyword("chr")) {
        ++pos_;
        expect_op("(", "Chr()");
        arg.kind = LcdArg::Kind::Char;
        arg.expr = expr();
        expect_op(")", "Chr()");
      } else {
        arg.kind = LcdArg::Kind::Number;
        arg.expr = expr();
      }
      p.args.push_back(std::move(arg));
    } while (cur().is_op(";") && (++pos_, true));
    return p;
  }

  Expr expr() {
    Expr lhs = additive();
    const Token& t = cur();
    Expr::Op op;
    if (t.is_op("=")) {
      op = Expr::Op::Eq;
    } else if (t.is_op("<>")) {
      op = Expr::Op::Ne;
    } else if (t.is_op("<")) {
      op = Expr::Op::Lt;
    } else if (t.is_op(">")) {
      op = Expr::Op::Gt;
    } else {
      return lhs;
    }
    ++pos_;
    return Expr::binary(op, std::move(lhs), additive());
  }

  Expr additive() {
    Expr lhs = unary();
    while (cur().is_op("+") || cur().is_op("-")) {
      const Expr::Op op = next().lexeme == "+" ? Expr::Op::Add : Expr::Op::Sub;
      lhs = Expr::binary(op, std::move(lhs), unary());
    }
    return lhs;
  }

  Expr unary() {
    if (!cur().is_op("-")) return primary();
    const Token& minus = next();
    if (cur().kind == TokenKind::Integer) {
      // -32768 is only reachable this way.
      const std::int32_t v = -next().value;
      check_range(v, minus);
      return Expr::literal(v);
    }
    Expr inner = unary();
    if (inner.kind == Expr::Kind::Literal) {
      inner.value = -inner.value;
      check_range(inner.value, minus);
      return inner;
    }
    return Expr::negate(std::move(inner));
  }

  void check_range(std::int32_t v, const Token& at) const {
    if (v < kInt16Min || v > kInt16Max) {
      fail(BasicErrc::MalformedStatement, "integer " + std::to_string(v) + " does not fit a 16-bit Integer", at);
    }
  }

  Expr primary() {
    const Token& t = cur();
    switch (t.kind) {
      case TokenKind::Integer:
        ++pos_;
        check_range(t.value, t);
        return Expr::literal(t.value);
      case TokenKind::Identifier:
        ++pos_;
        return Expr::variable(t.lexeme);
      case TokenKind::PinRef:
        ++pos_;
        return Expr::pin_ref(t.pin);
      default:
        break;
    }
    if (t.is_op("(")) {
      ++pos_;
      Expr inner = expr();
      expect_op(")", "expression");
      return inner;
    }
    const std::string what = t.kind == TokenKind::EndOfLine ? "end of line" : "'" + t.lexeme + "'";
    fail(BasicErrc::MalformedStatement, "expected an expression, got " + what, t);
  }

  const std::vector<Token>& toks_;
  std::size_t pos_ = 0;
  int loop_depth_ = 0;
};

// Printing ------------------------------------------------------------------

int precedence(const Expr& e) {
  if (e.kind == Expr::Kind::Binary) {
    return e.op == Expr::Op::Add || e.op == Expr::Op::Sub ? 2 : 1;
  }
  if (e.kind == Expr::Kind::Negate) return 3;
  return 4;
}

std::string_view op_text(Expr::Op op) {
  switch (op) {
    case Expr::Op::Add: return "+";
    case Expr::Op::Sub: return "-";
    case Expr::Op::Eq: return "=";
    case Expr::Op::Ne: return "<>";
    case Expr::Op::Lt: return "<";
    case Expr::Op::Gt: return ">";
  }
  return "?";
}

std::string display_name(const std::string& folded) {
  std::string s = folded;
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string print_operand(const Expr& e, int min_prec) {
  std::string s = print(e);
  return precedence(e) < min_prec ? "(" + s + ")" : s;
}

void print_block(const Block& block, int depth, std::string& out);

void print_stmt(const Stmt& stmt, int depth, std::string& out) {
  const std::string indent(depth, ' ');
  auto line = [&](const std::string& text) { out += indent + text + '\n'; };
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Assign>) {
          line(display_name(n.name) + " = " + print(n.value));
        } else if constexpr (std::is_same_v<T, Incr>) {
          line("Incr " + display_name(n.name));
        } else if constexpr (std::is_same_v<T, Decr>) {
          line("Decr " + display_name(n.name));
        } else if constexpr (std::is_same_v<T, If>) {
          line("If " + print(n.cond) + " Then");
          print_block(n.then_block, depth + 1, out);
          if (n.has_else) {
            line("Else");
            print_block(n.else_block, depth + 1, out);
          }
          line("End If");
        } else if constexpr (std::is_same_v<T, DoLoop>) {
          line("Do");
          print_block(n.body, depth + 1, out);
          line("Loop");
        } else if constexpr (std::is_same_v<T, ExitLoop>) {
          line("Exit Loop");
        } else if constexpr (std::is_same_v<T, Scan>) {
          line("Scan");
        } else if constexpr (std::is_same_v<T, LcdPrint>) {
          std::string text = "Lcd ";
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i > 0) text += " ; ";
            const LcdArg& a = n.args[i];
            switch (a.kind) {
              case LcdArg::Kind::Text: text += '"' + a.text + '"'; break;
              case LcdArg::Kind::Number: text += print(a.expr); break;
              case LcdArg::Kind::Char: text += "Chr(" + print(a.expr) + ")"; break;
            }
          }
          line(text);
        } else if constexpr (std::is_same_v<T, LcdLocate>) {
          line("Locate " + print(n.row) + ", " + print(n.col));
        } else if constexpr (std::is_same_v<T, DefChar>) {
          std::string text = "Deflcdchar " + print(n.slot);
          for (const auto& r : n.rows) text += ", " + print(r);
          line(text);
        } else if constexpr (std::is_same_v<T, Cls>) {
          line("Cls");
        } else if constexpr (std::is_same_v<T, Waitms>) {
          line("Waitms " + print(n.ms));
        }
      },
      stmt.node);
}

void print_block(const Block& block, int depth, std::string& out) {
  for (const auto& s : block) print_stmt(s, depth, out);
}

}  // namespace

Program parse(const std::vector<Token>& tokens) {
  if (tokens.empty() || tokens.back().kind != TokenKind::EndOfFile) {
    throw std::invalid_argument("parse: token stream must end with EndOfFile");
  }
  return Parser(tokens).run();
}

Program parse_source(std::string_view source) { return parse(tokenize(source)); }

Program load_program(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open firmware " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_source(ss.str());
}

std::string print(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Literal: return std::to_string(e.value);
    case Expr::Kind::Variable: return display_name(e.name);
    case Expr::Kind::Pin: return "P" + std::to_string(e.pin.port) + "." + std::to_string(e.pin.bit);
    case Expr::Kind::Negate: return "-" + print_operand(e.operands[0], 3);
    case Expr::Kind::Binary: {
      // Additive operators are left-associative; comparisons do not chain.
      const bool additive = precedence(e) == 2;
      return print_operand(e.operands[0], 2) + " " + std::string(op_text(e.op)) + " " +
             print_operand(e.operands[1], additive ? 3 : 2);
    }
  }
  return {};
}

std::string print(const Program& program) {
  std::string out;
  print_block(program.body, 0, out);
  return out;
}

}  // namespace clocksim::basic

#include "clocksim/basic/interpreter.hpp"

#include <algorithm>
#include <type_traits>

namespace clocksim::basic {
namespace {

Value wrap16(std::int32_t v) { return static_cast<Value>(static_cast<std::uint16_t>(v)); }

}  // namespace

Value Env::get(std::string_view name) const {
  const auto it = variables.find(name);
  return it == variables.end() ? Value{0} : it->second;
}

void Env::set(std::string_view name, Value v) {
  const auto it = variables.find(name);
  if (it != variables.end()) {
    it->second = v;
  } else {
    variables.emplace(std::string(name), v);
  }
}

bool same_state(const Env& a, const Env& b) {
  return a.variables == b.variables && a.pins == b.pins && a.scan_counter == b.scan_counter &&
         a.unbound_lcd_log == b.unbound_lcd_log && a.unbound_wait_ms == b.unbound_wait_ms;
}

Interpreter::Interpreter(const Program& program, Env& env) : env_(env) {
  stack_.push_back({&program.body, 0, false, 0});
}

Interpreter::Step Interpreter::resume(std::uint64_t& fuel) {
  auto spend = [&](int line) {
    if (fuel == 0) throw BasicError(BasicErrc::FuelExhausted, "statement budget used up", line);
    --fuel;
  };
  while (!stack_.empty()) {
    Frame& top = stack_.back();
    if (top.pc == top.block->size()) {
      if (!top.loop) {
        stack_.pop_back();
        continue;
      }
      // Iteration boundary of a Do ... Loop.
      spend(top.line);
      top.pc = 0;
      ++env_.scan_counter;
      return Step::Yielded;
    }
    const Stmt& stmt = (*top.block)[top.pc++];
    spend(stmt.line);
    exec(stmt);
    if (yield_requested_) {
      yield_requested_ = false;
      ++env_.scan_counter;
      return Step::Yielded;
    }
  }
  return Step::Finished;
}

void Interpreter::exec(const Stmt& stmt) {
  const int line = stmt.line;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Assign>) {
          env_.set(n.name, eval(n.value, line));
        } else if constexpr (std::is_same_v<T, Incr>) {
          env_.set(n.name, wrap16(env_.get(n.name) + 1));
        } else if constexpr (std::is_same_v<T, Decr>) {
          env_.set(n.name, wrap16(env_.get(n.name) - 1));
        } else if constexpr (std::is_same_v<T, If>) {
          if (eval(n.cond, line) != 0) {
            stack_.push_back({&n.then_block, 0, false, line});
          } else if (n.has_else) {
            stack_.push_back({&n.else_block, 0, false, line});
          }
        } else if constexpr (std::is_same_v<T, DoLoop>) {
          // Parked at the boundary so the first iteration also starts with a yield.
          stack_.push_back({&n.body, n.body.size(), true, line});
        } else if constexpr (std::is_same_v<T, ExitLoop>) {
          while (!stack_.back().loop) stack_.pop_back();
          stack_.pop_back();
        } else if constexpr (std::is_same_v<T, Scan>) {
          yield_requested_ = true;
        } else if constexpr (std::is_same_v<T, LcdPrint>) {
          for (const LcdArg& arg : n.args) {
            switch (arg.kind) {
              case LcdArg::Kind::Text:
                for (char c : arg.text) emit({true, static_cast<std::uint8_t>(c)});
                break;
              case LcdArg::Kind::Number:
                for (char c : std::to_string(eval(arg.expr, line))) emit({true, static_cast<std::uint8_t>(c)});
                break;
              case LcdArg::Kind::Char:
                emit({true, static_cast<std::uint8_t>(eval_arg(arg.expr, line, 0, 255, "Chr() code"))});
                break;
            }
          }
        } else if constexpr (std::is_same_v<T, LcdLocate>) {
          const auto row = eval_arg(n.row, line, 1, lcd::kRows, "Locate row");
          const auto col = eval_arg(n.col, line, 1, lcd::kRowSpan, "Locate column");
          emit({false, static_cast<std::uint8_t>(0x80 | ((row - 1) * lcd::kRow1Base + col - 1))});
        } else if constexpr (std::is_same_v<T, DefChar>) {
          const auto slot = eval_arg(n.slot, line, 0, 7, "Deflcdchar slot");
          std::array<std::uint8_t, 8> rows{};
          for (std::size_t i = 0; i < rows.size(); ++i) {
            rows[i] = static_cast<std::uint8_t>(eval_arg(n.rows[i], line, 0, 255, "Deflcdchar row"));
          }
          emit({false, static_cast<std::uint8_t>(0x40 | slot << 3)});
          for (auto r : rows) emit({true, r});
          emit({false, 0x80});
        } else if constexpr (std::is_same_v<T, Cls>) {
          emit({false, 0x01});
        } else if constexpr (std::is_same_v<T, Waitms>) {
          const auto ms = eval_arg(n.ms, line, 0, 32767, "Waitms duration");
          if (env_.wait_sink) {
            env_.wait_sink(ms);
          } else {
            env_.unbound_wait_ms += static_cast<std::uint64_t>(ms);
          }
        }
      },
      stmt.node);
}

Value Interpreter::eval(const Expr& e, int line) const {
  switch (e.kind) {
    case Expr::Kind::Literal: return wrap16(e.value);
    case Expr::Kind::Variable: return env_.get(e.name);
    case Expr::Kind::Pin: {
      if (!env_.pin_source) {
        const auto it = env_.pins.find(e.pin);
        return it == env_.pins.end() ? Value{1} : static_cast<Value>(it->second);
      }
      const auto level = env_.pin_source(e.pin, env_.scan_counter);
      if (!level) {
        throw BasicError(BasicErrc::UndefinedPinPort,
                         "port P" + std::to_string(e.pin.port) + " is not bound to the machine", line);
      }
      return static_cast<Value>(*level ? 1 : 0);
    }
    case Expr::Kind::Negate: return wrap16(-static_cast<std::int32_t>(eval(e.operands[0], line)));
    case Expr::Kind::Binary: {
      const std::int32_t a = eval(e.operands[0], line);
      const std::int32_t b = eval(e.operands[1], line);
      switch (e.op) {
        case Expr::Op::Add: return wrap16(a + b);
        case Expr::Op::Sub: return wrap16(a - b);
        case Expr::Op::Eq: return a == b;
        case Expr::Op::Ne: return a != b;
        case Expr::Op::Lt: return a < b;
        case Expr::Op::Gt: return a > b;
      }
    }
  }
  return 0;
}

std::int32_t Interpreter::eval_arg(const Expr& e, int line, std::int32_t lo, std::int32_t hi,
                                   const char* what) const {
  const std::int32_t v = eval(e, line);
  if (v < lo || v > hi) {
    throw BasicError(BasicErrc::BadArgument,
                     std::string(what) + " " + std::to_string(v) + " outside " + std::to_string(lo) + ".." +
                         std::to_string(hi),
                     line);
  }
  return v;
}

void Interpreter::emit(lcd::LcdWrite w) {
  if (env_.lcd_sink) {
    env_.lcd_sink(w);
  } else {
    env_.unbound_lcd_log.push_back(w);
  }
}

RunResult run(const Program& program, Env& env, std::uint64_t fuel) {
  const std::uint64_t budget = fuel;
  Interpreter interp(program, env);
  while (interp.resume(fuel) == Interpreter::Step::Yielded) {
    if (env.scan_hook && !env.scan_hook(env)) return {RunStatus::Halted, budget - fuel};
  }
  return {RunStatus::Finished, budget - fuel};
}

void bind_machine(Env& env, lcd::Lcd& lcd, PinSource pins) {
  env.lcd_sink = [&lcd](lcd::LcdWrite w) {
    if (lcd.state().four_bit_mode) {
      lcd.send_4bit(w);
    } else {
      lcd.write(w);
    }
  };
  env.pin_source = std::move(pins);
}

void ScanPinScript::set_low(std::uint64_t scan, PinRef pin) {
  low_.insert({scan, pin});
  length_ = std::max(length_, scan + 1);
}

std::optional<int> ScanPinScript::level(PinRef pin, std::uint64_t scan) const {
  if (!ports_.count(pin.port)) return std::nullopt;
  return low_.count({scan, pin}) ? 0 : 1;
}

}  // namespace clocksim::basic

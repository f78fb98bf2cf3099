// Tree-walking interpreter for the firmware dialect.
//
// Scan convention: the start of every Do ... Loop iteration (and an explicit
// Scan statement) is a yield point. Each yield advances Env::scan_counter and
// gives the host a chance to change pin levels, so one scan corresponds to one
// pass of a polling loop. A button held low for exactly one scan is seen by
// exactly one loop iteration.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "clocksim/basic/ast.hpp"
#include "clocksim/basic/error.hpp"
#include "clocksim/lcd.hpp"

namespace clocksim::basic {

/// BASCOM Integer.
using Value = std::int16_t;

struct Env;

/// Level of a pin at a scan, or nullopt when the pin's port is not bound.
using PinSource = std::function<std::optional<int>(PinRef, std::uint64_t scan)>;
using LcdSink = std::function<void(lcd::LcdWrite)>;
using WaitSink = std::function<void(std::int32_t ms)>;
/// Runs after each yield (scan_counter already advanced). Returning false
/// halts the program.
using ScanHook = std::function<bool(Env&)>;

struct Env {
  std::map<std::string, Value, std::less<>> variables;  // case-folded names, absent = 0
  std::map<PinRef, int> pins;                           // used when no pin_source; absent = 1
  std::uint64_t scan_counter = 0;

  PinSource pin_source;
  LcdSink lcd_sink;
  WaitSink wait_sink;
  ScanHook scan_hook;

  // What unbound statements would have done.
  std::vector<lcd::LcdWrite> unbound_lcd_log;
  std::uint64_t unbound_wait_ms = 0;

  Value get(std::string_view name) const;
  void set(std::string_view name, Value v);
};

/// Data part of two environments (variables, pins, scan counter, logs).
bool same_state(const Env& a, const Env& b);

enum class RunStatus { Finished, Halted };

struct RunResult {
  RunStatus status = RunStatus::Finished;
  std::uint64_t fuel_used = 0;
};

/// Steps a program one scan at a time. The program and env must outlive it.
class Interpreter {
 public:
  Interpreter(const Program& program, Env& env);

  enum class Step { Yielded, Finished };

  /// Runs until the next yield point or the end of the program. Every
  /// statement and every loop iteration costs one unit of fuel; throws
  /// BasicError(FuelExhausted) when it runs out.
  Step resume(std::uint64_t& fuel);

  bool finished() const { return stack_.empty(); }

 private:
  struct Frame {
    const Block* block;
    std::size_t pc;
    bool loop;
    int line;
  };

  void exec(const Stmt& stmt);
  Value eval(const Expr& e, int line) const;
  std::int32_t eval_arg(const Expr& e, int line, std::int32_t lo, std::int32_t hi, const char* what) const;
  void emit(lcd::LcdWrite w);

  Env& env_;
  std::vector<Frame> stack_;
  bool yield_requested_ = false;
};

/// Runs to completion, calling env.scan_hook at every yield.
RunResult run(const Program& program, Env& env, std::uint64_t fuel);

/// Routes LCD statements to `lcd` (over the 4-bit bus once the module is in
/// 4-bit mode) and pin reads to `pins`.
void bind_machine(Env& env, lcd::Lcd& lcd, PinSource pins);

/// Scan-indexed pin levels for a fixed set of ports; anything not set low
/// reads 1 (released, the buttons are active-low).
class ScanPinScript {
 public:
  explicit ScanPinScript(std::set<int> bound_ports) : ports_(std::move(bound_ports)) {}

  void set_low(std::uint64_t scan, PinRef pin);
  std::optional<int> level(PinRef pin, std::uint64_t scan) const;
  /// One past the last scan with a pin set low.
  std::uint64_t length() const { return length_; }

 private:
  std::set<int> ports_;
  std::set<std::pair<std::uint64_t, PinRef>> low_;
  std::uint64_t length_ = 0;
};

}  // namespace clocksim::basic

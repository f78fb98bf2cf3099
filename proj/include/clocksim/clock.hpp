// Native clock firmware: per-second counting and the SET / INCREMENT /
// DECREMENT adjustment cycle.
#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace clocksim::clock {

using VirtualMs = std::uint64_t;

inline constexpr int kSecondsPerDay = 86'400;

struct TimeOfDay {
  int hh = 0;
  int mm = 0;
  int ss = 0;

  bool valid() const { return hh >= 0 && hh < 24 && mm >= 0 && mm < 60 && ss >= 0 && ss < 60; }
  int to_seconds() const { return hh * 3600 + mm * 60 + ss; }
  static TimeOfDay from_seconds(std::int64_t seconds);
  /// "HH:MM:SS"
  std::string to_string() const;
  /// Parses "HH:MM:SS"; nullopt on bad format or range.
  static std::optional<TimeOfDay> parse(std::string_view text);

  friend auto operator<=>(const TimeOfDay&, const TimeOfDay&) = default;
};

TimeOfDay tick_second(TimeOfDay t);

/// value + delta with the firmware's fix-ups: modulus wraps to 0 and -1 wraps
/// to modulus - 1. Done in signed arithmetic, the way "Decr Hh / If Hh = -1"
/// behaves on a BASCOM Integer.
int adjust_field(int value, int delta, int modulus);

enum class AdjustMode : std::uint8_t { Run, SetHour, SetMin, SetSec };
enum class Button : std::uint8_t { Set, Inc, Dec };
enum class Edge : std::uint8_t { Press, Release };

inline constexpr std::array<Button, 3> kButtons = {Button::Set, Button::Inc, Button::Dec};

/// "run", "set_hour", "set_min", "set_sec"
std::string_view to_string(AdjustMode mode);
/// "set", "inc", "dec"
std::string_view to_string(Button button);
std::optional<Button> parse_button(std::string_view name);

struct ButtonEvent {
  Button button = Button::Set;
  Edge edge = Edge::Press;
  VirtualMs at_ms = 0;

  friend bool operator==(const ButtonEvent&, const ButtonEvent&) = default;
};

enum class ClockErrc { OutOfOrder, ProtocolViolation };

class ClockError : public std::runtime_error {
 public:
  ClockError(ClockErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ClockErrc code() const noexcept { return code_; }

 private:
  ClockErrc code_;
};

struct ClockOptions {
  // The adjustment listings are blocking scan loops, so the firmware cannot
  // count while the user is setting the time.
  bool freeze_while_adjusting = true;

  friend bool operator==(const ClockOptions&, const ClockOptions&) = default;
};

class ClockFsm {
 public:
  ClockFsm() = default;
  explicit ClockFsm(ClockOptions options, TimeOfDay start = {}) : options_(options), time_(start) {}

  /// Applies an event. Only presses act; releases are bookkeeping for the
  /// press/release alternation check.
  void on_button(const ButtonEvent& ev);

  /// The transition a press triggers, without ordering or alternation checks.
  void on_press(Button button);

  /// Advances virtual time. Returns the number of whole seconds counted.
  std::uint64_t advance(VirtualMs dt_ms);

  const TimeOfDay& time() const { return time_; }
  AdjustMode mode() const { return mode_; }
  std::uint32_t ms_accumulator() const { return ms_accumulator_; }
  bool pressed(Button b) const { return pressed_[static_cast<int>(b)]; }
  const ClockOptions& options() const { return options_; }

  friend bool operator==(const ClockFsm&, const ClockFsm&) = default;

 private:
  ClockOptions options_{};
  TimeOfDay time_{};
  AdjustMode mode_ = AdjustMode::Run;
  std::uint32_t ms_accumulator_ = 0;
  std::array<bool, 3> pressed_{};
  std::optional<VirtualMs> last_event_ms_;
};

}  // namespace clocksim::clock

#include "clocksim/clock.hpp"

#include <cstdio>

namespace clocksim::clock {

TimeOfDay TimeOfDay::from_seconds(std::int64_t seconds) {
  std::int64_t s = seconds % kSecondsPerDay;
  if (s < 0) s += kSecondsPerDay;
  return {static_cast<int>(s / 3600), static_cast<int>(s / 60 % 60), static_cast<int>(s % 60)};
}

std::string TimeOfDay::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d:%02d:%02d", hh, mm, ss);
  return buf;
}

std::optional<TimeOfDay> TimeOfDay::parse(std::string_view text) {
  if (text.size() != 8 || text[2] != ':' || text[5] != ':') return std::nullopt;
  auto two = [&](std::size_t at) -> int {
    const char a = text[at], b = text[at + 1];
    if (a < '0' || a > '9' || b < '0' || b > '9') return -1;
    return (a - '0') * 10 + (b - '0');
  };
  TimeOfDay t{two(0), two(3), two(6)};
  if (!t.valid()) return std::nullopt;
  return t;
}

TimeOfDay tick_second(TimeOfDay t) {
  ++t.ss;
  if (t.ss > 59) {
    t.ss = 0;
    ++t.mm;
    if (t.mm > 59) {
      t.mm = 0;
      ++t.hh;
      if (t.hh > 23) t.hh = 0;
    }
  }
  return t;
}

int adjust_field(int value, int delta, int modulus) {
  int result = value + delta;
  if (result == modulus) result = 0;
  if (result == -1) result = modulus - 1;
  return result;
}

std::string_view to_string(AdjustMode mode) {
  switch (mode) {
    case AdjustMode::Run: return "run";
    case AdjustMode::SetHour: return "set_hour";
    case AdjustMode::SetMin: return "set_min";
    case AdjustMode::SetSec: return "set_sec";
  }
  return "?";
}

std::string_view to_string(Button button) {
  switch (button) {
    case Button::Set: return "set";
    case Button::Inc: return "inc";
    case Button::Dec: return "dec";
  }
  return "?";
}

std::optional<Button> parse_button(std::string_view name) {
  for (Button b : kButtons) {
    if (to_string(b) == name) return b;
  }
  return std::nullopt;
}

void ClockFsm::on_button(const ButtonEvent& ev) {
  if (last_event_ms_ && ev.at_ms < *last_event_ms_) {
    throw ClockError(ClockErrc::OutOfOrder, "button event at " + std::to_string(ev.at_ms) +
                                                " ms precedes previous event at " +
                                                std::to_string(*last_event_ms_) + " ms");
  }
  bool& down = pressed_[static_cast<int>(ev.button)];
  const bool pressing = ev.edge == Edge::Press;
  if (down == pressing) {
    throw ClockError(ClockErrc::ProtocolViolation, std::string(to_string(ev.button)) +
                                                       (pressing ? " pressed twice" : " released while up"));
  }
  last_event_ms_ = ev.at_ms;
  down = pressing;
  if (pressing) on_press(ev.button);
}

void ClockFsm::on_press(Button button) {
  if (button == Button::Set) {
    switch (mode_) {
      case AdjustMode::Run: mode_ = AdjustMode::SetHour; break;
      case AdjustMode::SetHour: mode_ = AdjustMode::SetMin; break;
      case AdjustMode::SetMin: mode_ = AdjustMode::SetSec; break;
      case AdjustMode::SetSec: mode_ = AdjustMode::Run; break;
    }
    return;
  }
  const int delta = button == Button::Inc ? +1 : -1;
  switch (mode_) {
    case AdjustMode::Run: break;
    case AdjustMode::SetHour: time_.hh = adjust_field(time_.hh, delta, 24); break;
    case AdjustMode::SetMin: time_.mm = adjust_field(time_.mm, delta, 60); break;
    case AdjustMode::SetSec: time_.ss = adjust_field(time_.ss, delta, 60); break;
  }
}

std::uint64_t ClockFsm::advance(VirtualMs dt_ms) {
  if (mode_ != AdjustMode::Run && options_.freeze_while_adjusting) return 0;
  const VirtualMs total = ms_accumulator_ + dt_ms;
  const std::uint64_t seconds = total / 1000;
  ms_accumulator_ = static_cast<std::uint32_t>(total % 1000);
  // Whole days are the identity; only the remainder needs stepping.
  for (std::uint64_t i = 0; i < seconds % kSecondsPerDay; ++i) time_ = tick_second(time_);
  return seconds;
}

}  // namespace clocksim::clock

// Virtual-time simulation of the clock: firmware (native state machine or
// interpreted BASIC), the LCD on its 4-bit bus, and CGRAM glyph residency.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "clocksim/basic/ast.hpp"
#include "clocksim/clock.hpp"
#include "clocksim/glyphs.hpp"
#include "clocksim/lcd.hpp"
#include "clocksim/sim/config.hpp"
#include "clocksim/sim/script.hpp"

namespace clocksim::sim {

using clock::VirtualMs;
using CellCodes = std::array<std::array<std::uint8_t, lcd::kCols>, lcd::kRows>;

struct Frame {
  VirtualMs virtual_ms = 0;
  clock::TimeOfDay time;
  clock::AdjustMode mode = clock::AdjustMode::Run;
  CellCodes cells{};
  std::array<std::uint8_t, 64> cgram{};
  bool display_on = false;
  lcd::Screen pixels;

  std::string ascii() const { return pixels.to_ascii(); }
};

/// Header line "T=<ms> <hh:mm:ss> mode=<mode>" followed by the ASCII art.
std::string snapshot(const Frame& frame);

/// Renders `cells` through `cgram` and the ROM font; what `pixels` must equal.
lcd::Screen render_codes(const CellCodes& cells, const std::array<std::uint8_t, 64>& cgram, bool display_on);

/// A fresh module driven to show `t`, as the firmware would draw it: 4-bit
/// init, CGRAM loads, then the eight face codes. Stamped T=0, mode run.
Frame render_face(const glyphs::GlyphSet& glyphs, const clock::TimeOfDay& t,
                  glyphs::Layout layout = glyphs::Layout::HourFirst);

/// One simulated clock. Not copyable or movable: the BASIC runtime keeps
/// references into it.
///
/// Time model: run_until(t) lets every interval before t elapse. The native
/// firmware counts seconds landing exactly on t; the BASIC firmware runs every
/// scan that starts before t, and run_through(t) also runs the scan at t. A
/// press() lands at now(): the native machine acts on it at once, the BASIC
/// firmware sees it at its next scan. A press shorter than a scan is latched
/// so that scan still reads the pin low.
class Simulation {
 public:
  /// Loads the glyph asset and firmware named by `config`.
  explicit Simulation(const SimConfig& config);
  Simulation(const SimConfig& config, glyphs::GlyphSet glyphs, std::optional<basic::Program> firmware);
  ~Simulation();

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Called for every emitted frame: on a change of the screen or the mode,
  /// or on every step with SimConfig::every_frame.
  void set_frame_sink(std::function<void(const Frame&)> sink) { sink_ = std::move(sink); }

  /// Throws clock::ClockError for broken press/release alternation.
  void press(clock::Button button, clock::Edge edge);
  void run_until(VirtualMs t);
  void run_through(VirtualMs t);

  VirtualMs now() const { return now_; }
  const Frame& frame() const { return frame_; }
  clock::TimeOfDay time() const;
  clock::AdjustMode mode() const;
  const lcd::Lcd& lcd() const { return lcd_; }
  const SimConfig& config() const { return config_; }
  void set_speed(double speed);
  /// Scans executed by the BASIC firmware so far (0 for native).
  std::uint64_t scans() const;

 private:
  struct BasicRuntime;

  void run_native_until(VirtualMs t);
  void run_basic_until(VirtualMs t);
  void refresh(bool force_emit);
  void send(lcd::LcdWrite w);

  SimConfig config_;
  glyphs::GlyphSet glyphs_;
  lcd::Lcd lcd_;
  glyphs::SlotMap slots_;
  clock::ClockFsm fsm_;
  std::unique_ptr<BasicRuntime> basic_;

  VirtualMs now_ = 0;
  std::optional<clock::TimeOfDay> shown_time_;
  std::array<std::uint8_t, 8> shown_codes_{};
  bool lcd_dirty_ = true;
  Frame frame_;
  bool have_frame_ = false;
  std::function<void(const Frame&)> sink_;
};

struct HeadlessResult {
  Frame final_frame;
  std::vector<Frame> frames;  // filled when requested, starting with the initial frame
};

/// Runs a script for `duration_ms` of virtual time. Throws SimError for bad
/// config (ConfigError), script (ScriptError) or firmware (FirmwareError).
HeadlessResult run_headless(const SimConfig& config, const ButtonScript& script, VirtualMs duration_ms,
                            bool record_frames = false);

}  // namespace clocksim::sim

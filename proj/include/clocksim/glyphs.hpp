// Bangla digit glyphs: the text asset, CGRAM slot residency and the HH:MM:SS
// cell layout.
//
// The LCD has eight CGRAM slots but there are ten digits, so glyphs are loaded
// on demand. A clock face needs at most six distinct digits at once.
#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "clocksim/clock.hpp"
#include "clocksim/lcd.hpp"

namespace clocksim::glyphs {

inline constexpr int kDigits = 10;
inline constexpr int kSlots = 8;
inline constexpr std::uint8_t kColon = 0x3A;

enum class GlyphErrc {
  BadHeader,
  BadDimensions,
  MissingDigit,
  DuplicateDigit,
  NonBlankCursorRow,
  BlankGlyph,
  IndistinctGlyphs,
  TooManyDigits,
  NotResident,
};

class GlyphError : public std::runtime_error {
 public:
  GlyphError(GlyphErrc code, const std::string& what, int line = 0)
      : std::runtime_error(what), code_(code), line_(line) {}
  GlyphErrc code() const noexcept { return code_; }
  /// 1-based asset line, 0 when not tied to a line.
  int line() const noexcept { return line_; }

 private:
  GlyphErrc code_;
  int line_;
};

struct Glyph {
  std::array<std::uint8_t, lcd::kCellRows> rows{};

  bool blank() const;
  lcd::PixelCell cell() const { return {rows}; }
  friend bool operator==(const Glyph&, const Glyph&) = default;
};

using GlyphSet = std::array<Glyph, kDigits>;
using DigitSet = std::bitset<kDigits>;

struct ParseOptions {
  bool allow_blank = false;
};

/// Asset format: ten blocks, each a "digit N" line followed by eight rows of
/// five '#'/'.' characters. Blank lines between blocks are ignored.
GlyphSet parse_glyph_asset(std::string_view text, ParseOptions options = {});
std::string serialize_glyph_asset(const GlyphSet& glyphs);
GlyphSet load_glyph_asset(const std::string& path, ParseOptions options = {});

/// Distinct digits shown for a time (six positions).
DigitSet required_digits(const clock::TimeOfDay& t);

struct SlotLoad {
  int slot = 0;
  int digit = 0;
  friend bool operator==(const SlotLoad&, const SlotLoad&) = default;
};

/// Which digit lives in which CGRAM slot, with least-recently-used eviction.
class SlotMap {
 public:
  /// Makes every digit in `digits` resident. Digits already resident keep
  /// their slot. New digits (ascending) take the lowest free slot, otherwise
  /// evict the least recently requested digit not in `digits`, ties going to
  /// the lowest slot. Returns exactly the newly assigned slots.
  std::vector<SlotLoad> ensure_resident(DigitSet digits);

  std::optional<int> slot_of(int digit) const;
  std::optional<int> digit_in(int slot) const { return digit_in_slot_[slot]; }
  /// Request generation at which the slot was last asked for (0 = never).
  std::uint64_t last_used(int slot) const { return last_used_[slot]; }
  int resident_count() const;

  friend bool operator==(const SlotMap&, const SlotMap&) = default;

 private:
  std::array<std::optional<int>, kSlots> digit_in_slot_{};
  std::array<std::uint64_t, kSlots> last_used_{};
  std::uint64_t generation_ = 0;
};

/// CGRAM writes for the given loads, followed by Set DDRAM Addr so later data
/// writes land on the display again. Empty when there is nothing to load.
std::vector<lcd::LcdWrite> program_cgram(const std::vector<SlotLoad>& loads, const GlyphSet& glyphs,
                                         std::uint8_t restore_ddram_addr = 0);

enum class Layout { HourFirst, SecondFirst };  // HH:MM:SS or SS:MM:HH

/// The eight character codes of the clock face.
std::array<std::uint8_t, 8> compose_display(const clock::TimeOfDay& t, const SlotMap& slots,
                                            Layout layout = Layout::HourFirst);

/// All ten digits side by side on row 0. A real HD44780 can only hold eight
/// custom glyphs at a time, so this sheet is built from the bitmaps directly.
lcd::Screen digit_sheet(const GlyphSet& glyphs);

}  // namespace clocksim::glyphs

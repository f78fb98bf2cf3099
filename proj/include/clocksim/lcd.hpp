// Byte- and pin-level model of a 16x2 HD44780-style character LCD.
//
// The module is write-only: the clock circuit ties R/W to ground, so there is
// no busy flag and no read-back path. Every operation completes instantly in
// virtual time.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace clocksim::lcd {

inline constexpr int kRows = 2;
inline constexpr int kCols = 16;
inline constexpr int kCellRows = 8;
inline constexpr int kCellCols = 5;

inline constexpr std::uint8_t kBlank = 0x20;
inline constexpr std::uint8_t kRow1Base = 0x40;
inline constexpr std::uint8_t kRowSpan = 0x28;  // 40 DDRAM bytes per row

enum class LcdErrc {
  MidTransfer,  // byte-level access while a nibble is latched
  RsMismatch,   // RS changed between the two nibbles of one byte
};

class LcdError : public std::runtime_error {
 public:
  LcdError(LcdErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  LcdErrc code() const noexcept { return code_; }

 private:
  LcdErrc code_;
};

enum class Target : std::uint8_t { Ddram, Cgram };

/// One transfer on the LCD bus: rs=false is a command, rs=true is data.
struct LcdWrite {
  bool rs = false;
  std::uint8_t byte = 0;

  friend bool operator==(const LcdWrite&, const LcdWrite&) = default;
};

struct PendingNibble {
  bool rs = false;
  std::uint8_t high = 0;

  friend bool operator==(const PendingNibble&, const PendingNibble&) = default;
};

struct LcdState {
  // Row 0 occupies indices 0..39 (addresses 0x00-0x27), row 1 indices 40..79
  // (addresses 0x40-0x67).
  std::array<std::uint8_t, 80> ddram{};
  // 8 slots x 8 row bytes, bits 5-7 always clear.
  std::array<std::uint8_t, 64> cgram{};
  std::uint8_t addr_counter = 0;
  Target target = Target::Ddram;
  bool display_on = false;
  bool cursor_on = false;
  bool blink_on = false;
  bool entry_increment = true;
  bool entry_shift = false;
  bool two_line_mode = false;
  bool four_bit_mode = false;
  bool font_5x10 = false;
  std::optional<PendingNibble> nibble_latch;
  // Diagnostics: commands accepted as no-ops (display/cursor shift, 0x00).
  std::uint32_t unsupported_commands = 0;

  friend bool operator==(const LcdState&, const LcdState&) = default;
};

/// 8 rows of 5 pixels; bit 4 of each row byte is the leftmost pixel.
struct PixelCell {
  std::array<std::uint8_t, kCellRows> rows{};

  bool pixel(int row, int col) const { return (rows[row] >> (kCellCols - 1 - col)) & 1U; }
  friend bool operator==(const PixelCell&, const PixelCell&) = default;
};

struct Screen {
  std::array<std::array<PixelCell, kCols>, kRows> cells{};

  /// '#' on, '.' off, one space between cells, an empty line between the two
  /// LCD rows, LF after every line (17 lines).
  std::string to_ascii() const;
  friend bool operator==(const Screen&, const Screen&) = default;
};

/// DDRAM address shown at a visible cell (no display shift).
constexpr std::uint8_t ddram_address(int row, int col) {
  return static_cast<std::uint8_t>(row * kRow1Base + col);
}

/// Index into LcdState::ddram for a valid DDRAM address.
constexpr int ddram_index(std::uint8_t addr) {
  return addr >= kRow1Base ? addr - kRow1Base + kRowSpan : addr;
}

/// Bitmap of a character in the built-in ROM font; blank outside 0x20-0x7E.
PixelCell rom_glyph(std::uint8_t code);

class Lcd {
 public:
  Lcd() = default;  // power-on state, see reset()
  explicit Lcd(const LcdState& state) : state_(state) {}

  /// Display off, AC=0 on DDRAM, DDRAM blank, CGRAM zeroed, 8-bit interface.
  void reset();

  void command(std::uint8_t byte);
  void write_data(std::uint8_t byte);
  void write(LcdWrite w) { w.rs ? write_data(w.byte) : command(w.byte); }

  /// One EN strobe on D7-D4. In 4-bit mode two strobes make one byte (high
  /// nibble first). In 8-bit mode the low data lines read as zero, so the
  /// strobe carries the byte (nibble << 4); this is what the power-on init
  /// sequence relies on.
  void bus_write(bool rs, std::uint8_t nibble);

  /// Sends a byte as the two nibble strobes of the 4-bit wiring.
  void send_4bit(LcdWrite w) {
    bus_write(w.rs, w.byte >> 4);
    bus_write(w.rs, w.byte & 0x0F);
  }

  PixelCell render_cell(int row, int col) const;
  Screen render_screen() const;

  /// Character code currently stored at a visible cell.
  std::uint8_t code_at(int row, int col) const { return state_.ddram[ddram_index(ddram_address(row, col))]; }

  const LcdState& state() const { return state_; }

 private:
  void require_byte_boundary(const char* op) const;
  void step_address();

  LcdState state_ = make_reset_state();

  static LcdState make_reset_state();
};

/// The power-on 4-bit initialisation a driver sends over D7-D4: three 0x3
/// strobes, 0x2 to enter 4-bit mode, then 2-line, display off, clear, entry
/// increment, display on.
void init_4bit(Lcd& lcd);

}  // namespace clocksim::lcd

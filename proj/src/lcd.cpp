#include "clocksim/lcd.hpp"

namespace clocksim::lcd {
namespace {

constexpr std::uint8_t kRow0End = kRowSpan - 1;              // 0x27
constexpr std::uint8_t kRow1End = kRow1Base + kRowSpan - 1;  // 0x67
constexpr std::uint8_t kCgramSize = 0x40;

// Out-of-map addresses land on the start of the next row, the same place the
// counter goes when it runs off the end of a row.
std::uint8_t normalize_ddram(std::uint8_t addr) {
  addr &= 0x7F;
  if (addr > kRow0End && addr < kRow1Base) return kRow1Base;
  if (addr > kRow1End) return 0x00;
  return addr;
}

}  // namespace

LcdState Lcd::make_reset_state() {
  LcdState s;
  s.ddram.fill(kBlank);
  return s;
}

void Lcd::reset() { state_ = make_reset_state(); }

void Lcd::require_byte_boundary(const char* op) const {
  if (state_.nibble_latch) {
    throw LcdError(LcdErrc::MidTransfer, std::string(op) + " while a nibble is latched");
  }
}

void Lcd::command(std::uint8_t byte) {
  require_byte_boundary("command");
  auto& s = state_;
  if (byte & 0x80) {
    s.addr_counter = normalize_ddram(byte & 0x7F);
    s.target = Target::Ddram;
  } else if (byte & 0x40) {
    s.addr_counter = byte & 0x3F;
    s.target = Target::Cgram;
  } else if (byte & 0x20) {
    s.four_bit_mode = !(byte & 0x10);
    s.two_line_mode = byte & 0x08;
    s.font_5x10 = byte & 0x04;
  } else if (byte & 0x10) {
    // cursor/display shift
    ++s.unsupported_commands;
  } else if (byte & 0x08) {
    s.display_on = byte & 0x04;
    s.cursor_on = byte & 0x02;
    s.blink_on = byte & 0x01;
  } else if (byte & 0x04) {
    s.entry_increment = byte & 0x02;
    s.entry_shift = byte & 0x01;
  } else if (byte & 0x02) {
    s.addr_counter = 0;
    s.target = Target::Ddram;
  } else if (byte & 0x01) {
    s.ddram.fill(kBlank);
    s.addr_counter = 0;
    s.target = Target::Ddram;
    s.entry_increment = true;
  } else {
    ++s.unsupported_commands;
  }
}

void Lcd::step_address() {
  auto& ac = state_.addr_counter;
  if (state_.target == Target::Cgram) {
    ac = state_.entry_increment ? (ac + 1) % kCgramSize : (ac + kCgramSize - 1) % kCgramSize;
    return;
  }
  if (state_.entry_increment) {
    ac = ac == kRow0End ? kRow1Base : ac == kRow1End ? 0x00 : ac + 1;
  } else {
    ac = ac == 0x00 ? kRow1End : ac == kRow1Base ? kRow0End : ac - 1;
  }
}

void Lcd::write_data(std::uint8_t byte) {
  require_byte_boundary("data write");
  if (state_.target == Target::Cgram) {
    state_.cgram[state_.addr_counter] = byte & 0x1F;
  } else {
    state_.ddram[ddram_index(state_.addr_counter)] = byte;
  }
  step_address();
}

void Lcd::bus_write(bool rs, std::uint8_t nibble) {
  if (nibble > 0x0F) throw std::invalid_argument("bus_write: nibble out of range");
  if (!state_.four_bit_mode) {
    write({rs, static_cast<std::uint8_t>(nibble << 4)});
    return;
  }
  if (!state_.nibble_latch) {
    state_.nibble_latch = PendingNibble{rs, nibble};
    return;
  }
  const PendingNibble pending = *state_.nibble_latch;
  if (pending.rs != rs) throw LcdError(LcdErrc::RsMismatch, "RS changed between nibbles");
  state_.nibble_latch.reset();
  write({rs, static_cast<std::uint8_t>(pending.high << 4 | nibble)});
}

PixelCell Lcd::render_cell(int row, int col) const {
  if (!state_.display_on) return {};
  const std::uint8_t code = code_at(row, col);
  if (code < 0x10) {
    // 0x08-0x0F alias the eight CGRAM slots.
    PixelCell cell;
    for (int r = 0; r < kCellRows; ++r) cell.rows[r] = state_.cgram[(code & 0x07) * kCellRows + r];
    return cell;
  }
  return rom_glyph(code);
}

Screen Lcd::render_screen() const {
  Screen screen;
  for (int r = 0; r < kRows; ++r) {
    for (int c = 0; c < kCols; ++c) screen.cells[r][c] = render_cell(r, c);
  }
  return screen;
}

std::string Screen::to_ascii() const {
  std::string out;
  out.reserve((kCols * (kCellCols + 1)) * (kRows * kCellRows + 1));
  for (int r = 0; r < kRows; ++r) {
    if (r > 0) out += '\n';
    for (int pr = 0; pr < kCellRows; ++pr) {
      for (int c = 0; c < kCols; ++c) {
        if (c > 0) out += ' ';
        for (int pc = 0; pc < kCellCols; ++pc) out += cells[r][c].pixel(pr, pc) ? '#' : '.';
      }
      out += '\n';
    }
  }
  return out;
}

void init_4bit(Lcd& lcd) {
  for (std::uint8_t nibble : {0x3, 0x3, 0x3, 0x2}) lcd.bus_write(false, nibble);
  for (std::uint8_t cmd : {0x28, 0x08, 0x01, 0x06, 0x0C}) lcd.send_4bit({false, cmd});
}

}  // namespace clocksim::lcd

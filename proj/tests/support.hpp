// Oracles and fixtures shared by the unit tests and the acceptance runner.
// Everything here is written independently of the library code it checks.
#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "clocksim/basic/interpreter.hpp"
#include "clocksim/basic/parser.hpp"
#include "clocksim/clock.hpp"
#include "clocksim/glyphs.hpp"
#include "clocksim/lcd.hpp"

#ifndef CLOCKSIM_SOURCE_DIR
#define CLOCKSIM_SOURCE_DIR "."
#endif

namespace testsupport {

using namespace clocksim;

inline std::string source_path(const std::string& rel) { return std::string(CLOCKSIM_SOURCE_DIR) + "/" + rel; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline glyphs::GlyphSet shipped_glyphs() { return glyphs::load_glyph_asset(source_path("assets/bangla_digits.glyphs")); }

// ---- modular time -----------------------------------------------------

/// hh:mm:ss after `seconds` seconds from midnight, by plain division.
inline clock::TimeOfDay time_after(std::uint64_t seconds) {
  const std::uint64_t s = seconds % 86400;
  return {static_cast<int>(s / 3600), static_cast<int>(s / 60 % 60), static_cast<int>(s % 60)};
}

/// (value + delta) mod modulus, always in [0, modulus).
inline int wrap(int value, int delta, int modulus) { return ((value + delta) % modulus + modulus) % modulus; }

// ---- reference LCD ------------------------------------------------------

/// Datasheet instruction table over a flat 128-byte DDRAM address space.
/// Only addresses 0x00-0x27 and 0x40-0x67 exist; the counter skips the gaps.
struct RefLcd {
  std::array<std::uint8_t, 128> dd{};
  std::array<std::uint8_t, 64> cg{};
  int ac = 0;
  bool cg_target = false;
  bool increment = true, shift = false;
  bool display = false, cursor = false, blink = false;
  bool dl8 = true, lines2 = false, font10 = false;
  std::uint32_t noops = 0;

  RefLcd() { dd.fill(0x20); }

  static bool exists(int a) { return (a >= 0x00 && a <= 0x27) || (a >= 0x40 && a <= 0x67); }

  void cmd(std::uint8_t b) {
    int top = 7;
    while (top >= 0 && !(b >> top & 1)) --top;
    switch (top) {
      case 7: {
        int a = b & 0x7F;
        if (!exists(a)) a = a < 0x40 ? 0x40 : 0x00;
        ac = a;
        cg_target = false;
        break;
      }
      case 6: ac = b & 0x3F; cg_target = true; break;
      case 5: dl8 = b & 0x10; lines2 = b & 0x08; font10 = b & 0x04; break;
      case 4: ++noops; break;
      case 3: display = b & 4; cursor = b & 2; blink = b & 1; break;
      case 2: increment = b & 2; shift = b & 1; break;
      case 1: ac = 0; cg_target = false; break;
      case 0: dd.fill(0x20); ac = 0; cg_target = false; increment = true; break;
      default: ++noops; break;
    }
  }

  void data(std::uint8_t b) {
    if (cg_target) {
      cg[ac] = b & 0x1F;
      ac = (ac + (increment ? 1 : 63)) & 63;
      return;
    }
    dd[ac] = b;
    int next = ac;
    do {
      next = (next + (increment ? 1 : 127)) & 127;
    } while (!exists(next));
    ac = next;
  }

  std::uint8_t code_at(int row, int col) const { return dd[row * 0x40 + col]; }
};

/// Compares the observable parts of a model LcdState with the reference.
inline bool matches(const lcd::LcdState& s, const RefLcd& r) {
  for (int a = 0; a < 128; ++a) {
    if (!RefLcd::exists(a)) continue;
    if (s.ddram[lcd::ddram_index(static_cast<std::uint8_t>(a))] != r.dd[a]) return false;
  }
  return s.cgram == r.cg && s.addr_counter == r.ac && (s.target == lcd::Target::Cgram) == r.cg_target &&
         s.entry_increment == r.increment && s.entry_shift == r.shift && s.display_on == r.display &&
         s.cursor_on == r.cursor && s.blink_on == r.blink && s.four_bit_mode == !r.dl8 &&
         s.two_line_mode == r.lines2 && s.font_5x10 == r.font10 && s.unsupported_commands == r.noops;
}

/// A random command/data byte, biased towards the commands a driver uses.
inline lcd::LcdWrite random_write(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 9);
  std::uniform_int_distribution<int> byte(0, 255);
  switch (pick(rng)) {
    case 0: return {false, static_cast<std::uint8_t>(0x80 | byte(rng))};
    case 1: return {false, static_cast<std::uint8_t>(0x40 | (byte(rng) & 0x3F))};
    case 2: return {false, static_cast<std::uint8_t>(byte(rng))};
    case 3: return {false, static_cast<std::uint8_t>(0x04 | (byte(rng) & 0x03))};
    default: return {true, static_cast<std::uint8_t>(byte(rng))};
  }
}

// ---- glyph residency --------------------------------------------------

/// Straight-line LRU over eight slots: keep required digits, fill the lowest
/// free slot, otherwise evict the oldest request, lowest slot on ties.
struct RefSlots {
  std::array<int, 8> digit;  // -1 = free
  std::array<std::uint64_t, 8> used{};
  std::uint64_t gen = 0;

  RefSlots() { digit.fill(-1); }

  std::vector<glyphs::SlotLoad> request(const glyphs::DigitSet& want) {
    ++gen;
    std::vector<glyphs::SlotLoad> loads;
    for (int s = 0; s < 8; ++s) {
      if (digit[s] >= 0 && want.test(digit[s])) used[s] = gen;
    }
    for (int d = 0; d < 10; ++d) {
      if (!want.test(d)) continue;
      bool have = false;
      for (int s = 0; s < 8; ++s) have = have || digit[s] == d;
      if (have) continue;
      int best = -1;
      for (int s = 0; s < 8 && best < 0; ++s) {
        if (digit[s] < 0) best = s;
      }
      if (best < 0) {
        for (int s = 0; s < 8; ++s) {
          if (want.test(digit[s])) continue;
          if (best < 0 || used[s] < used[best]) best = s;
        }
      }
      digit[best] = d;
      used[best] = gen;
      loads.push_back({best, d});
    }
    return loads;
  }
};

inline clock::TimeOfDay random_time(std::mt19937_64& rng) {
  return time_after(std::uniform_int_distribution<std::uint64_t>(0, 86399)(rng));
}

// ---- listing differential --------------------------------------------

/// The three adjustment listings, verbatim, inside one polling loop.
inline basic::Program listings_program() {
  std::string src = "Do\n";
  for (const char* f : {"firmware/change_hour.bas", "firmware/change_minute.bas", "firmware/change_second.bas"}) {
    src += read_file(source_path(f));
  }
  src += "Loop\n";
  return basic::parse_source(src);
}

/// One button (or none) low per scan, never the same button in two
/// consecutive scans, so every low scan is exactly one press.
inline std::vector<std::optional<clock::Button>> random_trace(std::mt19937_64& rng, int presses) {
  std::vector<std::optional<clock::Button>> trace;
  std::uniform_int_distribution<int> pick(0, 4);
  std::optional<clock::Button> prev;
  int n = 0;
  while (n < presses) {
    const int p = pick(rng);
    std::optional<clock::Button> b;
    if (p == 1 || p == 2) b = clock::Button::Set;  // SET twice as likely, to visit every mode
    if (p == 3) b = clock::Button::Inc;
    if (p == 4) b = clock::Button::Dec;
    if (b && b == prev) b.reset();
    if (b) ++n;
    trace.push_back(b);
    prev = b;
  }
  return trace;
}

inline int pin_bit(clock::Button b) {
  return b == clock::Button::Set ? 2 : b == clock::Button::Inc ? 1 : 0;
}

struct DiffResult {
  std::size_t scans = 0;
  std::size_t mismatches = 0;
  std::string first_mismatch;
};

/// Runs the listings and the native machine side by side, one press per
/// scan, comparing Hh/Mm/Ss after every scan.
inline DiffResult diff_listings(const basic::Program& program, const std::vector<std::optional<clock::Button>>& trace,
                                clock::TimeOfDay start = {}) {
  basic::ScanPinScript pins({3});
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i]) pins.set_low(i + 1, {3, pin_bit(*trace[i])});
  }

  basic::Env env;
  env.set("hh", static_cast<basic::Value>(start.hh));
  env.set("mm", static_cast<basic::Value>(start.mm));
  env.set("ss", static_cast<basic::Value>(start.ss));
  env.pin_source = [&](basic::PinRef p, std::uint64_t scan) { return pins.level(p, scan); };

  clock::ClockFsm fsm(clock::ClockOptions{}, start);
  DiffResult result;
  env.scan_hook = [&](basic::Env& e) {
    // Yield k ends scan k-1.
    const std::uint64_t done = e.scan_counter - 1;
    if (done >= 1) {
      if (trace[done - 1]) fsm.on_press(*trace[done - 1]);
      const clock::TimeOfDay b{e.get("hh"), e.get("mm"), e.get("ss")};
      ++result.scans;
      if (b != fsm.time()) {
        if (result.mismatches++ == 0) {
          result.first_mismatch = "scan " + std::to_string(done) + ": basic " + b.to_string() + " native " +
                                  fsm.time().to_string();
        }
      }
    }
    return done < trace.size();
  };
  basic::run(program, env, 100 * trace.size() + 1000);
  return result;
}

}  // namespace testsupport

#include "clocksim/glyphs.hpp"

#include <fstream>
#include <sstream>

namespace clocksim::glyphs {
namespace {

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

bool all_space(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

std::optional<int> parse_header(std::string_view line) {
  constexpr std::string_view kPrefix = "digit ";
  if (line.size() != kPrefix.size() + 1 || line.substr(0, kPrefix.size()) != kPrefix) return std::nullopt;
  const char d = line.back();
  if (d < '0' || d > '9') return std::nullopt;
  return d - '0';
}

std::string at_line(int line) { return " (line " + std::to_string(line) + ")"; }

}  // namespace

bool Glyph::blank() const {
  for (auto r : rows) {
    if (r != 0) return false;
  }
  return true;
}

GlyphSet parse_glyph_asset(std::string_view text, ParseOptions options) {
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos < text.size();) {
    const std::size_t nl = text.find('\n', pos);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    lines.push_back(trim_cr(text.substr(pos, end - pos)));
    pos = end + 1;
  }

  GlyphSet glyphs{};
  std::array<bool, kDigits> seen{};
  std::size_t i = 0;
  while (i < lines.size()) {
    if (all_space(lines[i])) {
      ++i;
      continue;
    }
    const int header_line = static_cast<int>(i) + 1;
    const auto digit = parse_header(lines[i]);
    if (!digit) {
      throw GlyphError(GlyphErrc::BadHeader, "expected \"digit N\"" + at_line(header_line), header_line);
    }
    if (seen[*digit]) {
      throw GlyphError(GlyphErrc::DuplicateDigit,
                       "digit " + std::to_string(*digit) + " defined twice" + at_line(header_line), header_line);
    }
    seen[*digit] = true;
    ++i;

    Glyph g;
    for (int r = 0; r < lcd::kCellRows; ++r, ++i) {
      const int line_no = static_cast<int>(i) + 1;
      if (i >= lines.size() || lines[i].size() != lcd::kCellCols) {
        throw GlyphError(GlyphErrc::BadDimensions,
                         "digit " + std::to_string(*digit) + " needs 8 rows of 5 pixels" + at_line(line_no), line_no);
      }
      std::uint8_t bits = 0;
      for (char c : lines[i]) {
        if (c != '#' && c != '.') {
          throw GlyphError(GlyphErrc::BadDimensions,
                           std::string("pixel must be '#' or '.', got '") + c + "'" + at_line(line_no), line_no);
        }
        bits = static_cast<std::uint8_t>(bits << 1 | (c == '#'));
      }
      g.rows[r] = bits;
    }
    if (g.rows[lcd::kCellRows - 1] != 0) {
      throw GlyphError(GlyphErrc::NonBlankCursorRow,
                       "digit " + std::to_string(*digit) + " draws on the cursor row" + at_line(static_cast<int>(i)),
                       static_cast<int>(i));
    }
    if (g.blank() && !options.allow_blank) {
      throw GlyphError(GlyphErrc::BlankGlyph, "digit " + std::to_string(*digit) + " is blank" + at_line(header_line),
                       header_line);
    }
    glyphs[*digit] = g;
  }

  for (int d = 0; d < kDigits; ++d) {
    if (!seen[d]) throw GlyphError(GlyphErrc::MissingDigit, "digit " + std::to_string(d) + " missing");
  }
  for (int a = 0; a < kDigits; ++a) {
    for (int b = a + 1; b < kDigits; ++b) {
      if (glyphs[a] == glyphs[b]) {
        throw GlyphError(GlyphErrc::IndistinctGlyphs,
                         "digits " + std::to_string(a) + " and " + std::to_string(b) + " share a bitmap");
      }
    }
  }
  return glyphs;
}

std::string serialize_glyph_asset(const GlyphSet& glyphs) {
  std::string out;
  for (int d = 0; d < kDigits; ++d) {
    if (d > 0) out += '\n';
    out += "digit " + std::to_string(d) + '\n';
    for (auto row : glyphs[d].rows) {
      for (int c = lcd::kCellCols - 1; c >= 0; --c) out += (row >> c) & 1 ? '#' : '.';
      out += '\n';
    }
  }
  return out;
}

GlyphSet load_glyph_asset(const std::string& path, ParseOptions options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open glyph asset " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_glyph_asset(ss.str(), options);
}

DigitSet required_digits(const clock::TimeOfDay& t) {
  DigitSet set;
  for (int v : {t.hh, t.mm, t.ss}) {
    set.set(v / 10);
    set.set(v % 10);
  }
  return set;
}

std::optional<int> SlotMap::slot_of(int digit) const {
  for (int s = 0; s < kSlots; ++s) {
    if (digit_in_slot_[s] == digit) return s;
  }
  return std::nullopt;
}

int SlotMap::resident_count() const {
  int n = 0;
  for (const auto& d : digit_in_slot_) n += d.has_value();
  return n;
}

std::vector<SlotLoad> SlotMap::ensure_resident(DigitSet digits) {
  if (digits.count() > kSlots) {
    throw GlyphError(GlyphErrc::TooManyDigits,
                     std::to_string(digits.count()) + " distinct digits requested, only 8 CGRAM slots");
  }
  ++generation_;
  std::vector<SlotLoad> loads;
  std::array<bool, kSlots> pinned{};
  for (int d = 0; d < kDigits; ++d) {
    if (!digits.test(d)) continue;
    if (auto s = slot_of(d)) pinned[*s] = true;
  }
  for (int d = 0; d < kDigits; ++d) {
    if (!digits.test(d) || slot_of(d)) continue;
    int victim = -1;
    for (int s = 0; s < kSlots && victim < 0; ++s) {
      if (!digit_in_slot_[s]) victim = s;
    }
    if (victim < 0) {
      for (int s = 0; s < kSlots; ++s) {
        if (pinned[s]) continue;
        if (victim < 0 || last_used_[s] < last_used_[victim]) victim = s;
      }
    }
    digit_in_slot_[victim] = d;
    pinned[victim] = true;
    loads.push_back({victim, d});
  }
  for (int s = 0; s < kSlots; ++s) {
    if (pinned[s]) last_used_[s] = generation_;
  }
  return loads;
}

std::vector<lcd::LcdWrite> program_cgram(const std::vector<SlotLoad>& loads, const GlyphSet& glyphs,
                                         std::uint8_t restore_ddram_addr) {
  std::vector<lcd::LcdWrite> writes;
  if (loads.empty()) return writes;
  writes.reserve(loads.size() * 9 + 1);
  for (const auto& load : loads) {
    writes.push_back({false, static_cast<std::uint8_t>(0x40 | load.slot << 3)});
    for (auto row : glyphs[load.digit].rows) writes.push_back({true, row});
  }
  writes.push_back({false, static_cast<std::uint8_t>(0x80 | restore_ddram_addr)});
  return writes;
}

std::array<std::uint8_t, 8> compose_display(const clock::TimeOfDay& t, const SlotMap& slots, Layout layout) {
  auto code = [&](int digit) {
    const auto s = slots.slot_of(digit);
    if (!s) throw GlyphError(GlyphErrc::NotResident, "digit " + std::to_string(digit) + " is not in CGRAM");
    return static_cast<std::uint8_t>(*s);
  };
  const int first = layout == Layout::HourFirst ? t.hh : t.ss;
  const int last = layout == Layout::HourFirst ? t.ss : t.hh;
  return {code(first / 10), code(first % 10), kColon, code(t.mm / 10),
          code(t.mm % 10), kColon, code(last / 10), code(last % 10)};
}

lcd::Screen digit_sheet(const GlyphSet& glyphs) {
  lcd::Screen screen;
  for (int d = 0; d < kDigits; ++d) screen.cells[0][d] = glyphs[d].cell();
  return screen;
}

}  // namespace clocksim::glyphs

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "clocksim/glyphs.hpp"

namespace clocksim::sim {

enum class SimErrc { ConfigError, ScriptError, FirmwareError, PortInUse };

class SimError : public std::runtime_error {
 public:
  SimError(SimErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  SimErrc code() const noexcept { return code_; }

 private:
  SimErrc code_;
};

/// CLI exit status for an error: 2 config/script, 3 firmware.
int exit_code(SimErrc code);

enum class FirmwareKind { Native, Basic };

struct SimConfig {
  FirmwareKind firmware = FirmwareKind::Native;
  std::string firmware_path;  // FirmwareKind::Basic only
  std::string glyph_asset;
  glyphs::Layout layout = glyphs::Layout::HourFirst;
  double speed = 0.0;  // real-time multiplier, 0 = as fast as possible
  bool freeze_while_adjusting = true;
  std::uint32_t scan_ms = 100;  // virtual ms per firmware scan
  bool every_frame = false;     // emit a frame per step, not only on change
};

/// Throws SimError(ConfigError) for out-of-range or inconsistent settings.
void validate(const SimConfig& config);

/// "hms" / "smh"
std::string_view to_string(glyphs::Layout layout);
glyphs::Layout parse_layout(std::string_view text);

}  // namespace clocksim::sim

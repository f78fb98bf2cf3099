#include "clocksim/sim/config.hpp"

#include <cmath>

namespace clocksim::sim {

int exit_code(SimErrc code) {
  switch (code) {
    case SimErrc::ConfigError:
    case SimErrc::ScriptError:
    case SimErrc::PortInUse: return 2;
    case SimErrc::FirmwareError: return 3;
  }
  return 1;
}

void validate(const SimConfig& config) {
  auto fail = [](const std::string& msg) { throw SimError(SimErrc::ConfigError, msg); };
  if (!std::isfinite(config.speed) || config.speed < 0) fail("speed must be a finite number >= 0");
  if (config.scan_ms < 1 || config.scan_ms > 1000) fail("scan_ms must be in 1..1000");
  if (config.firmware == FirmwareKind::Basic) {
    if (config.firmware_path.empty()) fail("BASIC firmware needs a source file");
    // The listings block inside their adjustment loops, so nothing counts there.
    if (!config.freeze_while_adjusting) fail("keep-ticking is only available with the native firmware");
  }
}

std::string_view to_string(glyphs::Layout layout) {
  return layout == glyphs::Layout::HourFirst ? "hms" : "smh";
}

glyphs::Layout parse_layout(std::string_view text) {
  if (text == "hms") return glyphs::Layout::HourFirst;
  if (text == "smh") return glyphs::Layout::SecondFirst;
  throw SimError(SimErrc::ConfigError, "unknown layout '" + std::string(text) + "' (hms, smh)");
}

}  // namespace clocksim::sim

// Button scripts: "<at_ms> <set|inc|dec> <down|up>" per line, '#' comments.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "clocksim/clock.hpp"

namespace clocksim::sim {

using ButtonScript = std::vector<clock::ButtonEvent>;

/// Throws SimError(ScriptError) with the offending line number on bad syntax,
/// decreasing timestamps or broken down/up alternation.
ButtonScript parse_script(std::string_view text);
ButtonScript load_script(const std::string& path);
std::string format_script(const ButtonScript& script);

/// Ordering and alternation checks, plus every event at or before `duration_ms`.
void validate_script(const ButtonScript& script, clock::VirtualMs duration_ms);

}  // namespace clocksim::sim

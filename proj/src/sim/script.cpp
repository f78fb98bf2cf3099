#include "clocksim/sim/script.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "clocksim/sim/config.hpp"

namespace clocksim::sim {
namespace {

[[noreturn]] void script_error(const std::string& msg, int line = 0) {
  throw SimError(SimErrc::ScriptError,
                 "button script" + (line > 0 ? " line " + std::to_string(line) : std::string()) + ": " + msg);
}

// Shared by parse_script and validate_script; `line_of(i)` names event i.
template <typename LineOf>
void check_sequence(const ButtonScript& script, LineOf line_of) {
  std::array<bool, 3> down{};
  for (std::size_t i = 0; i < script.size(); ++i) {
    const auto& ev = script[i];
    if (i > 0 && ev.at_ms < script[i - 1].at_ms) script_error("timestamps must not decrease", line_of(i));
    bool& d = down[static_cast<int>(ev.button)];
    const bool pressing = ev.edge == clock::Edge::Press;
    if (d == pressing) {
      script_error(std::string(clock::to_string(ev.button)) + (pressing ? " down twice" : " up without down"),
                   line_of(i));
    }
    d = pressing;
  }
}

}  // namespace

ButtonScript parse_script(std::string_view text) {
  ButtonScript script;
  std::vector<int> lines;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    std::istringstream in{std::string(line)};
    std::string at, button, action, extra;
    if (!(in >> at)) continue;
    if (!(in >> button >> action) || (in >> extra)) script_error("expected \"<at_ms> <button> <down|up>\"", line_no);

    clock::VirtualMs at_ms = 0;
    const auto [ptr, ec] = std::from_chars(at.data(), at.data() + at.size(), at_ms);
    if (ec != std::errc{} || ptr != at.data() + at.size()) script_error("bad timestamp '" + at + "'", line_no);
    const auto b = clock::parse_button(button);
    if (!b) script_error("unknown button '" + button + "' (set, inc, dec)", line_no);
    if (action != "down" && action != "up") script_error("unknown action '" + action + "' (down, up)", line_no);

    script.push_back({*b, action == "down" ? clock::Edge::Press : clock::Edge::Release, at_ms});
    lines.push_back(line_no);
  }
  check_sequence(script, [&](std::size_t i) { return lines[i]; });
  return script;
}

ButtonScript load_script(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SimError(SimErrc::ScriptError, "cannot open button script " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_script(ss.str());
}

std::string format_script(const ButtonScript& script) {
  std::string out;
  for (const auto& ev : script) {
    out += std::to_string(ev.at_ms) + ' ' + std::string(clock::to_string(ev.button)) +
           (ev.edge == clock::Edge::Press ? " down\n" : " up\n");
  }
  return out;
}

void validate_script(const ButtonScript& script, clock::VirtualMs duration_ms) {
  check_sequence(script, [](std::size_t) { return 0; });
  if (!script.empty() && script.back().at_ms > duration_ms) {
    script_error("event at " + std::to_string(script.back().at_ms) + " ms is past the run duration of " +
                 std::to_string(duration_ms) + " ms");
  }
}

}  // namespace clocksim::sim

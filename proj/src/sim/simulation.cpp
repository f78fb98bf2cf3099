#include "clocksim/sim/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

#include "clocksim/basic/interpreter.hpp"
#include "clocksim/basic/parser.hpp"

namespace clocksim::sim {
namespace {

// Statements one firmware scan may execute before it is declared stuck.
constexpr std::uint64_t kSegmentFuel = 1'000'000;
constexpr int kButtonPort = 3;

// SET, INCREMENT, DECREMENT on P3.2, P3.1, P3.0 (active-low).
int button_bit(clock::Button b) {
  switch (b) {
    case clock::Button::Set: return 2;
    case clock::Button::Inc: return 1;
    case clock::Button::Dec: return 0;
  }
  return -1;
}

[[noreturn]] void firmware_error(const std::string& msg) { throw SimError(SimErrc::FirmwareError, msg); }

glyphs::GlyphSet load_glyphs(const SimConfig& config) {
  validate(config);
  try {
    return glyphs::load_glyph_asset(config.glyph_asset);
  } catch (const std::exception& e) {
    throw SimError(SimErrc::ConfigError, e.what());
  }
}

std::optional<basic::Program> load_firmware(const SimConfig& config) {
  if (config.firmware == FirmwareKind::Native) return std::nullopt;
  try {
    return basic::load_program(config.firmware_path);
  } catch (const basic::BasicError& e) {
    firmware_error(config.firmware_path + ": " + e.what());
  } catch (const std::exception& e) {
    throw SimError(SimErrc::ConfigError, e.what());
  }
}

}  // namespace

struct Simulation::BasicRuntime {
  explicit BasicRuntime(basic::Program p) : program(std::move(p)), interp(program, env) {}

  basic::Program program;
  basic::Env env;
  basic::Interpreter interp;
  VirtualMs next_scan_at = 0;
  std::array<bool, 3> down{};
  std::array<bool, 3> pressed_since_scan{};
  std::array<bool, 3> low{};
  std::optional<VirtualMs> last_event;
  clock::TimeOfDay time;
  clock::AdjustMode mode = clock::AdjustMode::Run;
};

std::string snapshot(const Frame& frame) {
  return "T=" + std::to_string(frame.virtual_ms) + " " + frame.time.to_string() +
         " mode=" + std::string(clock::to_string(frame.mode)) + "\n" + frame.ascii();
}

lcd::Screen render_codes(const CellCodes& cells, const std::array<std::uint8_t, 64>& cgram, bool display_on) {
  lcd::LcdState state;
  state.cgram = cgram;
  state.display_on = display_on;
  state.ddram.fill(lcd::kBlank);
  for (int r = 0; r < lcd::kRows; ++r) {
    for (int c = 0; c < lcd::kCols; ++c) state.ddram[lcd::ddram_index(lcd::ddram_address(r, c))] = cells[r][c];
  }
  return lcd::Lcd(state).render_screen();
}

Frame render_face(const glyphs::GlyphSet& glyphs, const clock::TimeOfDay& t, glyphs::Layout layout) {
  lcd::Lcd lcd;
  lcd::init_4bit(lcd);
  glyphs::SlotMap slots;
  for (const auto& w : glyphs::program_cgram(slots.ensure_resident(glyphs::required_digits(t)), glyphs)) {
    lcd.send_4bit(w);
  }
  lcd.send_4bit({false, 0x80});
  for (auto c : glyphs::compose_display(t, slots, layout)) lcd.send_4bit({true, c});

  Frame f;
  f.time = t;
  for (int r = 0; r < lcd::kRows; ++r) {
    for (int c = 0; c < lcd::kCols; ++c) f.cells[r][c] = lcd.code_at(r, c);
  }
  f.cgram = lcd.state().cgram;
  f.display_on = lcd.state().display_on;
  f.pixels = lcd.render_screen();
  return f;
}

Simulation::Simulation(const SimConfig& config) : Simulation(config, load_glyphs(config), load_firmware(config)) {}

Simulation::Simulation(const SimConfig& config, glyphs::GlyphSet glyphs, std::optional<basic::Program> firmware)
    : config_(config), glyphs_(glyphs), fsm_(clock::ClockOptions{config.freeze_while_adjusting}) {
  validate(config_);
  if (config_.firmware == FirmwareKind::Basic) {
    if (!firmware) throw SimError(SimErrc::ConfigError, "BASIC firmware selected but no program given");
    basic_ = std::make_unique<BasicRuntime>(std::move(*firmware));
    auto& rt = *basic_;
    rt.env.set("scanms", static_cast<basic::Value>(config_.scan_ms));
    rt.env.pin_source = [&rt](basic::PinRef pin, std::uint64_t) -> std::optional<int> {
      if (pin.port != kButtonPort) return std::nullopt;
      for (clock::Button b : clock::kButtons) {
        if (button_bit(b) == pin.bit) return rt.low[static_cast<int>(b)] ? 0 : 1;
      }
      return 1;
    };
    rt.env.lcd_sink = [this](lcd::LcdWrite w) {
      send(w);
      lcd_dirty_ = true;
    };
    rt.env.wait_sink = [this](std::int32_t ms) { now_ += static_cast<VirtualMs>(ms); };
  }
  init_4bit(lcd_);
  refresh(false);
}

Simulation::~Simulation() = default;

clock::TimeOfDay Simulation::time() const { return basic_ ? basic_->time : fsm_.time(); }
clock::AdjustMode Simulation::mode() const { return basic_ ? basic_->mode : fsm_.mode(); }
std::uint64_t Simulation::scans() const { return basic_ ? basic_->env.scan_counter : 0; }

void Simulation::set_speed(double speed) {
  SimConfig next = config_;
  next.speed = speed;
  validate(next);
  config_.speed = speed;
}

void Simulation::send(lcd::LcdWrite w) {
  if (lcd_.state().four_bit_mode) {
    lcd_.send_4bit(w);
  } else {
    lcd_.write(w);
  }
}

void Simulation::press(clock::Button button, clock::Edge edge) {
  const clock::ButtonEvent ev{button, edge, now_};
  if (!basic_) {
    fsm_.on_button(ev);
    refresh(config_.every_frame);
    return;
  }
  // Same checks the native machine applies.
  auto& rt = *basic_;
  const int i = static_cast<int>(button);
  const bool pressing = edge == clock::Edge::Press;
  if (rt.last_event && now_ < *rt.last_event) {
    throw clock::ClockError(clock::ClockErrc::OutOfOrder, "button event out of order");
  }
  if (rt.down[i] == pressing) {
    throw clock::ClockError(clock::ClockErrc::ProtocolViolation,
                            std::string(clock::to_string(button)) + (pressing ? " pressed twice" : " released while up"));
  }
  rt.last_event = now_;
  rt.down[i] = pressing;
  if (pressing) rt.pressed_since_scan[i] = true;
}

void Simulation::run_until(VirtualMs t) {
  if (basic_) {
    run_basic_until(t);
  } else {
    run_native_until(t);
  }
}

void Simulation::run_through(VirtualMs t) { run_until(basic_ ? t + 1 : t); }

void Simulation::run_native_until(VirtualMs t) {
  while (now_ < t) {
    VirtualMs step_to = t;
    const bool ticking = fsm_.mode() == clock::AdjustMode::Run || !config_.freeze_while_adjusting;
    if (ticking && (sink_ || config_.every_frame)) {
      step_to = std::min<VirtualMs>(t, now_ + (1000 - fsm_.ms_accumulator()));
    }
    fsm_.advance(step_to - now_);
    now_ = step_to;
    refresh(config_.every_frame);
  }
}

void Simulation::run_basic_until(VirtualMs t) {
  auto& rt = *basic_;
  while (!rt.interp.finished() && rt.next_scan_at < t) {
    now_ = std::max(now_, rt.next_scan_at);
    for (int b = 0; b < 3; ++b) {
      rt.low[b] = rt.down[b] || rt.pressed_since_scan[b];
      rt.pressed_since_scan[b] = false;
    }
    std::uint64_t fuel = kSegmentFuel;
    try {
      rt.interp.resume(fuel);
    } catch (const basic::BasicError& e) {
      firmware_error(e.what());
    }

    const clock::TimeOfDay time{rt.env.get("hh"), rt.env.get("mm"), rt.env.get("ss")};
    if (!time.valid()) {
      firmware_error("firmware left Hh/Mm/Ss out of range: " + std::to_string(time.hh) + ":" +
                     std::to_string(time.mm) + ":" + std::to_string(time.ss));
    }
    const int mode = rt.env.get("mode");
    if (mode < 0 || mode > 3) firmware_error("firmware Mode must be 0-3, got " + std::to_string(mode));
    rt.time = time;
    rt.mode = static_cast<clock::AdjustMode>(mode);
    refresh(config_.every_frame);
    rt.next_scan_at = now_ + config_.scan_ms;
  }
  now_ = std::max(now_, t);
}

void Simulation::refresh(bool force_emit) {
  const clock::TimeOfDay t = time();
  if (!shown_time_ || *shown_time_ != t) {
    const auto loads = slots_.ensure_resident(glyphs::required_digits(t));
    for (const auto& w : glyphs::program_cgram(loads, glyphs_)) send(w);
    const auto codes = glyphs::compose_display(t, slots_, config_.layout);
    if (!shown_time_ || codes != shown_codes_) {
      send({false, 0x80});
      for (auto c : codes) send({true, c});
    }
    shown_time_ = t;
    shown_codes_ = codes;
    lcd_dirty_ = true;
  }

  const clock::AdjustMode m = mode();
  if (!lcd_dirty_ && !force_emit && have_frame_ && m == frame_.mode) return;

  Frame f;
  f.virtual_ms = now_;
  f.time = t;
  f.mode = m;
  for (int r = 0; r < lcd::kRows; ++r) {
    for (int c = 0; c < lcd::kCols; ++c) f.cells[r][c] = lcd_.code_at(r, c);
  }
  f.cgram = lcd_.state().cgram;
  f.display_on = lcd_.state().display_on;
  f.pixels = lcd_.render_screen();
  lcd_dirty_ = false;

  const bool changed =
      !have_frame_ || f.pixels != frame_.pixels || f.mode != frame_.mode || f.time != frame_.time;
  const bool emit = have_frame_ && (changed || force_emit);
  frame_ = std::move(f);
  have_frame_ = true;
  if (emit && sink_) sink_(frame_);
}

HeadlessResult run_headless(const SimConfig& config, const ButtonScript& script, VirtualMs duration_ms,
                            bool record_frames) {
  validate(config);
  validate_script(script, duration_ms);
  Simulation sim(config);

  HeadlessResult result;
  if (record_frames) {
    result.frames.push_back(sim.frame());
    sim.set_frame_sink([&](const Frame& f) { result.frames.push_back(f); });
  }

  using Clock = std::chrono::steady_clock;
  const auto wall_start = Clock::now();
  auto advance = [&](VirtualMs t, bool through) {
    if (config.speed > 0) {
      // Wall-clock pacing: never run ahead of elapsed real time x speed.
      while (sim.now() < t) {
        const double wall_ms =
            std::chrono::duration<double, std::milli>(Clock::now() - wall_start).count();
        const auto allowed = static_cast<VirtualMs>(wall_ms * config.speed);
        if (allowed > sim.now()) {
          sim.run_until(std::min(t, allowed));
        } else {
          std::this_thread::sleep_for(std::chrono::milliseconds(5));
        }
      }
    }
    through ? sim.run_through(t) : sim.run_until(t);
  };

  for (const auto& ev : script) {
    advance(ev.at_ms, false);
    try {
      sim.press(ev.button, ev.edge);
    } catch (const clock::ClockError& e) {
      throw SimError(SimErrc::ScriptError, e.what());
    }
  }
  advance(duration_ms, true);
  result.final_frame = sim.frame();
  return result;
}

}  // namespace clocksim::sim

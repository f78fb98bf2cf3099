// clocksim: headless runs, the HTTP/WS service and one-shot renders.
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "clocksim/sim/service.hpp"
#include "clocksim/sim/simulation.hpp"

#ifndef CLOCKSIM_DEFAULT_GLYPHS
#define CLOCKSIM_DEFAULT_GLYPHS "assets/bangla_digits.glyphs"
#endif

namespace {

using namespace clocksim;

struct ConfigFlags {
  std::string firmware = "native";
  std::string glyphs = CLOCKSIM_DEFAULT_GLYPHS;
  std::string layout = "hms";
  double speed = 0;
  std::uint32_t scan_ms = 100;
  bool keep_ticking = false;
  bool every_frame = false;

  void add_to(CLI::App* app) {
    app->add_option("--firmware", firmware, "native, or a .bas firmware file")->capture_default_str();
    app->add_option("--glyphs", glyphs, "digit glyph asset")->capture_default_str();
    app->add_option("--layout", layout, "hms (HH:MM:SS) or smh (SS:MM:HH)")->capture_default_str();
    app->add_option("--speed", speed, "real-time multiplier, 0 = as fast as possible")->capture_default_str();
    app->add_option("--scan-ms", scan_ms, "virtual ms per firmware scan")->capture_default_str();
    app->add_flag("--keep-ticking", keep_ticking, "keep counting while the time is being set (native only)");
    app->add_flag("--every-frame", every_frame, "emit a frame per step, not only on change");
  }

  sim::SimConfig build() const {
    sim::SimConfig c;
    if (firmware != "native") {
      c.firmware = sim::FirmwareKind::Basic;
      c.firmware_path = firmware;
    }
    c.glyph_asset = glyphs;
    c.layout = sim::parse_layout(layout);
    c.speed = speed;
    c.scan_ms = scan_ms;
    c.freeze_while_adjusting = !keep_ticking;
    c.every_frame = every_frame;
    sim::validate(c);
    return c;
  }
};

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sim::SimError(sim::SimErrc::ConfigError, "cannot write " + path.string());
  out << text;
}

std::string snapshot_name(const clock::TimeOfDay& t) {
  std::string name = t.to_string();
  std::replace(name.begin(), name.end(), ':', '_');
  return name + ".txt";
}

int serve(const sim::SimConfig& config, const sim::ServeOptions& options) {
  // Signals are taken synchronously here, so every service thread has them blocked.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  sim::Service service(config, options);
  std::cout << "serving on http://" << options.host << ":" << service.port() << "/" << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  service.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Virtual-time simulator of a Bangla digit clock on a 16x2 LCD"};
  app.require_subcommand(1);

  ConfigFlags flags;
  std::string script_path;
  clock::VirtualMs duration_ms = 0;
  std::string snapshot_dir;
  std::string frame_log;
  auto* run = app.add_subcommand("run", "run a button script headless and print the final frame");
  flags.add_to(run);
  run->add_option("--script", script_path, "button script (default: no presses)");
  run->add_option("--duration-ms", duration_ms, "virtual run length")->required();
  run->add_option("--snapshot-dir", snapshot_dir, "write the final frame as HH_MM_SS.txt here");
  run->add_option("--frame-log", frame_log, "write every emitted frame to this file");

  ConfigFlags serve_flags;
  serve_flags.speed = 1;
  sim::ServeOptions serve_options;
  auto* serve_cmd = app.add_subcommand("serve", "serve the HTTP/WebSocket API for the browser UI");
  serve_flags.add_to(serve_cmd);
  serve_cmd->add_option("--port", serve_options.port, "0 picks a free port")->capture_default_str();
  serve_cmd->add_option("--host", serve_options.host)->capture_default_str();
  serve_cmd->add_option("--ui-dir", serve_options.ui_dir, "static UI assets served at /");

  std::string time_text;
  std::string render_glyphs = CLOCKSIM_DEFAULT_GLYPHS;
  std::string render_layout = "hms";
  bool sheet = false;
  std::string render_out;
  auto* render = app.add_subcommand("render", "print one clock face (or the ten-digit sheet)");
  render->add_option("--time", time_text, "HH:MM:SS");
  render->add_option("--glyphs", render_glyphs, "digit glyph asset")->capture_default_str();
  render->add_option("--layout", render_layout, "hms or smh")->capture_default_str();
  render->add_flag("--sheet", sheet, "all ten digits on row 0 instead of a clock face");
  render->add_option("--out", render_out, "write to a file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto config = flags.build();
      sim::ButtonScript script;
      if (!script_path.empty()) script = sim::load_script(script_path);
      const auto result = sim::run_headless(config, script, duration_ms, !frame_log.empty());
      if (!frame_log.empty()) {
        std::string log;
        for (const auto& f : result.frames) log += sim::snapshot(f) + "\n";
        write_file(frame_log, log);
      }
      const std::string text = sim::snapshot(result.final_frame);
      if (!snapshot_dir.empty()) {
        std::filesystem::create_directories(snapshot_dir);
        write_file(std::filesystem::path(snapshot_dir) / snapshot_name(result.final_frame.time), text);
      }
      std::cout << text;
      return 0;
    }

    if (*serve_cmd) return serve(serve_flags.build(), serve_options);

    if (*render) {
      glyphs::GlyphSet set;
      try {
        set = glyphs::load_glyph_asset(render_glyphs);
      } catch (const std::exception& e) {
        throw sim::SimError(sim::SimErrc::ConfigError, e.what());
      }
      std::string text;
      if (sheet) {
        text = glyphs::digit_sheet(set).to_ascii();
      } else {
        const auto t = clock::TimeOfDay::parse(time_text);
        if (!t) throw sim::SimError(sim::SimErrc::ConfigError, "--time wants HH:MM:SS, got '" + time_text + "'");
        text = sim::snapshot(sim::render_face(set, *t, sim::parse_layout(render_layout)));
      }
      if (render_out.empty()) {
        std::cout << text;
      } else {
        write_file(render_out, text);
      }
      return 0;
    }
  } catch (const sim::SimError& e) {
    std::cerr << "clocksim: " << e.what() << "\n";
    return sim::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "clocksim: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

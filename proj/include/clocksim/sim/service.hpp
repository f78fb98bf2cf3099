// HTTP + WebSocket front end for one running simulation.
//
//   GET  /api/state    current frame as JSON
//   POST /api/button   {"button":"set|inc|dec","action":"down|up"} -> 204
//   GET  /api/config   the SimConfig as JSON
//   POST /api/config   {"speed":x} -> the updated config
//   WS   /api/events   one JSON frame per display change
//   GET  /             static UI assets, or a short built-in page
#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "json.hpp"

#include "clocksim/sim/simulation.hpp"

namespace clocksim::sim {

struct ServeOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8080;  // 0 picks a free port
  std::string ui_dir;         // empty: built-in page at GET /
};

/// The "pixels" field: 16 pixel rows x 80 columns, row-major, MSB first,
/// base64 encoded (160 bytes before encoding).
std::string encode_pixels(const lcd::Screen& screen);
nlohmann::json frame_json(const Frame& frame);
nlohmann::json config_json(const SimConfig& config);

class Service {
 public:
  /// Binds the port and starts serving. Throws SimError(PortInUse) or
  /// SimError(ConfigError).
  Service(const SimConfig& config, const ServeOptions& options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  std::uint16_t port() const;
  /// Blocks until stop() is called from another thread.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace clocksim::sim

#include "clocksim/sim/service.hpp"

#include <sys/socket.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <variant>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/transform_width.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace clocksim::sim {
namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using json = nlohmann::json;
using SteadyClock = std::chrono::steady_clock;

constexpr auto kIdleStep = std::chrono::milliseconds(10);

const char* kFallbackPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>clocksim</title></head>
<body>
<h1>clocksim</h1>
<p>No UI assets configured (start with --ui-dir). API:</p>
<ul>
<li>GET /api/state</li>
<li>POST /api/button {"button":"set|inc|dec","action":"down|up"}</li>
<li>GET, POST /api/config</li>
<li>WS /api/events</li>
</ul>
<pre id="lcd"></pre>
<script>
async function poll() {
  try {
    const s = await (await fetch('/api/state')).json();
    document.getElementById('lcd').textContent = s.time + '  ' + s.mode;
  } catch (e) {}
  setTimeout(poll, 500);
}
poll();
</script>
</body></html>
)";

std::string mime_type(const std::filesystem::path& p) {
  static const std::map<std::string, std::string> types = {
      {".html", "text/html"},  {".js", "text/javascript"}, {".mjs", "text/javascript"},
      {".css", "text/css"},    {".json", "application/json"}, {".svg", "image/svg+xml"},
      {".png", "image/png"},   {".ico", "image/x-icon"},      {".map", "application/json"},
  };
  const auto it = types.find(p.extension().string());
  return it == types.end() ? "application/octet-stream" : it->second;
}

// Blocking queue of serialized frames for one WebSocket subscriber.
class Outbox {
 public:
  void push(std::shared_ptr<const std::string> msg) {
    {
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(msg));
    }
    cv_.notify_one();
  }
  /// nullopt on timeout, nullptr once closed and drained.
  std::optional<std::shared_ptr<const std::string>> pop_for(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    if (!cv_.wait_for(lock, timeout, [&] { return closed_ || !queue_.empty(); })) return std::nullopt;
    if (queue_.empty()) return nullptr;
    auto msg = std::move(queue_.front());
    queue_.pop_front();
    return msg;
  }
  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  bool closed_ = false;
};

struct PressMsg {
  clock::Button button;
  clock::Edge edge;
  std::promise<std::optional<std::string>> done;  // error text on protocol violation
};
struct StateMsg {
  std::promise<json> done;
};
struct ConfigMsg {
  std::promise<json> done;
};
struct SpeedMsg {
  double speed;
  std::promise<std::optional<json>> done;  // nullopt when invalid
};
struct SubscribeMsg {
  std::shared_ptr<Outbox> outbox;
};
struct UnsubscribeMsg {
  std::shared_ptr<Outbox> outbox;
};
using Message = std::variant<PressMsg, StateMsg, ConfigMsg, SpeedMsg, SubscribeMsg, UnsubscribeMsg>;

}  // namespace

std::string encode_pixels(const lcd::Screen& screen) {
  constexpr int kWidth = lcd::kCols * lcd::kCellCols;
  constexpr int kHeight = lcd::kRows * lcd::kCellRows;
  std::string bits(kWidth * kHeight / 8, '\0');
  for (int y = 0; y < kHeight; ++y) {
    for (int x = 0; x < kWidth; ++x) {
      const auto& cell = screen.cells[y / lcd::kCellRows][x / lcd::kCellCols];
      if (!cell.pixel(y % lcd::kCellRows, x % lcd::kCellCols)) continue;
      const int i = y * kWidth + x;
      bits[i / 8] = static_cast<char>(bits[i / 8] | (0x80 >> (i % 8)));
    }
  }
  using namespace boost::archive::iterators;
  using It = base64_from_binary<transform_width<std::string::const_iterator, 6, 8>>;
  std::string out(It(bits.begin()), It(bits.end()));
  out.append((3 - bits.size() % 3) % 3, '=');
  return out;
}

json frame_json(const Frame& frame) {
  json cells = json::array();
  for (const auto& row : frame.cells) cells.push_back(json(std::vector<int>(row.begin(), row.end())));
  return {
      {"virtual_ms", frame.virtual_ms},
      {"time", frame.time.to_string()},
      {"mode", std::string(clock::to_string(frame.mode))},
      {"cells", cells},
      {"pixels", encode_pixels(frame.pixels)},
      {"cgram", std::vector<int>(frame.cgram.begin(), frame.cgram.end())},
      {"display_on", frame.display_on},
  };
}

json config_json(const SimConfig& config) {
  return {
      {"firmware", config.firmware == FirmwareKind::Native ? std::string("native") : config.firmware_path},
      {"glyph_asset", config.glyph_asset},
      {"layout", std::string(to_string(config.layout))},
      {"speed", config.speed},
      {"freeze_while_adjusting", config.freeze_while_adjusting},
      {"scan_ms", config.scan_ms},
      {"every_frame", config.every_frame},
  };
}

struct Service::Impl {
  Impl(const SimConfig& config, const ServeOptions& options)
      : options_(options), sim_(config), acceptor_(io_) {
    tcp::endpoint endpoint;
    try {
      endpoint = tcp::endpoint(asio::ip::make_address(options.host), options.port);
    } catch (const std::exception& e) {
      throw SimError(SimErrc::ConfigError, "bad host '" + options.host + "': " + e.what());
    }
    beast::error_code ec;
    acceptor_.open(endpoint.protocol(), ec);
    if (!ec) acceptor_.set_option(asio::socket_base::reuse_address(true), ec);
    if (!ec) acceptor_.bind(endpoint, ec);
    if (!ec) acceptor_.listen(asio::socket_base::max_listen_connections, ec);
    if (ec) {
      throw SimError(SimErrc::PortInUse,
                     "cannot listen on " + options.host + ":" + std::to_string(options.port) + ": " + ec.message());
    }
    port_ = acceptor_.local_endpoint().port();

    sim_.set_frame_sink([this](const Frame& f) {
      auto msg = std::make_shared<const std::string>(frame_json(f).dump());
      for (auto& s : subscribers_) s->push(msg);
    });
    sim_thread_ = std::thread([this] { sim_loop(); });
    accept_thread_ = std::thread([this] { accept_loop(); });
  }

  ~Impl() { stop(); }

  void stop() {
    {
      std::lock_guard lock(mu_);
      if (stopping_) return;
      stopping_ = true;
    }
    cv_.notify_all();

    // Wake the blocking accept() with a throwaway connection.
    try {
      asio::io_context io;
      tcp::socket poke(io);
      poke.connect(tcp::endpoint(acceptor_.local_endpoint().address(), port_));
    } catch (const std::exception&) {
    }
    if (accept_thread_.joinable()) accept_thread_.join();

    std::vector<std::thread> sessions;
    {
      std::lock_guard lock(mu_);
      for (auto [fd, outbox] : open_sockets_) {
        ::shutdown(fd, SHUT_RDWR);
        if (outbox) outbox->close();
      }
      sessions.swap(sessions_);
    }
    for (auto& t : sessions) t.join();
    if (sim_thread_.joinable()) sim_thread_.join();
    for (auto& s : subscribers_) s->close();
    stopped_.set_value();
  }

  // ---- simulation thread ----------------------------------------------

  // After stop() the message is dropped, which breaks its promise.
  void post(Message m) {
    {
      std::lock_guard lock(mu_);
      if (stopping_) return;
      inbox_.push_back(std::move(m));
    }
    cv_.notify_all();
  }

  void sim_loop() {
    auto wall_base = SteadyClock::now();
    VirtualMs virtual_base = 0;
    for (;;) {
      std::deque<Message> batch;
      {
        std::unique_lock lock(mu_);
        cv_.wait_for(lock, kIdleStep, [&] { return stopping_ || !inbox_.empty(); });
        if (stopping_) {
          inbox_.clear();
          break;
        }
        batch.swap(inbox_);
      }

      // Catch up with the wall clock before acting, so a button lands at the
      // current virtual time.
      const double elapsed = std::chrono::duration<double, std::milli>(SteadyClock::now() - wall_base).count();
      const auto target = virtual_base + static_cast<VirtualMs>(elapsed * sim_.config().speed);
      if (target > sim_.now()) sim_.run_until(target);

      for (auto& m : batch) {
        std::visit(
            [&](auto& msg) {
              using T = std::decay_t<decltype(msg)>;
              if constexpr (std::is_same_v<T, PressMsg>) {
                try {
                  sim_.press(msg.button, msg.edge);
                  msg.done.set_value(std::nullopt);
                } catch (const std::exception& e) {
                  msg.done.set_value(std::string(e.what()));
                }
              } else if constexpr (std::is_same_v<T, StateMsg>) {
                json state = frame_json(sim_.frame());
                state["virtual_ms"] = sim_.now();
                msg.done.set_value(std::move(state));
              } else if constexpr (std::is_same_v<T, ConfigMsg>) {
                msg.done.set_value(config_json(sim_.config()));
              } else if constexpr (std::is_same_v<T, SpeedMsg>) {
                try {
                  sim_.set_speed(msg.speed);
                  wall_base = SteadyClock::now();
                  virtual_base = sim_.now();
                  msg.done.set_value(config_json(sim_.config()));
                } catch (const SimError&) {
                  msg.done.set_value(std::nullopt);
                }
              } else if constexpr (std::is_same_v<T, SubscribeMsg>) {
                msg.outbox->push(std::make_shared<const std::string>(frame_json(sim_.frame()).dump()));
                subscribers_.push_back(msg.outbox);
              } else {
                std::erase(subscribers_, msg.outbox);
              }
            },
            m);
      }
    }
  }

  // ---- network threads -------------------------------------------------

  void accept_loop() {
    for (;;) {
      tcp::socket socket(io_);
      beast::error_code ec;
      acceptor_.accept(socket, ec);
      {
        std::lock_guard lock(mu_);
        if (stopping_) return;
        if (ec) continue;
        const int fd = socket.native_handle();
        open_sockets_[fd] = nullptr;
        sessions_.emplace_back([this, s = std::move(socket)]() mutable { session(std::move(s)); });
      }
    }
  }

  void forget_socket(int fd) {
    std::lock_guard lock(mu_);
    open_sockets_.erase(fd);
  }

  void session(tcp::socket socket) {
    const int fd = socket.native_handle();
    beast::error_code ec;
    beast::flat_buffer buffer;
    for (;;) {
      http::request<http::string_body> req;
      http::read(socket, buffer, req, ec);
      if (ec) break;
      if (websocket::is_upgrade(req)) {
        if (req.target() == "/api/events") {
          events_session(std::move(socket), req);
          forget_socket(fd);
          return;
        }
      }
      Response res;
      try {
        res = handle(req);
      } catch (const std::future_error&) {
        res = error(req, http::status::service_unavailable, "stopping", "service is shutting down");
      }
      http::write(socket, res, ec);
      if (ec || res.need_eof()) break;
    }
    socket.shutdown(tcp::socket::shutdown_both, ec);
    forget_socket(fd);
  }

  void events_session(tcp::socket socket, const http::request<http::string_body>& req) {
    const int fd = socket.native_handle();
    websocket::stream<tcp::socket> ws(std::move(socket));
    beast::error_code ec;
    ws.accept(req, ec);
    if (ec) return;
    ws.text(true);
    auto outbox = std::make_shared<Outbox>();
    {
      std::lock_guard lock(mu_);
      if (stopping_) return;
      open_sockets_[fd] = outbox;
    }
    post(SubscribeMsg{outbox});
    // One thread per stream: client frames (pings, close) are read only when
    // bytes are waiting, between writes.
    beast::flat_buffer incoming;
    for (;;) {
      if (ws.next_layer().available(ec) > 0) {
        ws.read(incoming, ec);
        if (ec) break;
        incoming.clear();
        continue;
      }
      if (ec) break;
      const auto msg = outbox->pop_for(kIdleStep * 5);
      if (!msg) continue;
      if (!*msg) break;
      ws.write(asio::buffer(**msg), ec);
      if (ec) break;
    }
    post(UnsubscribeMsg{outbox});
  }

  using Response = http::response<http::string_body>;

  Response reply(const http::request<http::string_body>& req, http::status status, std::string body = {},
                 std::string_view type = "application/json") {
    Response res{status, req.version()};
    res.set(http::field::server, "clocksim");
    if (!body.empty() || status != http::status::no_content) res.set(http::field::content_type, std::string(type));
    res.keep_alive(req.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
  }

  Response error(const http::request<http::string_body>& req, http::status status, const std::string& code,
                 const std::string& message) {
    return reply(req, status, json{{"error", code}, {"message", message}}.dump());
  }

  Response handle(const http::request<http::string_body>& req) {
    const std::string target(req.target());
    const std::string path = target.substr(0, target.find('?'));

    if (path == "/api/state") {
      if (req.method() != http::verb::get) return error(req, http::status::method_not_allowed, "bad_method", "GET only");
      StateMsg m;
      auto fut = m.done.get_future();
      post(std::move(m));
      return reply(req, http::status::ok, fut.get().dump());
    }

    if (path == "/api/button") {
      if (req.method() != http::verb::post) return error(req, http::status::method_not_allowed, "bad_method", "POST only");
      std::optional<clock::Button> button;
      std::string action;
      try {
        const json body = json::parse(req.body());
        button = clock::parse_button(body.at("button").get<std::string>());
        action = body.at("action").get<std::string>();
      } catch (const std::exception& e) {
        return error(req, http::status::bad_request, "bad_button", std::string("expected {button, action}: ") + e.what());
      }
      if (!button) return error(req, http::status::bad_request, "bad_button", "button must be set, inc or dec");
      if (action != "down" && action != "up") {
        return error(req, http::status::bad_request, "bad_button", "action must be down or up");
      }
      PressMsg m{*button, action == "down" ? clock::Edge::Press : clock::Edge::Release, {}};
      auto fut = m.done.get_future();
      post(std::move(m));
      if (auto err = fut.get()) return error(req, http::status::conflict, "protocol_violation", *err);
      return reply(req, http::status::no_content);
    }

    if (path == "/api/config") {
      if (req.method() == http::verb::get) {
        ConfigMsg m;
        auto fut = m.done.get_future();
        post(std::move(m));
        return reply(req, http::status::ok, fut.get().dump());
      }
      if (req.method() != http::verb::post) {
        return error(req, http::status::method_not_allowed, "bad_method", "GET or POST only");
      }
      double speed = 0;
      try {
        speed = json::parse(req.body()).at("speed").get<double>();
      } catch (const std::exception& e) {
        return error(req, http::status::bad_request, "bad_config", std::string("expected {speed}: ") + e.what());
      }
      SpeedMsg m{speed, {}};
      auto fut = m.done.get_future();
      post(std::move(m));
      auto result = fut.get();
      if (!result) return error(req, http::status::bad_request, "bad_config", "speed must be a finite number >= 0");
      return reply(req, http::status::ok, result->dump());
    }

    if (path.rfind("/api/", 0) == 0) return error(req, http::status::not_found, "not_found", path);
    if (req.method() != http::verb::get && req.method() != http::verb::head) {
      return error(req, http::status::method_not_allowed, "bad_method", "GET only");
    }
    return static_file(req, path);
  }

  Response static_file(const http::request<http::string_body>& req, const std::string& path) {
    namespace fs = std::filesystem;
    if (options_.ui_dir.empty()) {
      if (path == "/" || path == "/index.html") return reply(req, http::status::ok, kFallbackPage, "text/html");
      return error(req, http::status::not_found, "not_found", path);
    }
    const fs::path root = fs::weakly_canonical(options_.ui_dir);
    fs::path file = fs::weakly_canonical(root / fs::path(path == "/" ? "index.html" : path.substr(1)));
    const auto rel = file.lexically_relative(root);
    if (rel.empty() || *rel.begin() == "..") return error(req, http::status::forbidden, "forbidden", path);
    if (fs::is_directory(file)) file /= "index.html";
    std::ifstream in(file, std::ios::binary);
    if (!in) return error(req, http::status::not_found, "not_found", path);
    std::ostringstream body;
    body << in.rdbuf();
    return reply(req, http::status::ok, body.str(), mime_type(file));
  }

  ServeOptions options_;
  Simulation sim_;  // touched only by the sim thread once running
  std::vector<std::shared_ptr<Outbox>> subscribers_;  // sim thread only

  asio::io_context io_;
  tcp::acceptor acceptor_;
  std::uint16_t port_ = 0;

  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Message> inbox_;
  bool stopping_ = false;
  std::map<int, std::shared_ptr<Outbox>> open_sockets_;
  std::vector<std::thread> sessions_;

  std::thread sim_thread_;
  std::thread accept_thread_;
  std::promise<void> stopped_;
  std::shared_future<void> stopped_future_ = stopped_.get_future().share();
};

Service::Service(const SimConfig& config, const ServeOptions& options)
    : impl_(std::make_unique<Impl>(config, options)) {}

Service::~Service() = default;

std::uint16_t Service::port() const { return impl_->port_; }

void Service::wait() { impl_->stopped_future_.wait(); }

void Service::stop() { impl_->stop(); }

}  // namespace clocksim::sim

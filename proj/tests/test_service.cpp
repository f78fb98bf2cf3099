#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "doctest.h"
#include "httplib.h"
#include "support.hpp"

#include "clocksim/sim/service.hpp"

using namespace clocksim;
using namespace clocksim::sim;
using json = nlohmann::json;

namespace {

SimConfig paused_config() {
  SimConfig c;
  c.glyph_asset = testsupport::source_path("assets/bangla_digits.glyphs");
  c.speed = 0;  // virtual time stands still unless a test speeds it up
  return c;
}

ServeOptions any_port() {
  ServeOptions o;
  o.port = 0;
  return o;
}

json get_json(httplib::Client& cli, const char* path) {
  auto res = cli.Get(path);
  REQUIRE(res);
  REQUIRE(res->status == 200);
  return json::parse(res->body);
}

int post(httplib::Client& cli, const char* path, const std::string& body, std::string* reply = nullptr) {
  auto res = cli.Post(path, body, "application/json");
  REQUIRE(res);
  if (reply) *reply = res->body;
  return res->status;
}

}  // namespace

TEST_CASE("pixel encoding") {
  lcd::Screen screen;
  CHECK(encode_pixels(screen) == std::string(214, 'A') + "==");
  screen.cells[0][0].rows[0] = 0x10;  // top-left pixel
  CHECK(encode_pixels(screen).substr(0, 4) == "gAAA");
  lcd::Screen last;
  last.cells[1][15].rows[7] = 0x01;  // bottom-right pixel
  const std::string enc = encode_pixels(last);
  CHECK(enc.substr(enc.size() - 4) == "AQ==");
}

TEST_CASE("state, button, config") {
  Service service(paused_config(), any_port());
  httplib::Client cli("127.0.0.1", service.port());

  json state = get_json(cli, "/api/state");
  CHECK(state["time"] == "00:00:00");
  CHECK(state["mode"] == "run");
  CHECK(state["cells"].size() == 2);
  CHECK(state["cells"][0].size() == 16);
  CHECK(state["cells"][0][2] == glyphs::kColon);
  CHECK(state["pixels"].get<std::string>().size() == 216);

  CHECK(post(cli, "/api/button", R"({"button":"set","action":"down"})") == 204);
  CHECK(get_json(cli, "/api/state")["mode"] == "set_hour");
  CHECK(post(cli, "/api/button", R"({"button":"set","action":"up"})") == 204);
  CHECK(post(cli, "/api/button", R"({"button":"inc","action":"down"})") == 204);
  CHECK(post(cli, "/api/button", R"({"button":"inc","action":"up"})") == 204);
  CHECK(get_json(cli, "/api/state")["time"] == "01:00:00");

  std::string reply;
  CHECK(post(cli, "/api/button", R"({"button":"inc","action":"up"})", &reply) == 409);
  CHECK(json::parse(reply)["error"] == "protocol_violation");
  for (const char* bad : {"nonsense", R"({"button":"ok","action":"down"})", R"({"button":"set"})",
                          R"({"button":"set","action":"hold"})"}) {
    CHECK(post(cli, "/api/button", bad, &reply) == 400);
    CHECK(json::parse(reply)["error"] == "bad_button");
  }

  json config = get_json(cli, "/api/config");
  CHECK(config["firmware"] == "native");
  CHECK(config["scan_ms"] == 100);
  CHECK(config["layout"] == "hms");
  CHECK(post(cli, "/api/config", R"({"speed":-2})") == 400);
  CHECK(post(cli, "/api/config", R"({"speed":50})", &reply) == 200);
  CHECK(json::parse(reply)["speed"] == 50.0);

  auto res = cli.Get("/");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->body.find("/api/state") != std::string::npos);
  CHECK(cli.Get("/api/nothing")->status == 404);
}

TEST_CASE("static UI directory") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "clocksim_ui_test";
  fs::create_directories(dir);
  std::ofstream(dir / "index.html") << "<p>ui</p>";
  std::ofstream(dir / "app.js") << "1;";
  ServeOptions o = any_port();
  o.ui_dir = dir.string();
  Service service(paused_config(), o);
  httplib::Client cli("127.0.0.1", service.port());
  CHECK(cli.Get("/")->body == "<p>ui</p>");
  auto js = cli.Get("/app.js");
  CHECK(js->get_header_value("Content-Type") == "text/javascript");
  CHECK(cli.Get("/../etc/passwd")->status != 200);
  CHECK(cli.Get("/missing.css")->status == 404);
}

TEST_CASE("port in use") {
  Service first(paused_config(), any_port());
  ServeOptions o;
  o.port = first.port();
  try {
    Service second(paused_config(), o);
    FAIL("bound twice");
  } catch (const SimError& e) {
    CHECK(e.code() == SimErrc::PortInUse);
  }
}

TEST_CASE("event stream pushes a frame per change") {
  namespace beast = boost::beast;
  namespace asio = boost::asio;
  Service service(paused_config(), any_port());

  asio::io_context io;
  beast::websocket::stream<asio::ip::tcp::socket> ws(io);
  asio::ip::tcp::resolver resolver(io);
  asio::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(service.port())));
  ws.handshake("127.0.0.1", "/api/events");

  auto next = [&] {
    beast::flat_buffer buf;
    ws.read(buf);
    return json::parse(beast::buffers_to_string(buf.data()));
  };
  const json first = next();
  CHECK(first["time"] == "00:00:00");

  httplib::Client cli("127.0.0.1", service.port());
  CHECK(post(cli, "/api/button", R"({"button":"set","action":"down"})") == 204);
  CHECK(next()["mode"] == "set_hour");
  CHECK(post(cli, "/api/button", R"({"button":"set","action":"up"})") == 204);
  CHECK(post(cli, "/api/button", R"({"button":"inc","action":"down"})") == 204);
  const json after_inc = next();
  CHECK(after_inc["time"] == "01:00:00");
  CHECK(after_inc["pixels"] != first["pixels"]);

  // Speed the clock up: frames now arrive as it ticks.
  CHECK(post(cli, "/api/config", R"({"speed":1000})") == 200);
  CHECK(post(cli, "/api/button", R"({"button":"inc","action":"up"})") == 204);
  for (int i = 0; i < 3; ++i) {
    CHECK(post(cli, "/api/button", R"({"button":"set","action":"down"})") == 204);
    CHECK(post(cli, "/api/button", R"({"button":"set","action":"up"})") == 204);
  }
  json f;
  do {
    f = next();
  } while (f["mode"] != "run" || f["time"] == "01:00:00");
  CHECK(f["time"].get<std::string>() > "01:00:00");
  ws.close(beast::websocket::close_code::normal);
}

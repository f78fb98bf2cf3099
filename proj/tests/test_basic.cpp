#include <random>

#include "doctest.h"
#include "support.hpp"

using namespace clocksim;
using namespace clocksim::basic;

namespace {

BasicErrc parse_error(const std::string& src, int* line = nullptr) {
  try {
    parse_source(src);
  } catch (const BasicError& e) {
    if (line) *line = e.line();
    return e.code();
  }
  FAIL("parsed: " << src);
  return BasicErrc::LexError;
}

const char* kHourListing = "firmware/change_hour.bas";
const char* kMinuteListing = "firmware/change_minute.bas";

Program listing(const char* rel) { return load_program(testsupport::source_path(rel)); }

/// Runs a program with port 3 driven by `low`: scan index -> pins held low.
Env run_with_pins(const Program& p, std::map<std::uint64_t, std::vector<int>> low, Env env = {},
                  std::uint64_t max_scans = 100) {
  basic::ScanPinScript pins({3});
  for (const auto& [scan, bits] : low) {
    for (int b : bits) pins.set_low(scan, {3, b});
  }
  env.pin_source = [&](PinRef p, std::uint64_t scan) { return pins.level(p, scan); };
  env.scan_hook = [&](Env& e) { return e.scan_counter < max_scans; };
  run(p, env, 100'000);
  env.pin_source = nullptr;
  env.scan_hook = nullptr;
  return env;
}

// ---- random programs for the printer round trip -----------------------

struct Gen {
  std::mt19937_64 rng;
  int pick(int n) { return static_cast<int>(rng() % n); }

  std::string name() {
    static const char* names[] = {"hh", "mm", "ss", "acc", "x", "count_2"};
    return names[pick(6)];
  }

  Expr expr(int depth) {
    switch (depth <= 0 ? pick(3) : pick(6)) {
      case 0: return Expr::literal(pick(2) ? pick(100) : -pick(32769));
      case 1: return Expr::variable(name());
      case 2: return Expr::pin_ref({pick(4), pick(8)});
      case 3: return Expr::negate(Expr::variable(name()));
      default: {
        const auto op = static_cast<Expr::Op>(pick(6));
        return Expr::binary(op, expr(depth - 1), expr(depth - 1));
      }
    }
  }

  Block block(int depth, bool in_loop) {
    Block b;
    const int n = pick(4);
    for (int i = 0; i < n; ++i) b.push_back(stmt(depth, in_loop));
    return b;
  }

  Stmt stmt(int depth, bool in_loop) {
    Stmt s;
    const int kinds = depth > 0 ? 12 : 10;
    switch (pick(kinds)) {
      case 0: s.node = Assign{name(), expr(2)}; break;
      case 1: s.node = Incr{name()}; break;
      case 2: s.node = Decr{name()}; break;
      case 3: s.node = in_loop ? Stmt::Node{ExitLoop{}} : Stmt::Node{Scan{}}; break;
      case 4: s.node = Scan{}; break;
      case 5: {
        LcdPrint p;
        p.args.push_back({LcdArg::Kind::Text, "Hi 12", {}});
        p.args.push_back({LcdArg::Kind::Number, "", expr(1)});
        p.args.push_back({LcdArg::Kind::Char, "", Expr::literal(pick(8))});
        s.node = p;
        break;
      }
      case 6: s.node = LcdLocate{Expr::literal(1 + pick(2)), expr(1)}; break;
      case 7: {
        DefChar d;
        d.slot = Expr::literal(pick(8));
        for (auto& r : d.rows) r = Expr::literal(pick(32));
        s.node = d;
        break;
      }
      case 8: s.node = Cls{}; break;
      case 9: s.node = Waitms{expr(1)}; break;
      case 10: {
        If i;
        i.cond = expr(2);
        i.then_block = block(depth - 1, in_loop);
        i.has_else = pick(2);
        if (i.has_else) i.else_block = block(depth - 1, in_loop);
        s.node = std::move(i);
        break;
      }
      default: s.node = DoLoop{block(depth - 1, true)}; break;
    }
    return s;
  }
};

}  // namespace

// ---- lexer -------------------------------------------------------------

TEST_CASE("tokenize: keywords and identifiers fold case") {
  const auto t = tokenize("Incr Hh");
  REQUIRE(t.size() == 3);
  CHECK(t[0].is_keyword("incr"));
  CHECK(t[1].kind == TokenKind::Identifier);
  CHECK(t[1].lexeme == "hh");
  CHECK(t[2].kind == TokenKind::EndOfFile);
  CHECK(tokenize("INCR hH")[0].is_keyword("incr"));
}

TEST_CASE("tokenize: listing line") {
  const auto t = tokenize("If P3.2 = 0 Then");
  REQUIRE(t.size() == 6);
  CHECK(t[0].is_keyword("if"));
  CHECK(t[1].kind == TokenKind::PinRef);
  CHECK(t[1].pin == PinRef{3, 2});
  CHECK(t[2].is_op("="));
  CHECK(t[3].kind == TokenKind::Integer);
  CHECK(t[3].value == 0);
  CHECK(t[4].is_keyword("then"));
}

TEST_CASE("tokenize: literals, comments, positions") {
  const auto t = tokenize("X = &H1F + &B101 ' note\n\tY = \"a b\"");
  CHECK(t[2].value == 31);
  CHECK(t[4].value == 5);
  CHECK(t[5].kind == TokenKind::EndOfLine);
  CHECK(t[6].lexeme == "y");
  CHECK(t[6].line == 2);
  CHECK(t[6].column == 2);
  CHECK(t[8].kind == TokenKind::String);
  CHECK(t[8].lexeme == "a b");
}

TEST_CASE("tokenize: errors") {
  for (const char* bad : {"@", "X = P4.0", "X = P3.8", "X = 70000", "Lcd \"open"}) {
    try {
      tokenize(bad);
      FAIL("accepted " << bad);
    } catch (const BasicError& e) {
      CHECK(e.code() == BasicErrc::LexError);
      CHECK(e.line() == 1);
    }
  }
}

// ---- parser ------------------------------------------------------------

TEST_CASE("listing A parses into If(Do(...))") {
  const Program p = listing(kHourListing);
  REQUIRE(p.body.size() == 1);
  const auto& outer = std::get<If>(p.body[0].node);
  CHECK(outer.cond == Expr::binary(Expr::Op::Eq, Expr::pin_ref({3, 2}), Expr::literal(0)));
  REQUIRE(outer.then_block.size() == 1);
  const auto& loop = std::get<DoLoop>(outer.then_block[0].node);
  REQUIRE(loop.body.size() == 3);
  const auto& guard = std::get<If>(loop.body[2].node);
  REQUIRE(guard.then_block.size() == 1);
  CHECK(std::holds_alternative<ExitLoop>(guard.then_block[0].node));
  const auto& dec = std::get<If>(loop.body[1].node);
  const auto& fix = std::get<If>(dec.then_block[1].node);
  CHECK(fix.cond == Expr::binary(Expr::Op::Eq, Expr::variable("hh"), Expr::literal(-1)));
}

TEST_CASE("all shipped firmware parses") {
  for (const char* f : {"firmware/change_hour.bas", "firmware/change_minute.bas", "firmware/change_second.bas",
                        "firmware/clock.bas"}) {
    CHECK_NOTHROW(listing(f));
  }
}

TEST_CASE("parse: small forms") {
  const Program empty_loop = parse_source("Do\nLoop\n");
  REQUIRE(empty_loop.body.size() == 1);
  CHECK(std::get<DoLoop>(empty_loop.body[0].node).body.empty());

  const Program p = parse_source("X = -32768\nY = 3 - -2\nIf X < Y Then\nCls\nElse\nScan\nEnd If\n");
  CHECK(std::get<Assign>(p.body[0].node).value == Expr::literal(-32768));
  CHECK(std::get<If>(p.body[2].node).has_else);
}

TEST_CASE("parse errors") {
  int line = 0;
  CHECK(parse_error("If X = 1 Then\n", &line) == BasicErrc::UnterminatedIf);
  CHECK(line == 1);
  CHECK(parse_error("Do\nIncr X\n", &line) == BasicErrc::UnterminatedDo);
  CHECK(parse_error("Incr X\nExit Loop\n", &line) == BasicErrc::ExitOutsideLoop);
  CHECK(line == 2);
  CHECK(parse_error("Loop\n") == BasicErrc::MalformedStatement);
  CHECK(parse_error("End If\n") == BasicErrc::MalformedStatement);
  CHECK(parse_error("Goto 10\n") == BasicErrc::MalformedStatement);
  CHECK(parse_error("If X = 1 Then Incr X\n") == BasicErrc::MalformedStatement);
  CHECK(parse_error("X = 1 +\n") == BasicErrc::MalformedStatement);
  CHECK(parse_error("X = 32768\n") == BasicErrc::MalformedStatement);
  CHECK(parse_error("X = 1 - 32768\n") == BasicErrc::MalformedStatement);
  CHECK(parse_error("Deflcdchar 0, 1, 2\n") == BasicErrc::MalformedStatement);
}

TEST_CASE("printer: listings survive a round trip") {
  for (const char* f : {"firmware/change_hour.bas", "firmware/change_minute.bas", "firmware/change_second.bas",
                        "firmware/clock.bas"}) {
    const Program p = listing(f);
    const std::string text = print(p);
    CHECK(parse_source(text) == p);
    CHECK(print(parse_source(text)) == text);
  }
  CHECK(print(listing(kMinuteListing)).rfind("If P3.2 = 0 Then\n Do\n  If P3.1 = 0 Then\n   Incr Mm\n", 0) == 0);
}

TEST_CASE("printer: random programs round-trip") {
  Gen gen{std::mt19937_64(23)};
  for (int i = 0; i < 500; ++i) {
    Program p;
    p.body = gen.block(3, false);
    const std::string text = print(p);
    INFO(text);
    REQUIRE(parse_source(text) == p);
  }
}

// ---- interpreter -------------------------------------------------------

TEST_CASE("listing A desk execution: SET, INC, SET") {
  // scan 0: P3.2 low, enter the loop. scan 1: P3.1 low, Hh 0 -> 1.
  // scan 2: P3.2 low, Exit Loop, End If, end of program.
  const Env env = run_with_pins(listing(kHourListing), {{0, {2}}, {1, {1}}, {2, {2}}});
  CHECK(env.get("hh") == 1);
  CHECK(env.scan_counter == 2);
}

TEST_CASE("listing A: Hh 23 + INC wraps to 0") {
  Env start;
  start.set("hh", 23);
  const Env env = run_with_pins(listing(kHourListing), {{0, {2}}, {1, {1}}, {2, {2}}}, start);
  CHECK(env.get("hh") == 0);
}

TEST_CASE("listing B: Mm 0 + DEC wraps to 59") {
  const Env env = run_with_pins(listing(kMinuteListing), {{0, {2}}, {1, {0}}, {2, {2}}});
  CHECK(env.get("mm") == 59);
}

TEST_CASE("a held button repeats once per scan") {
  // Levels are polled: INC held for scans 1-3 counts three times.
  const Env env = run_with_pins(listing(kHourListing), {{0, {2}}, {1, {1}}, {2, {1}}, {3, {1}}, {4, {2}}});
  CHECK(env.get("hh") == 3);
}

TEST_CASE("SET not pressed: the listing falls through") {
  const Env env = run_with_pins(listing(kHourListing), {{1, {1}}});
  CHECK(env.get("hh") == 0);
  CHECK(env.scan_counter == 0);
}

TEST_CASE("int16 arithmetic wraps") {
  Env env;
  run(parse_source("X = 32767\nIncr X\nY = -32768\nDecr Y\nZ = 30000 + 30000\nW = X = -32768\n"), env, 100);
  CHECK(env.get("x") == -32768);
  CHECK(env.get("y") == 32767);
  CHECK(env.get("z") == static_cast<Value>(60000 - 65536));
  CHECK(env.get("w") == 1);
}

TEST_CASE("fuel: exhaustion and monotonicity") {
  const Program spin = parse_source("Do\nIncr X\nLoop\n");
  Env env;
  try {
    run(spin, env, 50);
    FAIL("ran forever");
  } catch (const BasicError& e) {
    CHECK(e.code() == BasicErrc::FuelExhausted);
  }

  const Program p = parse_source("Do\nIncr X\nIf X = 5 Then\nExit Loop\nEnd If\nLoop\nY = X + 1\n");
  Env first;
  const auto used = run(p, first, 10'000).fuel_used;
  for (std::uint64_t fuel : {used, used + 1, used + 1000}) {
    Env e;
    const auto r = run(p, e, fuel);
    CHECK(r.status == RunStatus::Finished);
    CHECK(same_state(e, first));
  }
  Env short_env;
  CHECK_THROWS_AS(run(p, short_env, used - 1), BasicError);
}

TEST_CASE("yield points: every iteration including the first, and Scan") {
  Env env;
  std::vector<Value> seen;
  env.scan_hook = [&](Env& e) {
    seen.push_back(e.get("x"));
    return true;
  };
  run(parse_source("Scan\nDo\nIncr X\nIf X = 3 Then\nExit Loop\nEnd If\nLoop\n"), env, 1000);
  CHECK(seen == std::vector<Value>{0, 0, 1, 2});
  CHECK(env.scan_counter == 4);
}

TEST_CASE("scan hook can halt") {
  Env env;
  env.scan_hook = [](Env& e) { return e.scan_counter < 10; };
  const auto r = run(parse_source("Do\nIncr X\nLoop\n"), env, 1000);
  CHECK(r.status == RunStatus::Halted);
  CHECK(env.get("x") == 9);
}

TEST_CASE("runs are deterministic") {
  const Program p = listing("firmware/clock.bas");
  auto once = [&] {
    Env env;
    env.set("scanms", 100);
    env.pins[{3, 2}] = 0;
    env.scan_hook = [](Env& e) { return e.scan_counter < 500; };
    run(p, env, 1'000'000);
    return env;
  };
  CHECK(same_state(once(), once()));
}

TEST_CASE("pins: unbound port") {
  Env env;
  basic::ScanPinScript pins({3});
  env.pin_source = [&](PinRef p, std::uint64_t s) { return pins.level(p, s); };
  try {
    run(parse_source("X = P2.5\n"), env, 10);
    FAIL("read an unbound port");
  } catch (const BasicError& e) {
    CHECK(e.code() == BasicErrc::UndefinedPinPort);
  }
  Env plain;
  run(parse_source("X = P2.5\n"), plain, 10);
  CHECK(plain.get("x") == 1);
}

TEST_CASE("LCD statements: unbound log") {
  Env env;
  run(parse_source("Cls\nLocate 2, 3\nLcd \"A\" ; 12 ; Chr(0)\nWaitms 250\n"), env, 100);
  const std::vector<lcd::LcdWrite> want = {
      {false, 0x01}, {false, 0x80 | 0x42}, {true, 'A'}, {true, '1'}, {true, '2'}, {true, 0}};
  CHECK(env.unbound_lcd_log == want);
  CHECK(env.unbound_wait_ms == 250);
}

TEST_CASE("LCD statements: argument ranges") {
  for (const char* src : {"Locate 3, 1\n", "Lcd Chr(256)\n", "Waitms -1\n", "Deflcdchar 8, 0,0,0,0,0,0,0,0\n"}) {
    Env env;
    try {
      run(parse_source(src), env, 10);
      FAIL("accepted " << src);
    } catch (const BasicError& e) {
      CHECK(e.code() == BasicErrc::BadArgument);
    }
  }
}

TEST_CASE("bind_machine: Deflcdchar then Chr shows the glyph") {
  const auto set = testsupport::shipped_glyphs();
  const auto& g = set[7];
  std::string src = "Deflcdchar 0";
  for (auto r : g.rows) src += ", " + std::to_string(r);
  src += "\nLocate 1, 4\nLcd Chr(0)\n";

  lcd::Lcd via_basic;
  lcd::init_4bit(via_basic);
  Env env;
  bind_machine(env, via_basic, nullptr);
  run(parse_source(src), env, 100);

  lcd::Lcd direct;
  lcd::init_4bit(direct);
  for (const auto& w : glyphs::program_cgram({{0, 7}}, set)) direct.send_4bit(w);
  direct.send_4bit({false, 0x80 | 3});
  direct.send_4bit({true, 0});

  CHECK(via_basic.state() == direct.state());
  CHECK(via_basic.render_cell(0, 3) == g.cell());
}

TEST_CASE("listings agree with the native machine on random traces") {
  std::mt19937_64 rng(31);
  const Program p = testsupport::listings_program();
  for (int i = 0; i < 20; ++i) {
    const auto trace = testsupport::random_trace(rng, 300);
    const auto r = testsupport::diff_listings(p, trace, testsupport::random_time(rng));
    CHECK(r.scans == trace.size());
    CHECK_MESSAGE(r.mismatches == 0, r.first_mismatch);
  }
}

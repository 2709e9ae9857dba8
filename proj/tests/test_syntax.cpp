#include <doctest.h>

#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace support;

namespace {
std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

TEST_CASE("term rendering") {
  CHECK(render(ag(A)) == "A");
  CHECK(render(ag(S)) == "S");
  CHECK(render(ag(Spy)) == "Spy");
  CHECK(render(nonce(3)) == "N#3");
  NonceLabels labels{{3, "Na"}};
  CHECK(render(nonce(3), &labels) == "Na#3");
  CHECK(render(key(KeyId::session(2))) == "K#2");
  CHECK(render(key(KeyId::shared(A))) == "shrK(A)");
  CHECK(render(key(KeyId::pub(B))) == "pubK(B)");
  CHECK(render(key(KeyId::priv(B))) == "priK(B)");
  CHECK(render(mpair_n({ag(A), ag(B), nonce(0)})) == "{A, B, N#0}");
  CHECK(render(Msg::hash(nonce(0))) == "hash(N#0)");
  CHECK(render(shr_crypt(A, Msg::mpair(nonce(0), ag(B)))) == "{N#0, B}_shrK(A)");
  CHECK(render(shr_crypt(A, nonce(0))) == "{N#0}_shrK(A)");
}

TEST_CASE("random terms round-trip through the display grammar") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 500; ++i) {
    const Msg m = random_msg(rng, 5);
    CHECK(parse_msg(render(m)) == m);
  }
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse_msg("{A, B"), ParseError);
  CHECK_THROWS_AS(parse_msg("Q#x"), ParseError);
  try {
    parse_msg("{A, ]}");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() == 5);
  }
  try {
    parse_protocol("protocol p\ninfrastructure shared\n\nrule R1:\n  send A -> B : {A, ]}\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
  }
}

TEST_CASE("trace rendering and round trip") {
  CHECK(render_trace(Trace{}).empty());
  ExploreConfig cfg;
  const Protocol p = builtin("otway-rees");
  const auto run = find_run(p, {p.find_rule("OR4")->produces}, cfg, "OR4");
  REQUIRE(run);
  const std::string text = render_trace(*run);
  CHECK(text ==
        "1. A -> B : {Na#0, A, B, {Na#0, A, B}_shrK(A)}\n"
        "2. B -> S : {Na#0, A, B, {Na#0, A, B}_shrK(A), {Na#0, Nb#1, A, B}_shrK(B)}\n"
        "3. S -> B : {Na#0, {Na#0, K#0}_shrK(A), {Nb#1, K#0}_shrK(B)}\n"
        "4. B -> A : {Na#0, {Na#0, K#0}_shrK(A)}\n");
  const AnnotatedTrace back = parse_trace(text);
  CHECK(back.trace == run->trace);
  CHECK(render_trace(back) == text);

  const Trace with_oops = run->trace.extend(Event::notes(Spy, mpair_n({nonce(0), nonce(1), key(KeyId::session(0))})));
  const std::string t2 = render_trace(with_oops);
  CHECK(t2.find("oops: Spy notes {N#0, N#1, K#0}") != std::string::npos);
  CHECK(parse_trace(t2).trace == with_oops);
}

TEST_CASE("fake annotations round-trip") {
  const std::string text = "1. A -> Spy : {Na#0, A}_pubK(Spy)\n2. Spy(as A) -> B : {Na#0, A}_pubK(B)\n";
  const auto t = parse_trace(text);
  REQUIRE(t.notes.size() == 2);
  CHECK(t.notes[1].rule == "Fake");
  CHECK(t.notes[1].as == A);
  CHECK(t.trace.newest().sender == Spy);
  CHECK(render_trace(t) == text);
}

TEST_CASE("protocols round-trip through the file format") {
  for (const auto& name : builtin_names()) {
    const Protocol p = builtin(name);
    CHECK(parse_protocol(print_protocol(p)) == p);
  }
}

TEST_CASE("shipped protocol files equal the built-ins") {
  for (const auto& name : builtin_names()) {
    const ProtocolFile f = parse_protocol_file(slurp(std::string(INDUCTA_SOURCE_DIR) + "/protocols/" + name + ".proto"));
    CHECK(f.protocol == builtin(name));
    CHECK(f.properties.size() == builtin_properties(name).size());
  }
}

TEST_CASE("protocol file errors") {
  CHECK_THROWS_AS(parse_protocol("protocol p\ninfrastructure shared\nrule R1:\n"), ParseError);
  try {
    parse_protocol("protocol p\ninfrastructure shared\nrule R1:\n  fresh nonce Na\n  where A != B\n  send A -> B : {Na, Nb}\n");
    FAIL("expected an unbound-variable error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("Nb") != std::string::npos);
  }
  // A fresh variable may not also be matched.
  CHECK_THROWS_AS(parse_protocol("protocol p\ninfrastructure shared\nrule R1:\n  fresh nonce Na\n  where A != B\n"
                                 "  seen ?C -> A : {Na}\n  send A -> B : {Na}\n"),
                  ParseError);
  // A send between two agent variables must exclude self-sends.
  CHECK_THROWS_AS(parse_protocol("protocol p\ninfrastructure shared\nrule R1:\n  fresh nonce Na\n"
                                 "  send A -> B : {Na}\n"),
                  ParseError);
}

TEST_CASE("property declarations") {
  const auto p = parse_property(
      R"(property secrecy "server-key": assume says Server B {Na, {Na, K}_shrK(A), {Nb, K}_shrK(B)}; assume honest A B; assume no-oops {Na, Nb, K}; secret K)");
  CHECK(p.name == "server-key");
  REQUIRE(std::holds_alternative<Secrecy>(p.body));
  const auto& s = std::get<Secrecy>(p.body);
  CHECK(s.says.size() == 1);
  CHECK(s.no_oops.size() == 1);
  CHECK(s.honest == std::vector<std::string>{"A", "B"});
  CHECK_THROWS_AS(parse_property("property secrecy \"x\": assume honest A"), ParseError);
  CHECK_THROWS_AS(parse_property("property bogus \"x\": secret K"), ParseError);
  for (const auto& name : builtin_names())
    for (const auto& spec : builtin_properties(name)) CHECK(unbound_variables(spec).empty());
}

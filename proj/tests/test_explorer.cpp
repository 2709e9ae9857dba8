#include <doctest.h>

#include "support.hpp"

using namespace support;

namespace {
PropertySpec prop(const std::string& protocol, const std::string& name) {
  for (const auto& p : builtin_properties(protocol))
    if (p.name == name) return p;
  FAIL("no property " << name);
  return {};
}

bool is_ns1(const Event& e) {
  return e.is_says() && e.body.is(MsgKind::Crypt) && e.body.as_key() == KeyId::pub(e.receiver) &&
         e.body.body() == Msg::mpair(nonce(0), ag(e.sender));
}
}  // namespace

TEST_CASE("successors of the empty ns-public trace") {
  ExploreConfig cfg;
  const auto next = successors(Trace{}, builtin("ns-public"), cfg);
  const auto agents = cfg.pop.agents();
  std::size_t expect = 0;
  for (auto a : agents)
    for (auto b : agents)
      if (a != b) ++expect;
  std::size_t ns1 = 0;
  for (const auto& t : next) {
    REQUIRE(t.size() == 1);
    if (is_ns1(t.newest())) ++ns1;
    if (t.newest().is_says()) CHECK(t.newest().sender != t.newest().receiver);
  }
  CHECK(ns1 == expect);
  CHECK(ns1 == 12);
}

TEST_CASE("successors after a server step 3 include the Oops note") {
  const Protocol p = builtin("otway-rees");
  ExploreConfig cfg;
  auto run = find_run(p, {p.find_rule("OR3")->produces}, cfg, "OR3");
  REQUIRE(run);
  const Event oops = Event::notes(Spy, mpair_n({nonce(0), nonce(1), key(KeyId::session(0))}));
  bool found = false;
  for (const auto& t : successors(run->trace, p, cfg)) found |= t.newest() == oops;
  CHECK(found);
  cfg.no_oops = true;
  for (const auto& t : successors(run->trace, p, cfg)) CHECK(t.newest() != oops);
}

TEST_CASE("every successor replays") {
  std::mt19937_64 rng(6);
  ExploreConfig cfg;
  for (const auto& name : builtin_names()) {
    const Protocol p = builtin(name);
    for (int i = 0; i < 5; ++i) {
      const Trace t = random_trace(rng, p, cfg, 4);
      const auto r = replay(t, p, cfg);
      CHECK_MESSAGE(r.ok, name << ": " << r.reason);
    }
  }
}

TEST_CASE("explore finds Lowe's attack and it replays") {
  ExploreConfig cfg;
  cfg.max_events = 5;
  const Protocol p = builtin("ns-public");
  const auto v = explore(p, cfg, prop("ns-public", "nb-secrecy"));
  REQUIRE_FALSE(v.holds());
  CHECK(v.counterexample.trace.size() == 4);
  CHECK(replay(v.counterexample.trace, p, cfg).ok);
  const auto evs = v.counterexample.trace.oldest_first();
  CHECK(evs[0] == Event::says(A, Spy, pub_crypt(Spy, Msg::mpair(nonce(0), ag(A)))));
  CHECK(evs[1] == Event::says(Spy, B, pub_crypt(B, Msg::mpair(nonce(0), ag(A)))));
  CHECK(v.counterexample.notes[1].as == A);

  const auto fixed = explore(builtin("ns-public-lowe"), cfg, prop("ns-public-lowe", "nb-secrecy"));
  CHECK(fixed.holds());
  CHECK_FALSE(fixed.truncated);
}

TEST_CASE("explore is deterministic and monotone in the bound") {
  ExploreConfig cfg;
  cfg.max_events = 4;
  const Protocol p = builtin("otway-rees");
  const auto sk = prop("otway-rees", "server-key");
  const auto v1 = explore(p, cfg, sk), v2 = explore(p, cfg, sk);
  CHECK(v1.holds());
  CHECK(v1.traces_explored == v2.traces_explored);
  cfg.max_events = 3;
  CHECK(explore(p, cfg, sk).traces_explored <= v1.traces_explored);
}

TEST_CASE("parallel search returns the sequential counterexample") {
  ExploreConfig cfg;
  cfg.max_events = 5;
  const Protocol p = builtin("ns-public");
  const auto seq = explore(p, cfg, prop("ns-public", "nb-secrecy"));
  cfg.jobs = 3;
  const auto par = explore(p, cfg, prop("ns-public", "nb-secrecy"));
  CHECK(render_trace(seq.counterexample) == render_trace(par.counterexample));
}

TEST_CASE("the state budget truncates instead of passing silently") {
  ExploreConfig cfg;
  cfg.max_events = 4;
  cfg.max_states = 50;
  const auto v = explore(builtin("otway-rees"), cfg, prop("otway-rees", "server-key"));
  CHECK(v.holds());
  CHECK(v.truncated);
}

TEST_CASE("find_run") {
  ExploreConfig cfg;
  for (const auto& [name, final_rule, size] :
       std::vector<std::tuple<std::string, std::string, std::size_t>>{
           {"otway-rees", "OR4", 4}, {"otway-rees-ban", "OR4", 4}, {"otway-rees-simplified", "OR4", 4},
           {"ns-public", "NS3", 3}, {"ns-public-lowe", "NS3", 3}, {"recursive", "RA4", 4}}) {
    const Protocol p = builtin(name);
    const auto run = find_run(p, {p.find_rule(final_rule)->produces}, cfg, final_rule);
    REQUIRE_MESSAGE(run, name);
    CHECK(run->trace.size() == size);
    CHECK(replay(run->trace, p, cfg).ok);
    for (const auto& n : run->notes) CHECK(n.rule != "Fake");
  }
  // The server never sends to itself.
  const Protocol p = builtin("otway-rees");
  cfg.max_events = 4;
  CHECK_FALSE(find_run(p, {EventPattern::says(AgentTerm::constant(S), AgentTerm::constant(S),
                                              Pattern::var("X", Sort::Opaque))},
                       cfg));
}

TEST_CASE("replay rejects underivable events") {
  ExploreConfig cfg;
  const Protocol p = builtin("ns-public");
  // The spy cannot produce B's encryption of an unseen nonce.
  const auto t = parse_trace("1. Spy -> B : {Na#0, A}_pubK(B)\n");
  const auto r = replay(t.trace, p, cfg);
  CHECK_FALSE(r.ok);
  CHECK(r.failed_index == 0);
  const auto u = parse_trace("1. A -> B : {Na#0, A}_pubK(B)\n2. B -> A : {Na#0, Nb#0}_pubK(A)\n");
  const auto ru = replay(u.trace, p, cfg);
  CHECK_FALSE(ru.ok);
  CHECK(ru.failed_index == 1);
}

#include <doctest.h>

#include "support.hpp"

using namespace support;

TEST_CASE("init_state, shared-key model") {
  const Population pop = shared_pop();
  CHECK(init_state(Spy, pop) == MsgSet{key(KeyId::shared(Spy))});
  CHECK(init_state(A, pop) == MsgSet{key(KeyId::shared(A))});
  CHECK(init_state(S, pop) == MsgSet{key(KeyId::shared(S)), key(KeyId::shared(A)),
                                     key(KeyId::shared(B)), key(KeyId::shared(Spy))});
  Population bad_b = pop;
  bad_b.bad.insert(B);
  CHECK(init_state(Spy, bad_b) == MsgSet{key(KeyId::shared(Spy)), key(KeyId::shared(B))});
}

TEST_CASE("init_state, public-key model") {
  const Population pop = public_pop();
  MsgSet pubs;
  for (auto a : pop.agents()) pubs.insert(key(KeyId::pub(a)));
  MsgSet a_expect = pubs;
  a_expect.insert(key(KeyId::priv(A)));
  CHECK(init_state(A, pop) == a_expect);
  MsgSet spy_expect = pubs;
  spy_expect.insert(key(KeyId::priv(Spy)));
  CHECK(init_state(Spy, pop) == spy_expect);
}

TEST_CASE("spies") {
  const Population pop = shared_pop();
  const Msg x = Msg::mpair(nonce(0), ag(A));
  CHECK(spies(Trace{}, pop) == init_state(Spy, pop));
  const Trace t = Trace{}.extend(Event::says(A, B, x));
  MsgSet expect = init_state(Spy, pop);
  expect.insert(x);
  CHECK(spies(t, pop) == expect);
  CHECK(spies(t.extend(Event::notes(A, nonce(9))), pop) == spies(t, pop));
  CHECK(spies(t.extend(Event::notes(Spy, nonce(9))), pop).contains(nonce(9)));
}

TEST_CASE("used") {
  const Population pop = shared_pop();
  const MsgSet u0 = used(Trace{}, pop);
  for (auto a : pop.agents()) CHECK(u0.contains(key(KeyId::shared(a))));
  const Trace t = Trace{}.extend(Event::says(A, B, Msg::mpair(nonce(3), ag(A))));
  CHECK(used(t, pop).contains(nonce(3)));
  const Trace n = Trace{}.extend(Event::notes(A, Msg::crypt(KeyId::shared(A), nonce(4))));
  CHECK(used(n, pop).contains(nonce(4)));
}

TEST_CASE("fresh allocators") {
  const Population pop = shared_pop();
  CHECK(fresh_nonce(Trace{}, pop) == 0);
  const Trace t = trace_of({Event::says(A, B, nonce(0)), Event::says(B, A, nonce(1))});
  CHECK(fresh_nonce(t, pop) == 2);
  CHECK(fresh_session_key(Trace{}, pop) == KeyId::session(0));
  const Trace k = Trace{}.extend(Event::says(S, A, key(KeyId::session(0))));
  CHECK(fresh_session_key(k, pop) == KeyId::session(1));

  std::mt19937_64 rng(2);
  ExploreConfig cfg;
  const Protocol p = builtin("otway-rees");
  for (int i = 0; i < 40; ++i) {
    const Trace r = random_trace(rng, p, cfg, 5);
    CHECK_FALSE(used(r, pop).contains(nonce(fresh_nonce(r, pop))));
    CHECK_FALSE(used(r, pop).contains(key(fresh_session_key(r, pop))));
  }
}

TEST_CASE("persistent traces") {
  const Trace t1 = Trace{}.extend(Event::says(A, B, nonce(0)));
  const Trace t2 = t1.extend(Event::says(B, A, nonce(1)));
  CHECK(t1.size() == 1);
  CHECK(t2.size() == 2);
  CHECK(t2.newest() == Event::says(B, A, nonce(1)));
  CHECK(t2.rest() == t1);
  CHECK(t2.oldest_first().front() == Event::says(A, B, nonce(0)));
  CHECK(Trace::from_oldest_first(t2.oldest_first()) == t2);
  CHECK(t2.contains(Event::says(A, B, nonce(0))));
}

TEST_CASE("spies is monotone and its parts are used, on random traces") {
  std::mt19937_64 rng(4);
  ExploreConfig cfg;
  for (const auto& name : builtin_names()) {
    const Protocol p = builtin(name);
    Population pop = cfg.pop;
    pop.infrastructure = p.infrastructure;
    for (int i = 0; i < 10; ++i) {
      const Trace r = random_trace(rng, p, cfg, 5);
      const MsgSet u = used(r, pop);
      CHECK(parts(spies(r, pop)).subset_of(u));
      if (!r.empty()) CHECK(spies(r.rest(), pop).subset_of(spies(r, pop)));
    }
  }
}

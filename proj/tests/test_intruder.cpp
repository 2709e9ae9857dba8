#include <doctest.h>

#include "support.hpp"

using namespace support;

TEST_CASE("spy_knowledge") {
  const Population pop = shared_pop();
  CHECK(spy_knowledge(Trace{}, pop) == MsgSet{key(KeyId::shared(Spy))});

  const Msg inner = shr_crypt(A, mpair_n({nonce(0), ag(A), ag(B)}));
  const Msg m1 = mpair_n({nonce(0), ag(A), ag(B), inner});
  const Trace t = Trace{}.extend(Event::says(A, B, m1));
  const MsgSet k = spy_knowledge(t, pop);
  for (const auto& x : {m1, nonce(0), ag(A), ag(B), inner}) CHECK(k.contains(x));
  CHECK_FALSE(k.contains(mpair_n({nonce(0), ag(A), ag(B)})));
  CHECK(oracle::to_set(k) == oracle::analz(oracle::to_set(spies(t, pop))));

  const Trace lost = t.extend(Event::notes(Spy, mpair_n({nonce(0), nonce(1), key(KeyId::session(0))})));
  CHECK(spy_knowledge(lost, pop).contains(key(KeyId::session(0))));
}

TEST_CASE("fake candidates after NS1 to the spy include Lowe's re-encryption") {
  const Population pop = public_pop();
  const Trace t = Trace{}.extend(Event::says(A, Spy, pub_crypt(Spy, Msg::mpair(nonce(0), ag(A)))));
  const MsgSet cands = fake_candidates(t, builtin("ns-public"), pop, SpyBudget{});
  CHECK(cands.contains(pub_crypt(B, Msg::mpair(nonce(0), ag(A)))));
}

TEST_CASE("fake candidates on the empty trace are replays of initial knowledge or trivial") {
  const Population pop = public_pop();
  const MsgSet k = spy_knowledge(Trace{}, pop);
  for (const auto& x : fake_candidates(Trace{}, builtin("ns-public"), pop, SpyBudget{}))
    CHECK((k.contains(x) || x.is(MsgKind::Agent) || x.is(MsgKind::Number) ||
           oracle::synth(x, oracle::to_set(k))));
}

TEST_CASE("fake candidates are sound and cover replays, on random traces") {
  std::mt19937_64 rng(8);
  ExploreConfig cfg;
  for (const auto& name : builtin_names()) {
    const Protocol p = builtin(name);
    Population pop = cfg.pop;
    pop.infrastructure = p.infrastructure;
    for (int i = 0; i < 8; ++i) {
      const Trace t = random_trace(rng, p, cfg, 4);
      const MsgSet k = spy_knowledge(t, pop);
      const auto ks = oracle::to_set(k);
      for (auto rule : {HashRule::Strong, HashRule::StrictPaper}) {
        const MsgSet cands = fake_candidates(t, p, pop, SpyBudget{}, rule);
        for (const auto& x : cands) CHECK(oracle::synth(x, ks, rule));
        for (const auto& x : spies(t, pop)) CHECK(cands.contains(x));
      }
      if (!t.empty()) CHECK(spy_knowledge(t.rest(), pop).subset_of(k));
    }
  }
}

TEST_CASE("instantiate respects the depth budget") {
  const Population pop = shared_pop();
  const Msg deep = Msg::hash(Msg::hash(Msg::hash(nonce(0))));
  const Trace t = Trace{}.extend(Event::says(A, B, mpair_n({nonce(1), ag(A), ag(B), deep})));
  SpyBudget shallow;
  shallow.max_depth = 2;
  Knowledge k(spy_knowledge(t, pop), relevant_shapes(builtin("otway-rees")), shallow);
  for (const auto& x : k.opaque) CHECK(x.depth() <= 2);
}

#include <doctest.h>

#include "support.hpp"

using namespace support;

namespace {
const Msg a = ag(A), na = nonce(5);
const KeyId k = KeyId::shared(A);
}  // namespace

TEST_CASE("parts") {
  CHECK(parts({Msg::mpair(a, na)}) == MsgSet{Msg::mpair(a, na), a, na});
  CHECK(parts({}).empty());
  const Msg c = Msg::crypt(k, na);
  CHECK(parts({c}) == MsgSet{c, na});
  CHECK(oracle::to_set(parts({c})) == oracle::parts({c}));
  // Keys and hash bodies are not parts.
  CHECK_FALSE(parts({c}).contains(key(k)));
  CHECK(parts({Msg::hash(na)}) == MsgSet{Msg::hash(na)});
}

TEST_CASE("analz") {
  const Msg x = Msg::mpair(a, nonce(1));
  const Msg c = Msg::crypt(KeyId::pub(B), x);
  CHECK(analz({c, key(KeyId::priv(B))}).contains(x));
  CHECK(analz({c}) == MsgSet{c});
  const Msg kp = key(KeyId::priv(B));
  const Msg inner = Msg::crypt(KeyId::pub(B), nonce(1));
  const MsgSet h{Msg::mpair(kp, inner)};
  const MsgSet expect{Msg::mpair(kp, inner), kp, inner, nonce(1)};
  CHECK(analz(h) == expect);
  CHECK(oracle::to_set(analz(h)) == oracle::analz(oracle::to_set(h)));
}

TEST_CASE("keys_for") {
  CHECK(keys_for({Msg::crypt(KeyId::pub(B), na)}) == std::set<KeyId>{KeyId::priv(B)});
  CHECK(keys_for({}).empty());
  CHECK(keys_for({nonce(1), Msg::hash(na), a}).empty());
  // Only the top level of the set counts.
  CHECK(keys_for({Msg::mpair(a, Msg::crypt(k, na))}).empty());
}

TEST_CASE("synthesizable") {
  CHECK(synthesizable(a, {}));
  CHECK_FALSE(synthesizable(nonce(7), {}));
  CHECK(synthesizable(Msg::crypt(k, Msg::mpair(nonce(1), a)), {nonce(1), key(k)}));
  CHECK_FALSE(synthesizable(Msg::crypt(k, Msg::mpair(nonce(1), a)), {nonce(1)}));
  CHECK(synthesizable(Msg::hash(nonce(1)), {nonce(1)}, HashRule::Strong));
  CHECK(synthesizable(Msg::hash(Msg::mpair(a, nonce(1))), {nonce(1)}, HashRule::Strong));
  CHECK_FALSE(synthesizable(Msg::hash(Msg::mpair(a, nonce(1))), {nonce(1)}, HashRule::StrictPaper));
  // A pair held as a whole is synthesizable even if a half is not separately held.
  const Msg p = Msg::mpair(nonce(1), nonce(2));
  CHECK(synthesizable(p, {p}));
}

TEST_CASE("synthesizable agrees with the recursive oracle on random inputs") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const MsgSet h = random_set(rng, 8, 4);
    const auto hs = oracle::to_set(h);
    for (int j = 0; j < 4; ++j) {
      const Msg x = j < 2 || h.empty() ? random_msg(rng, 4) : h.items()[rng() % h.size()];
      const Msg y = Msg::mpair(x, random_msg(rng, 2));
      for (auto rule : {HashRule::Strong, HashRule::StrictPaper}) {
        CHECK(synthesizable(x, h, rule) == oracle::synth(x, hs, rule));
        CHECK(synthesizable(y, h, rule) == oracle::synth(y, hs, rule));
      }
    }
  }
}

TEST_CASE("parts and analz agree with the oracle on random sets") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const MsgSet h = random_set(rng, 8, 4);
    const auto hs = oracle::to_set(h);
    REQUIRE(oracle::to_set(parts(h)) == oracle::parts(hs));
    REQUIRE(oracle::to_set(analz(h)) == oracle::analz(hs));
    REQUIRE(oracle::to_set(naive::parts(h)) == oracle::parts(hs));
    REQUIRE(oracle::to_set(naive::analz(h)) == oracle::analz(hs));
  }
}

TEST_CASE("analz_with") {
  const MsgSet h{Msg::crypt(KeyId::session(1), key(KeyId::session(0)))};
  CHECK(analz_with({}, h) == analz(h));
  CHECK(analz_with({KeyId::session(1)}, h).contains(key(KeyId::session(0))));
  CHECK_FALSE(analz(h).contains(key(KeyId::session(0))));
}

TEST_CASE("incremental closures match batch closures") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 300; ++i) {
    const MsgSet h = random_set(rng, 8, 4);
    AnalzSet inc;
    MsgSet p;
    for (const auto& x : h) {
      inc.insert(x);
      parts_insert(p, x);
    }
    REQUIRE(inc.items() == analz(h));
    REQUIRE(p == parts(h));
  }
}

TEST_CASE("law suite: 500 samples, every law exercised, no failures") {
  LawConfig cfg;
  for (auto rule : {HashRule::Strong, HashRule::StrictPaper}) {
    cfg.rule = rule;
    const auto rep = run_laws(cfg);
    CHECK(rep.samples == 500);
    CHECK(rep.laws.size() >= 30);
    for (const auto& f : rep.failures) FAIL_CHECK(f.law << " at sample " << f.sample);
    CHECK(rep.ok());
  }
}

#include <doctest.h>

#include "support.hpp"

using namespace support;

TEST_CASE("inv_key: symmetric keys are fixed, public and private swap") {
  CHECK(inv_key(KeyId::shared(A)) == KeyId::shared(A));
  CHECK(inv_key(KeyId::pub(B)) == KeyId::priv(B));
  CHECK(inv_key(KeyId::priv(B)) == KeyId::pub(B));
  CHECK(inv_key(KeyId::session(3)) == KeyId::session(3));
  CHECK(KeyId::priv(A) != KeyId::pub(A));
}

TEST_CASE("inv_key is an involution and symmetric iff fixed") {
  std::mt19937_64 rng(7);
  const AgentId agents[] = {S, A, B, C, Spy};
  for (int i = 0; i < 500; ++i) {
    AgentId a = agents[rng() % 5];
    KeyId k;
    switch (rng() % 4) {
      case 0: k = KeyId::shared(a); break;
      case 1: k = KeyId::pub(a); break;
      case 2: k = KeyId::priv(a); break;
      default: k = KeyId::session(static_cast<std::uint32_t>(rng() % 10)); break;
    }
    CHECK(inv_key(inv_key(k)) == k);
    CHECK(is_symmetric(k) == (inv_key(k) == k));
  }
}

TEST_CASE("agents and keys are pairwise distinct by constructor and field") {
  CHECK(S != Spy);
  CHECK(A != S);
  CHECK(AgentId::friend_(1) == AgentId::friend_(1));
  CHECK(AgentId::friend_(1) != AgentId::friend_(2));
  CHECK(KeyId::shared(A) != KeyId::shared(B));
  CHECK(KeyId::shared(A) != KeyId::pub(A));
  CHECK(KeyId::session(0) != KeyId::session(1));
}

TEST_CASE("hash_pair") {
  const Msg k = key(KeyId::shared(A)), a = ag(A);
  const Msg h = hash_pair(k, a);
  CHECK(h == Msg::mpair(Msg::hash(Msg::mpair(k, a)), a));
  CHECK(h.second() == a);
  CHECK(h.first() == Msg::hash(Msg::mpair(k, a)));
}

TEST_CASE("mpair_n is right nested") {
  const Msg a = ag(A), b = ag(B), c = nonce(1);
  CHECK(mpair_n({a, b, c}) == Msg::mpair(a, Msg::mpair(b, c)));
  CHECK(mpair_n({a}) == a);
  CHECK(mpair_n({a, b}) == Msg::mpair(a, b));
  CHECK_THROWS_AS(mpair_n(std::span<const Msg>{}), std::invalid_argument);
  CHECK(tuple_elements(mpair_n({a, b, c})) == std::vector<Msg>{a, b, c});
}

TEST_CASE("constructors are injective") {
  const Msg x = nonce(1), y = nonce(2);
  CHECK(Msg::crypt(KeyId::shared(A), x) == Msg::crypt(KeyId::shared(A), x));
  CHECK(Msg::crypt(KeyId::shared(A), x) != Msg::crypt(KeyId::shared(B), x));
  CHECK(Msg::crypt(KeyId::shared(A), x) != Msg::crypt(KeyId::shared(A), y));
  CHECK(Msg::hash(x) != Msg::hash(y));
  CHECK(Msg::nonce(1) != Msg::number(1));
  CHECK(Msg::mpair(x, y) != Msg::mpair(y, x));
}

TEST_CASE("canonical order is a total order on random terms") {
  std::mt19937_64 rng(3);
  std::vector<Msg> ms;
  for (int i = 0; i < 60; ++i) ms.push_back(random_msg(rng, 4));
  for (const auto& x : ms) {
    CHECK((x <=> x) == std::strong_ordering::equal);
    for (const auto& y : ms) {
      const auto c = x <=> y;
      CHECK((c == std::strong_ordering::equal) == (x == y));
      CHECK((y <=> x) == (0 <=> c));
      for (const auto& z : ms)
        if (c < 0 && (y <=> z) < 0) CHECK((x <=> z) < 0);
    }
  }
}

TEST_CASE("population") {
  Population p;
  CHECK(p.agents() == std::vector<AgentId>{A, B, Spy, S});
  CHECK(p.is_bad(Spy));
  CHECK_FALSE(p.is_bad(S));
  CHECK_NOTHROW(p.validate());
  p.bad.insert(S);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  Population q;
  q.bad.clear();
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}

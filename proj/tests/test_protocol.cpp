#include <doctest.h>

#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace support;

namespace {

std::vector<std::string> rule_names(const Protocol& p) {
  std::vector<std::string> out;
  for (const auto& r : p.rules) out.push_back(r.name);
  return out;
}

Msg request1(AgentId a, AgentId b, std::uint64_t na) {
  return hash_pair(key(KeyId::shared(a)), mpair_n({ag(a), ag(b), nonce(na), end_token()}));
}

Msg request_cons(AgentId b, AgentId c, std::uint64_t nb, const Msg& pa) {
  return hash_pair(key(KeyId::shared(b)), mpair_n({ag(b), ag(c), nonce(nb), pa}));
}

// The request C sends to the server in the three-client run A -> B -> C -> S.
Msg three_client_request() {
  const Msg pa = request1(A, B, 0);
  const Msg pb = request_cons(B, C, 1, pa);
  return request_cons(C, S, 2, pb);
}

}  // namespace

TEST_CASE("builtin rule sets") {
  CHECK(rule_names(builtin("otway-rees")) == std::vector<std::string>{"OR1", "OR2", "OR3", "OR4", "Oops"});
  CHECK(builtin("otway-rees").has_oops());
  CHECK(rule_names(builtin("ns-public")) == std::vector<std::string>{"NS1", "NS2", "NS3"});
  CHECK_FALSE(builtin("ns-public").has_oops());
  CHECK_FALSE(builtin("recursive").has_oops());
  CHECK(builtin("recursive").server_recursive());
  CHECK_THROWS_AS(builtin("kerberos"), std::invalid_argument);
  CHECK(builtin_names().size() == 6);
}

TEST_CASE("ns-public-lowe differs from ns-public only in NS2's body") {
  const Protocol p = builtin("ns-public"), q = builtin("ns-public-lowe");
  REQUIRE(p.rules.size() == q.rules.size());
  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    if (p.rules[i].name == "NS2") {
      CHECK(p.rules[i].produces != q.rules[i].produces);
      CHECK(p.rules[i].premises == q.rules[i].premises);
      CHECK(print_pattern(q.rules[i].produces.body) == "{Na, Nb, B}_pubK(A)");
    }
  }
}

TEST_CASE("OR1 on the empty trace: one instance per (A, B) with A != B, B != Server") {
  const Population pop = shared_pop();
  const Protocol proto = builtin("otway-rees");
  const Rule& or1 = *proto.find_rule("OR1");
  std::size_t expect = 0;
  for (auto a : pop.agents())
    for (auto b : pop.agents())
      if (a != b && b != S) ++expect;
  CHECK(expect == 9);
  const auto fs = fireable(or1, Trace{}, pop);
  CHECK(fs.size() == expect);
  for (const auto& f : fs) {
    CHECK(f.event.sender != f.event.receiver);
    CHECK(tuple_elements(f.event.body)[0] == nonce(0));
  }
}

TEST_CASE("NS3 needs both its premises") {
  Population pop = public_pop();
  const Protocol proto = builtin("ns-public");
  const Rule& ns3 = *proto.find_rule("NS3");
  const auto m1 = Event::says(A, B, pub_crypt(B, Msg::mpair(nonce(0), ag(A))));
  const auto m2 = Event::says(B, A, pub_crypt(A, Msg::mpair(nonce(0), nonce(1))));
  CHECK(fireable(ns3, trace_of({m1}), pop).empty());
  CHECK(fireable(ns3, trace_of({m2}), pop).empty());
  const auto fs = fireable(ns3, trace_of({m1, m2}), pop);
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].event == Event::says(A, B, pub_crypt(B, nonce(1))));
}

TEST_CASE("Oops fires only after a server step-3 message") {
  const Population pop = shared_pop();
  const Protocol p = builtin("otway-rees");
  const Rule& oops = *p.find_rule("Oops");
  CHECK(fireable(oops, Trace{}, pop).empty());
  ExploreConfig cfg;
  auto run = find_run(p, {p.find_rule("OR3")->produces}, cfg, "OR3");
  REQUIRE(run);
  const auto fs = fireable(oops, run->trace, pop);
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].event.kind == Event::Kind::Notes);
  CHECK(fs[0].event.sender == Spy);
  CHECK(fs[0].event.body == mpair_n({nonce(0), nonce(1), key(KeyId::session(0))}));
}

TEST_CASE("no rule instance is a self-send") {
  std::mt19937_64 rng(1);
  ExploreConfig cfg;
  for (const auto& name : builtin_names()) {
    const Protocol p = builtin(name);
    for (int i = 0; i < 15; ++i) {
      const Trace t = random_trace(rng, p, cfg, 4);
      for (const auto& e : t.oldest_first())
        if (e.is_says()) CHECK(e.sender != e.receiver);
    }
  }
}

TEST_CASE("respond: one client") {
  const MsgSet u = used(Trace{}, shared_pop());
  const auto rs = respond(u, request1(A, B, 0));
  REQUIRE(rs.size() == 1);
  const KeyId kab = KeyId::session(0);
  CHECK(rs[0].response == Msg::mpair(shr_crypt(A, mpair_n({key(kab), ag(B), nonce(0)})), end_token()));
  CHECK(rs[0].key == kab);
}

TEST_CASE("respond: three clients yield five certificates") {
  const MsgSet u = used(Trace{}, shared_pop(3));
  const auto rs = respond(u, three_client_request());
  REQUIRE(rs.size() == 1);
  const auto certs = certificates(rs[0].response);
  REQUIRE(certs.size() == 5);
  std::map<KeyId, int> uses;
  for (const auto& c : certs) ++uses[c.key];
  REQUIRE(uses.size() == 3);
  std::vector<int> counts;
  for (const auto& [k, n] : uses) counts.push_back(n);
  std::sort(counts.begin(), counts.end());
  CHECK(counts == std::vector<int>{1, 2, 2});

  // Kcs shared by C and the server (dummy), Kbc by B and C, Kab by A and B.
  auto holders = [&](KeyId k) {
    std::set<std::pair<AgentId, AgentId>> hs;
    for (const auto& c : certs)
      if (c.key == k) hs.insert({c.holder, c.peer});
    return hs;
  };
  std::set<std::set<std::pair<AgentId, AgentId>>> got;
  for (const auto& [k, n] : uses) got.insert(holders(k));
  CHECK(got == std::set<std::set<std::pair<AgentId, AgentId>>>{
                   {{C, S}}, {{C, B}, {B, C}}, {{B, A}, {A, B}}});
  CHECK(certificates_mated(rs[0].response));
  CHECK(responses_member(rs[0].response, u));
  for (const auto& k : uses) CHECK_FALSE(u.contains(key(k.first)));
}

TEST_CASE("respond rejects a tampered digest and ill-formed requests") {
  const MsgSet u = used(Trace{}, shared_pop());
  const Msg good = request1(A, B, 0);
  const Msg bad_digest = Msg::mpair(Msg::hash(Msg::mpair(key(KeyId::shared(B)), good.second())), good.second());
  CHECK(respond(u, bad_digest).empty());
  const Msg tampered_body = Msg::mpair(good.first(), mpair_n({ag(A), ag(B), nonce(1), end_token()}));
  CHECK(respond(u, tampered_body).empty());
  CHECK(respond(u, nonce(0)).empty());
}

TEST_CASE("responses_member") {
  const MsgSet u = used(Trace{}, shared_pop());
  CHECK(responses_member(end_token(), u));
  const Msg cert = shr_crypt(A, mpair_n({key(KeyId::session(0)), ag(B), nonce(0)}));
  CHECK(responses_member(Msg::mpair(cert, end_token()), u));
  MsgSet u2 = u;
  u2.insert(key(KeyId::session(0)));
  CHECK_FALSE(responses_member(Msg::mpair(cert, end_token()), u2));
  CHECK_FALSE(responses_member(nonce(0), u));
}

TEST_CASE("certificate mates on every request chain of up to three friends") {
  for (std::uint32_t friends = 1; friends <= 3; ++friends) {
    const Population pop = shared_pop(friends);
    const MsgSet u = used(Trace{}, pop);
    std::vector<AgentId> agents = pop.agents();
    std::size_t checked = 0;
    // Chains a0 -> a1 -> ... -> ak -> S of distinct consecutive agents.
    std::function<void(Msg, AgentId, std::uint64_t, int)> extend = [&](Msg req, AgentId last,
                                                                       std::uint64_t n, int depth) {
      const auto to_server = request_cons(last, S, n, req);
      for (const auto& r : respond(u, to_server)) {
        ++checked;
        CHECK(certificates_mated(r.response));
        CHECK(responses_member(r.response, u));
      }
      if (depth == 0) return;
      for (auto next : agents)
        if (next != last && next != S) extend(request_cons(last, next, n, req), next, n + 1, depth - 1);
    };
    for (auto a : agents)
      for (auto b : agents)
        if (a != b && a != S && b != S) extend(request1(a, b, 0), b, 1, 1);
    CHECK(checked > 0);
  }
}

TEST_CASE("certificates_mated rejects a key in three certificates") {
  const Msg k = key(KeyId::session(0));
  const Msg r = mpair_n({shr_crypt(A, mpair_n({k, ag(B), nonce(0)})),
                         shr_crypt(B, mpair_n({k, ag(A), nonce(1)})),
                         shr_crypt(C, mpair_n({k, ag(A), nonce(2)})), end_token()});
  CHECK_FALSE(certificates_mated(r));
}

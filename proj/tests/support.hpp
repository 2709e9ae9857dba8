#pragma once

#include <functional>
#include <random>
#include <set>

#include "inducta/explorer.hpp"
#include "inducta/laws.hpp"

namespace support {

using namespace inducta;

inline const AgentId S = AgentId::server();
inline const AgentId Spy = AgentId::spy();
inline const AgentId A = AgentId::friend_(1);
inline const AgentId B = AgentId::friend_(2);
inline const AgentId C = AgentId::friend_(3);

inline Msg ag(AgentId a) { return Msg::agent(a); }
inline Msg nonce(std::uint64_t n) { return Msg::nonce(n); }
inline Msg key(KeyId k) { return Msg::key(k); }
inline Msg shr_crypt(AgentId a, Msg x) { return Msg::crypt(KeyId::shared(a), std::move(x)); }
inline Msg pub_crypt(AgentId a, Msg x) { return Msg::crypt(KeyId::pub(a), std::move(x)); }

inline Population shared_pop(std::uint32_t friends = 2) {
  Population p;
  p.friends = friends;
  p.infrastructure = Infrastructure::SharedKey;
  return p;
}

inline Population public_pop(std::uint32_t friends = 2) {
  Population p = shared_pop(friends);
  p.infrastructure = Infrastructure::PublicKey;
  return p;
}

inline Trace trace_of(std::initializer_list<Event> oldest_first) {
  return Trace::from_oldest_first(std::vector<Event>(oldest_first));
}

// Closures written directly from the inductive rules, independent of the library:
// std::set of messages, one rule application per pass until nothing is added.
namespace oracle {

using Set = std::set<Msg>;

inline Set to_set(const MsgSet& h) { return Set(h.begin(), h.end()); }

inline Set parts(Set h) {
  for (bool grew = true; grew;) {
    grew = false;
    for (const Msg& x : Set(h)) {
      if (x.is(MsgKind::MPair)) grew |= h.insert(x.first()).second | h.insert(x.second()).second;
      if (x.is(MsgKind::Crypt)) grew |= h.insert(x.body()).second;
    }
  }
  return h;
}

inline Set analz(Set h) {
  for (bool grew = true; grew;) {
    grew = false;
    for (const Msg& x : Set(h)) {
      if (x.is(MsgKind::MPair)) grew |= h.insert(x.first()).second | h.insert(x.second()).second;
      if (x.is(MsgKind::Crypt) && h.count(Msg::key(inv_key(x.as_key()))))
        grew |= h.insert(x.body()).second;
    }
  }
  return h;
}

// Direct recursive reading of the synth rules.
inline bool synth(const Msg& x, const Set& h, HashRule rule = HashRule::Strong) {
  if (h.count(x)) return true;
  switch (x.kind()) {
    case MsgKind::Agent:
    case MsgKind::Number: return true;
    case MsgKind::Nonce:
    case MsgKind::Key: return false;
    case MsgKind::MPair: return synth(x.first(), h, rule) && synth(x.second(), h, rule);
    case MsgKind::Hash: return rule == HashRule::Strong ? synth(x.body(), h, rule) : h.count(x.body()) > 0;
    case MsgKind::Crypt: return h.count(Msg::key(x.as_key())) && synth(x.body(), h, rule);
  }
  return false;
}

}  // namespace oracle

/// A random walk through a protocol's trace space using successors().
inline Trace random_trace(std::mt19937_64& rng, const Protocol& proto, const ExploreConfig& cfg,
                          std::size_t steps) {
  Trace t;
  for (std::size_t i = 0; i < steps; ++i) {
    auto next = successors(t, proto, cfg);
    if (next.empty()) break;
    t = next[std::uniform_int_distribution<std::size_t>(0, next.size() - 1)(rng)];
  }
  return t;
}

}  // namespace support

#include "inducta/term.hpp"

#include <stdexcept>

namespace inducta {

namespace {

constexpr std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::size_t hash_agent(AgentId a) {
  return mix(static_cast<std::size_t>(a.kind), a.index);
}

std::size_t hash_key(KeyId k) {
  return mix(mix(static_cast<std::size_t>(k.kind) + 17, hash_agent(k.owner)), k.index);
}

}  // namespace

Msg Msg::make(Node&& n) {
  std::size_t h = static_cast<std::size_t>(n.kind) * 0x100000001b3ULL;
  switch (n.kind) {
    case MsgKind::Agent: h = mix(h, hash_agent(n.agent)); break;
    case MsgKind::Number:
    case MsgKind::Nonce: h = mix(h, n.number); break;
    case MsgKind::Key: h = mix(h, hash_key(n.key)); break;
    case MsgKind::Hash:
      h = mix(h, n.a->hash_value());
      n.depth = n.a->depth() + 1;
      n.size = n.a->size() + 1;
      break;
    case MsgKind::MPair:
      h = mix(mix(h, n.a->hash_value()), n.b->hash_value());
      n.depth = std::max(n.a->depth(), n.b->depth()) + 1;
      n.size = n.a->size() + n.b->size() + 1;
      break;
    case MsgKind::Crypt:
      h = mix(mix(h, hash_key(n.key)), n.a->hash_value());
      n.depth = n.a->depth() + 1;
      n.size = n.a->size() + 1;
      break;
  }
  n.hash = h;
  return Msg(std::make_shared<const Node>(std::move(n)));
}

Msg Msg::agent(AgentId a) {
  Node n{MsgKind::Agent};
  n.agent = a;
  return make(std::move(n));
}

Msg Msg::number(std::uint64_t v) {
  Node n{MsgKind::Number};
  n.number = v;
  return make(std::move(n));
}

Msg Msg::nonce(std::uint64_t v) {
  Node n{MsgKind::Nonce};
  n.number = v;
  return make(std::move(n));
}

Msg Msg::key(KeyId k) {
  Node n{MsgKind::Key};
  n.key = k;
  return make(std::move(n));
}

Msg Msg::hash(Msg x) {
  Node n{MsgKind::Hash};
  n.a = std::make_unique<Msg>(std::move(x));
  return make(std::move(n));
}

Msg Msg::mpair(Msg x, Msg y) {
  Node n{MsgKind::MPair};
  n.a = std::make_unique<Msg>(std::move(x));
  n.b = std::make_unique<Msg>(std::move(y));
  return make(std::move(n));
}

Msg Msg::crypt(KeyId k, Msg x) {
  Node n{MsgKind::Crypt};
  n.key = k;
  n.a = std::make_unique<Msg>(std::move(x));
  return make(std::move(n));
}

bool operator==(const Msg& x, const Msg& y) {
  if (x.node_ == y.node_) return true;
  if (x.node_->hash != y.node_->hash || x.node_->kind != y.node_->kind ||
      x.node_->size != y.node_->size)
    return false;
  switch (x.kind()) {
    case MsgKind::Agent: return x.as_agent() == y.as_agent();
    case MsgKind::Number:
    case MsgKind::Nonce: return x.as_number() == y.as_number();
    case MsgKind::Key: return x.as_key() == y.as_key();
    case MsgKind::Hash: return x.first() == y.first();
    case MsgKind::MPair: return x.first() == y.first() && x.second() == y.second();
    case MsgKind::Crypt: return x.as_key() == y.as_key() && x.body() == y.body();
  }
  return false;
}

std::strong_ordering operator<=>(const Msg& x, const Msg& y) {
  if (x.node_ == y.node_) return std::strong_ordering::equal;
  if (auto c = x.kind() <=> y.kind(); c != 0) return c;
  switch (x.kind()) {
    case MsgKind::Agent: return x.as_agent() <=> y.as_agent();
    case MsgKind::Number:
    case MsgKind::Nonce: return x.as_number() <=> y.as_number();
    case MsgKind::Key: return x.as_key() <=> y.as_key();
    case MsgKind::Hash: return x.first() <=> y.first();
    case MsgKind::MPair:
      if (auto c = x.first() <=> y.first(); c != 0) return c;
      return x.second() <=> y.second();
    case MsgKind::Crypt:
      if (auto c = x.as_key() <=> y.as_key(); c != 0) return c;
      return x.body() <=> y.body();
  }
  return std::strong_ordering::equal;
}

Msg mpair_n(std::span<const Msg> xs) {
  if (xs.empty()) throw std::invalid_argument("mpair_n: empty sequence");
  Msg acc = xs.back();
  for (auto it = xs.rbegin() + 1; it != xs.rend(); ++it) acc = Msg::mpair(*it, std::move(acc));
  return acc;
}

Msg mpair_n(std::initializer_list<Msg> xs) {
  return mpair_n(std::span<const Msg>(xs.begin(), xs.size()));
}

Msg hash_pair(const Msg& x, const Msg& y) {
  return Msg::mpair(Msg::hash(Msg::mpair(x, y)), y);
}

std::vector<Msg> tuple_elements(const Msg& m) {
  std::vector<Msg> out;
  const Msg* cur = &m;
  while (cur->is(MsgKind::MPair)) {
    out.push_back(cur->first());
    cur = &cur->second();
  }
  out.push_back(*cur);
  return out;
}

std::vector<AgentId> Population::agents() const {
  std::vector<AgentId> out;
  out.reserve(friends + 2);
  for (std::uint32_t i = 1; i <= friends; ++i) out.push_back(AgentId::friend_(i));
  out.push_back(AgentId::spy());
  out.push_back(AgentId::server());
  return out;
}

bool Population::contains(AgentId a) const {
  if (a.is_friend()) return a.index >= 1 && a.index <= friends;
  return true;
}

void Population::validate() const {
  if (!bad.contains(AgentId::spy())) throw std::invalid_argument("population: Spy must be bad");
  if (bad.contains(AgentId::server()))
    throw std::invalid_argument("population: Server cannot be bad");
  for (const auto& a : bad)
    if (!contains(a)) throw std::invalid_argument("population: bad agent " + to_string(a) + " out of range");
}

std::string to_string(AgentId a) {
  switch (a.kind) {
    case AgentId::Kind::Server: return "S";
    case AgentId::Kind::Spy: return "Spy";
    case AgentId::Kind::Friend:
      if (a.index >= 1 && a.index <= 18) return std::string(1, static_cast<char>('A' + a.index - 1));
      return "F" + std::to_string(a.index);
  }
  return "?";
}

std::string to_string(KeyId k) {
  switch (k.kind) {
    case KeyId::Kind::SharedLongTerm: return "shrK(" + to_string(k.owner) + ")";
    case KeyId::Kind::Public: return "pubK(" + to_string(k.owner) + ")";
    case KeyId::Kind::Private: return "priK(" + to_string(k.owner) + ")";
    case KeyId::Kind::Session: return "K#" + std::to_string(k.index);
  }
  return "?";
}

}  // namespace inducta

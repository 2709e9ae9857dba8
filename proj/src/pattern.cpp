#include "inducta/pattern.hpp"

#include <algorithm>

namespace inducta {

const char* to_string(Sort s) {
  switch (s) {
    case Sort::Agent: return "agent";
    case Sort::Nonce: return "nonce";
    case Sort::Key: return "key";
    case Sort::Opaque: return "opaque";
  }
  return "?";
}

const Msg* Binding::find(const std::string& name) const {
  for (const auto& [k, v] : entries_)
    if (k == name) return &v;
  return nullptr;
}

bool Binding::unify(const std::string& name, const Msg& value) {
  if (const Msg* cur = find(name)) return *cur == value;
  entries_.emplace_back(name, value);
  return true;
}

void Binding::set(const std::string& name, Msg value) {
  for (auto& [k, v] : entries_)
    if (k == name) {
      v = std::move(value);
      return;
    }
  entries_.emplace_back(name, std::move(value));
}

std::optional<AgentId> Binding::agent(const std::string& name) const {
  const Msg* m = find(name);
  if (!m || !m->is(MsgKind::Agent)) return std::nullopt;
  return m->as_agent();
}

std::optional<AgentId> AgentTerm::resolve(const Binding& b) const {
  if (!is_var()) return value;
  return b.agent(var);
}

namespace {

bool match_agent(const AgentTerm& t, AgentId a, Binding& b) {
  if (!t.is_var()) return t.value == a;
  return b.unify(t.var, Msg::agent(a));
}

bool sort_admits(Sort s, const Msg& m) {
  switch (s) {
    case Sort::Agent: return m.is(MsgKind::Agent);
    case Sort::Nonce: return m.is(MsgKind::Nonce);
    case Sort::Key: return m.is(MsgKind::Key);
    case Sort::Opaque: return true;
  }
  return false;
}

}  // namespace

std::optional<KeyId> KeyTerm::resolve(const Binding& b) const {
  switch (kind) {
    case Kind::Literal: return literal;
    case Kind::Var: {
      const Msg* m = b.find(var);
      if (!m || !m->is(MsgKind::Key)) return std::nullopt;
      return m->as_key();
    }
    case Kind::Shared:
    case Kind::Public:
    case Kind::Private: {
      auto a = owner.resolve(b);
      if (!a) return std::nullopt;
      if (kind == Kind::Shared) return KeyId::shared(*a);
      if (kind == Kind::Public) return KeyId::pub(*a);
      return KeyId::priv(*a);
    }
  }
  return std::nullopt;
}

bool KeyTerm::match(KeyId k, Binding& b) const {
  switch (kind) {
    case Kind::Literal: return literal == k;
    case Kind::Var: return b.unify(var, Msg::key(k));
    case Kind::Shared:
      return k.kind == KeyId::Kind::SharedLongTerm && match_agent(owner, k.owner, b);
    case Kind::Public: return k.kind == KeyId::Kind::Public && match_agent(owner, k.owner, b);
    case Kind::Private: return k.kind == KeyId::Kind::Private && match_agent(owner, k.owner, b);
  }
  return false;
}

Pattern Pattern::literal(Msg m) {
  Node n{Kind::Literal};
  n.lit = std::move(m);
  return Pattern(std::make_shared<const Node>(std::move(n)));
}

Pattern Pattern::var(std::string name, Sort sort) {
  Node n{Kind::Var};
  n.name = std::move(name);
  n.sort = sort;
  return Pattern(std::make_shared<const Node>(std::move(n)));
}

Pattern Pattern::agent(AgentTerm a) {
  if (!a.is_var()) return literal(Msg::agent(a.value));
  return var(a.var, Sort::Agent);
}

Pattern Pattern::key(KeyTerm k) {
  if (k.kind == KeyTerm::Kind::Literal) return literal(Msg::key(k.literal));
  if (k.kind == KeyTerm::Kind::Var) return var(k.var, Sort::Key);
  Node n{Kind::KeyRef};
  n.key = std::move(k);
  return Pattern(std::make_shared<const Node>(std::move(n)));
}

Pattern Pattern::mpair(Pattern x, Pattern y) {
  Node n{Kind::MPair};
  n.a = std::make_shared<const Pattern>(std::move(x));
  n.b = std::make_shared<const Pattern>(std::move(y));
  return Pattern(std::make_shared<const Node>(std::move(n)));
}

Pattern Pattern::tuple(std::vector<Pattern> xs) {
  Pattern acc = std::move(xs.back());
  for (auto it = xs.rbegin() + 1; it != xs.rend(); ++it) acc = mpair(std::move(*it), std::move(acc));
  return acc;
}

Pattern Pattern::hash(Pattern x) {
  Node n{Kind::Hash};
  n.a = std::make_shared<const Pattern>(std::move(x));
  return Pattern(std::make_shared<const Node>(std::move(n)));
}

Pattern Pattern::crypt(KeyTerm k, Pattern x) {
  Node n{Kind::Crypt};
  n.key = std::move(k);
  n.a = std::make_shared<const Pattern>(std::move(x));
  return Pattern(std::make_shared<const Node>(std::move(n)));
}

Pattern Pattern::hash_pair(Pattern x, Pattern y) {
  return mpair(hash(mpair(std::move(x), y)), y);
}

bool Pattern::match(const Msg& m, Binding& b) const {
  switch (kind()) {
    case Kind::Literal: return literal_value() == m;
    case Kind::Var: return sort_admits(var_sort(), m) && b.unify(var_name(), m);
    case Kind::AgentRef: return m.is(MsgKind::Agent) && match_agent(agent_term(), m.as_agent(), b);
    case Kind::KeyRef: return m.is(MsgKind::Key) && key_term().match(m.as_key(), b);
    case Kind::MPair:
      return m.is(MsgKind::MPair) && first().match(m.first(), b) && second().match(m.second(), b);
    case Kind::Hash: return m.is(MsgKind::Hash) && first().match(m.body(), b);
    case Kind::Crypt:
      return m.is(MsgKind::Crypt) && key_term().match(m.as_key(), b) && first().match(m.body(), b);
  }
  return false;
}

std::optional<Msg> Pattern::substitute(const Binding& b) const {
  switch (kind()) {
    case Kind::Literal: return literal_value();
    case Kind::Var: {
      const Msg* m = b.find(var_name());
      if (!m) return std::nullopt;
      return *m;
    }
    case Kind::AgentRef: {
      auto a = agent_term().resolve(b);
      if (!a) return std::nullopt;
      return Msg::agent(*a);
    }
    case Kind::KeyRef: {
      auto k = key_term().resolve(b);
      if (!k) return std::nullopt;
      return Msg::key(*k);
    }
    case Kind::MPair: {
      auto x = first().substitute(b);
      if (!x) return std::nullopt;
      auto y = second().substitute(b);
      if (!y) return std::nullopt;
      return Msg::mpair(std::move(*x), std::move(*y));
    }
    case Kind::Hash: {
      auto x = first().substitute(b);
      if (!x) return std::nullopt;
      return Msg::hash(std::move(*x));
    }
    case Kind::Crypt: {
      auto k = key_term().resolve(b);
      if (!k) return std::nullopt;
      auto x = first().substitute(b);
      if (!x) return std::nullopt;
      return Msg::crypt(*k, std::move(*x));
    }
  }
  return std::nullopt;
}

namespace {

void collect_key_vars(const KeyTerm& k, std::vector<std::pair<std::string, Sort>>& out) {
  if (k.kind == KeyTerm::Kind::Var) out.emplace_back(k.var, Sort::Key);
  if ((k.kind == KeyTerm::Kind::Shared || k.kind == KeyTerm::Kind::Public ||
       k.kind == KeyTerm::Kind::Private) &&
      k.owner.is_var())
    out.emplace_back(k.owner.var, Sort::Agent);
}

}  // namespace

void Pattern::collect_vars(std::vector<std::pair<std::string, Sort>>& out) const {
  switch (kind()) {
    case Kind::Literal: break;
    case Kind::Var: out.emplace_back(var_name(), var_sort()); break;
    case Kind::AgentRef:
      if (agent_term().is_var()) out.emplace_back(agent_term().var, Sort::Agent);
      break;
    case Kind::KeyRef: collect_key_vars(key_term(), out); break;
    case Kind::MPair:
      first().collect_vars(out);
      second().collect_vars(out);
      break;
    case Kind::Hash: first().collect_vars(out); break;
    case Kind::Crypt:
      collect_key_vars(key_term(), out);
      first().collect_vars(out);
      break;
  }
}

std::uint32_t Pattern::depth() const {
  switch (kind()) {
    case Kind::Literal: return literal_value().depth();
    case Kind::MPair: return std::max(first().depth(), second().depth()) + 1;
    case Kind::Hash:
    case Kind::Crypt: return first().depth() + 1;
    default: return 1;
  }
}

namespace {

AgentTerm rename_agent(AgentTerm a, const std::string& from, const std::string& to) {
  if (a.var == from) a.var = to;
  return a;
}

KeyTerm rename_key(KeyTerm k, const std::string& from, const std::string& to) {
  if (k.kind == KeyTerm::Kind::Var && k.var == from) k.var = to;
  k.owner = rename_agent(k.owner, from, to);
  return k;
}

}  // namespace

Pattern Pattern::rename(const std::string& from, const std::string& to) const {
  switch (kind()) {
    case Kind::Literal: return *this;
    case Kind::Var: return var_name() == from ? var(to, var_sort()) : *this;
    case Kind::AgentRef: return agent(rename_agent(agent_term(), from, to));
    case Kind::KeyRef: return key(rename_key(key_term(), from, to));
    case Kind::MPair: return mpair(first().rename(from, to), second().rename(from, to));
    case Kind::Hash: return hash(first().rename(from, to));
    case Kind::Crypt: return crypt(rename_key(key_term(), from, to), first().rename(from, to));
  }
  return *this;
}

bool operator==(const Pattern& x, const Pattern& y) {
  if (x.node_ == y.node_) return true;
  if (x.kind() != y.kind()) return false;
  switch (x.kind()) {
    case Pattern::Kind::Literal: return x.literal_value() == y.literal_value();
    case Pattern::Kind::Var: return x.var_name() == y.var_name() && x.var_sort() == y.var_sort();
    case Pattern::Kind::AgentRef: return x.agent_term() == y.agent_term();
    case Pattern::Kind::KeyRef: return x.key_term() == y.key_term();
    case Pattern::Kind::MPair: return x.first() == y.first() && x.second() == y.second();
    case Pattern::Kind::Hash: return x.first() == y.first();
    case Pattern::Kind::Crypt: return x.key_term() == y.key_term() && x.first() == y.first();
  }
  return false;
}

bool EventPattern::match(const Event& ev, Binding& b) const {
  if (ev.kind != kind) return false;
  if (!match_agent(sender, ev.sender, b)) return false;
  if (kind == Event::Kind::Says && !match_agent(receiver, ev.receiver, b)) return false;
  return body.match(ev.body, b);
}

std::optional<Event> EventPattern::substitute(const Binding& b) const {
  auto s = sender.resolve(b);
  if (!s) return std::nullopt;
  auto x = body.substitute(b);
  if (!x) return std::nullopt;
  if (kind == Event::Kind::Notes) return Event::notes(*s, std::move(*x));
  auto r = receiver.resolve(b);
  if (!r) return std::nullopt;
  return Event::says(*s, *r, std::move(*x));
}

void EventPattern::collect_vars(std::vector<std::pair<std::string, Sort>>& out) const {
  if (sender.is_var()) out.emplace_back(sender.var, Sort::Agent);
  if (kind == Event::Kind::Says && receiver.is_var()) out.emplace_back(receiver.var, Sort::Agent);
  body.collect_vars(out);
}

std::vector<Binding> match_all(const std::vector<EventPattern>& pats,
                               const std::vector<Event>& events, const Binding& seed) {
  std::vector<Binding> current{seed};
  for (const auto& p : pats) {
    std::vector<Binding> next;
    for (const auto& b : current)
      for (const auto& ev : events) {
        Binding ext = b;
        if (p.match(ev, ext)) next.push_back(std::move(ext));
      }
    current = std::move(next);
    if (current.empty()) break;
  }
  return current;
}

}  // namespace inducta

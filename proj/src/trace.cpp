#include "inducta/trace.hpp"

#include <algorithm>

namespace inducta {

Trace Trace::extend(Event ev) const {
  Trace t;
  t.head_ = std::make_shared<const Cell>(Cell{std::move(ev), head_});
  t.size_ = size_ + 1;
  return t;
}

Trace Trace::rest() const {
  Trace t;
  t.head_ = head_->next;
  t.size_ = size_ - 1;
  return t;
}

std::vector<Event> Trace::newest_first() const {
  std::vector<Event> out;
  out.reserve(size_);
  for_each([&](const Event& e) { out.push_back(e); });
  return out;
}

std::vector<Event> Trace::oldest_first() const {
  auto out = newest_first();
  std::reverse(out.begin(), out.end());
  return out;
}

Trace Trace::from_oldest_first(const std::vector<Event>& evs) {
  Trace t;
  for (const auto& e : evs) t = t.extend(e);
  return t;
}

bool Trace::contains(const Event& ev) const {
  for (const Cell* c = head_.get(); c; c = c->next.get())
    if (c->event == ev) return true;
  return false;
}

bool operator==(const Trace& x, const Trace& y) {
  if (x.size_ != y.size_) return false;
  const Trace::Cell* a = x.head_.get();
  const Trace::Cell* b = y.head_.get();
  for (; a && b; a = a->next.get(), b = b->next.get()) {
    if (a == b) return true;
    if (!(a->event == b->event)) return false;
  }
  return true;
}

MsgSet init_state(AgentId a, const Population& pop) {
  MsgSet out;
  const auto agents = pop.agents();
  if (pop.infrastructure == Infrastructure::SharedKey) {
    if (a.is_server()) {
      for (const auto& b : agents) out.insert(Msg::key(KeyId::shared(b)));
    } else if (a.is_spy()) {
      for (const auto& b : pop.bad) out.insert(Msg::key(KeyId::shared(b)));
    } else {
      out.insert(Msg::key(KeyId::shared(a)));
    }
  } else {
    for (const auto& b : agents) out.insert(Msg::key(KeyId::pub(b)));
    out.insert(Msg::key(KeyId::priv(a)));
    if (a.is_spy())
      for (const auto& b : pop.bad) out.insert(Msg::key(KeyId::priv(b)));
  }
  return out;
}

MsgSet spies(const Trace& evs, const Population& pop) {
  MsgSet out = init_state(AgentId::spy(), pop);
  evs.for_each([&](const Event& e) {
    if (spy_sees(e, pop)) out.insert(e.body);
  });
  return out;
}

MsgSet used(const Trace& evs, const Population& pop) {
  MsgSet out;
  for (const auto& b : pop.agents())
    for (const auto& x : init_state(b, pop)) parts_insert(out, x);
  evs.for_each([&](const Event& e) { parts_insert(out, e.body); });
  return out;
}

std::uint32_t fresh_nonce(const MsgSet& used_set) {
  std::uint32_t n = 0;
  while (used_set.contains(Msg::nonce(n))) ++n;
  return n;
}

KeyId fresh_session_key(const MsgSet& used_set) {
  std::uint32_t n = 0;
  while (used_set.contains(Msg::key(KeyId::session(n)))) ++n;
  return KeyId::session(n);
}

std::uint32_t fresh_nonce(const Trace& evs, const Population& pop) {
  return fresh_nonce(used(evs, pop));
}

KeyId fresh_session_key(const Trace& evs, const Population& pop) {
  return fresh_session_key(used(evs, pop));
}

}  // namespace inducta

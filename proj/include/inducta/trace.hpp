#pragma once

// Events, traces, initial knowledge, and the spy's view of a trace.

#include <cstdint>
#include <memory>
#include <vector>

#include "inducta/closure.hpp"
#include "inducta/term.hpp"

namespace inducta {

struct Event {
  enum class Kind : std::uint8_t { Says, Notes };

  Kind kind = Kind::Says;
  AgentId sender{};    // the noting agent for Notes
  AgentId receiver{};  // unused for Notes
  Msg body = Msg::agent(AgentId::server());

  static Event says(AgentId a, AgentId b, Msg x) { return {Kind::Says, a, b, std::move(x)}; }
  static Event notes(AgentId a, Msg x) { return {Kind::Notes, a, AgentId{}, std::move(x)}; }

  bool is_says() const { return kind == Kind::Says; }

  friend bool operator==(const Event&, const Event&) = default;
  friend std::strong_ordering operator<=>(const Event& x, const Event& y) {
    if (auto c = x.kind <=> y.kind; c != 0) return c;
    if (auto c = x.sender <=> y.sender; c != 0) return c;
    if (auto c = x.receiver <=> y.receiver; c != 0) return c;
    return x.body <=> y.body;
  }
};

/// Persistent newest-first event list. Extending a trace shares the tail.
class Trace {
 public:
  Trace() = default;

  /// New trace with ev prepended (ev becomes the newest event).
  Trace extend(Event ev) const;

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  /// Newest event; precondition: non-empty.
  const Event& newest() const { return head_->event; }
  /// The trace without its newest event; precondition: non-empty.
  Trace rest() const;

  std::vector<Event> newest_first() const;
  std::vector<Event> oldest_first() const;

  static Trace from_oldest_first(const std::vector<Event>& evs);

  bool contains(const Event& ev) const;

  template <typename F>
  void for_each(F&& f) const {
    for (const Cell* c = head_.get(); c; c = c->next.get()) f(c->event);
  }

  friend bool operator==(const Trace& x, const Trace& y);

 private:
  struct Cell {
    Event event;
    std::shared_ptr<const Cell> next;
  };
  std::shared_ptr<const Cell> head_;
  std::size_t size_ = 0;
};

MsgSet init_state(AgentId a, const Population& pop);

/// Messages visible to the spy: his initial state, all Says bodies, and Notes of bad agents.
MsgSet spies(const Trace& evs, const Population& pop);

/// Everything that has appeared anywhere (parts), including every agent's initial knowledge.
MsgSet used(const Trace& evs, const Population& pop);

std::uint32_t fresh_nonce(const MsgSet& used_set);
KeyId fresh_session_key(const MsgSet& used_set);
std::uint32_t fresh_nonce(const Trace& evs, const Population& pop);
KeyId fresh_session_key(const Trace& evs, const Population& pop);

/// True when the spy observes this event.
inline bool spy_sees(const Event& ev, const Population& pop) {
  return ev.is_says() || pop.is_bad(ev.sender);
}

}  // namespace inducta

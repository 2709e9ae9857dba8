#include "inducta/intruder.hpp"

#include <algorithm>

namespace inducta {

MsgSet spy_knowledge(const Trace& evs, const Population& pop) { return analz(spies(evs, pop)); }

Knowledge::Knowledge(MsgSet analz_set, const std::vector<Pattern>& shapes,
                     const SpyBudget& budget)
    : analz(std::move(analz_set)) {
  for (const auto& m : analz) {
    switch (m.kind()) {
      case MsgKind::Nonce: nonces.push_back(m); break;
      case MsgKind::Key: keys.push_back(m); break;
      case MsgKind::Crypt: crypts.push_back(m); break;
      case MsgKind::Hash: hashes.push_back(m); break;
      default: break;
    }
    if (m.depth() > budget.max_depth) continue;
    bool relevant = !budget.use_patterns || std::any_of(shapes.begin(), shapes.end(),
                                                         [&](const Pattern& s) {
                                                           Binding scratch;
                                                           return s.match(m, scratch);
                                                         });
    if (relevant) opaque.push_back(m);
  }
}

namespace {

void collect_shapes(const Pattern& p, std::vector<Pattern>& out) {
  using K = Pattern::Kind;
  switch (p.kind()) {
    case K::Var:
    case K::AgentRef: return;
    case K::MPair:
      collect_shapes(p.first(), out);
      collect_shapes(p.second(), out);
      // Tuple tails are not shapes of their own; keyed digests {hash X, Y} are.
      if (p.first().kind() != K::Hash && p.first().kind() != K::Crypt) return;
      break;
    case K::Hash:
    case K::Crypt: collect_shapes(p.first(), out); break;
    default: break;
  }
  if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
}

using Sink = std::function<void(const Binding&, const Msg&)>;

struct Instantiator {
  const Knowledge& k;
  const Population& pop;
  HashRule rule;
  std::vector<AgentId> agents = pop.agents();

  bool known(const Msg& m) const { return k.analz.contains(m); }

  // Calls f for each key the position can denote, with the binding extended accordingly.
  void keys_for_term(const KeyTerm& t, const Binding& b,
                     const std::function<void(const Binding&, KeyId)>& f) const {
    switch (t.kind) {
      case KeyTerm::Kind::Literal: f(b, t.literal); return;
      case KeyTerm::Kind::Var:
        if (const Msg* m = b.find(t.var)) {
          if (m->is(MsgKind::Key)) f(b, m->as_key());
          return;
        }
        for (const auto& km : k.keys) {
          Binding e = b;
          e.set(t.var, km);
          f(e, km.as_key());
        }
        return;
      default: {
        auto make = [&](AgentId a) {
          if (t.kind == KeyTerm::Kind::Shared) return KeyId::shared(a);
          if (t.kind == KeyTerm::Kind::Public) return KeyId::pub(a);
          return KeyId::priv(a);
        };
        if (auto a = t.owner.resolve(b)) {
          f(b, make(*a));
          return;
        }
        if (!t.owner.is_var()) return;
        for (const auto& a : agents) {
          Binding e = b;
          e.set(t.owner.var, Msg::agent(a));
          f(e, make(a));
        }
      }
    }
  }

  void run(const Pattern& p, const Binding& b, const Sink& out) const {
    using K = Pattern::Kind;
    switch (p.kind()) {
      case K::Literal:
        if (synthesizable(p.literal_value(), k.analz, rule)) out(b, p.literal_value());
        return;
      case K::AgentRef:
      case K::Var: {
        const std::string& v = p.kind() == K::Var ? p.var_name() : p.agent_term().var;
        if (p.kind() == K::AgentRef && !p.agent_term().is_var()) {
          out(b, Msg::agent(p.agent_term().value));
          return;
        }
        if (const Msg* m = b.find(v)) {
          if (synthesizable(*m, k.analz, rule)) out(b, *m);
          return;
        }
        const Sort s = p.kind() == K::Var ? p.var_sort() : Sort::Agent;
        auto each = [&](const Msg& m) {
          Binding e = b;
          e.set(v, m);
          out(e, m);
        };
        switch (s) {
          case Sort::Agent:
            for (const auto& a : agents) each(Msg::agent(a));
            break;
          case Sort::Nonce:
            for (const auto& m : k.nonces) each(m);
            break;
          case Sort::Key:
            for (const auto& m : k.keys) each(m);
            break;
          case Sort::Opaque:
            for (const auto& m : k.opaque) each(m);
            break;
        }
        return;
      }
      case K::KeyRef:
        keys_for_term(p.key_term(), b, [&](const Binding& e, KeyId id) {
          Msg m = Msg::key(id);
          if (known(m)) out(e, m);
        });
        return;
      case K::MPair:
        run(p.first(), b, [&](const Binding& b1, const Msg& x) {
          run(p.second(), b1, [&](const Binding& b2, const Msg& y) { out(b2, Msg::mpair(x, y)); });
        });
        return;
      case K::Hash:
        for (const auto& h : k.hashes) {
          Binding e = b;
          if (p.match(h, e)) out(e, h);
        }
        run(p.first(), b, [&](const Binding& e, const Msg& x) {
          Msg h = Msg::hash(x);
          if (known(h)) return;  // already produced above
          if (rule == HashRule::Strong || known(x)) out(e, h);
        });
        return;
      case K::Crypt:
        for (const auto& c : k.crypts) {
          Binding e = b;
          if (p.match(c, e)) out(e, c);
        }
        keys_for_term(p.key_term(), b, [&](const Binding& e, KeyId id) {
          if (!known(Msg::key(id))) return;
          run(p.first(), e, [&](const Binding& e2, const Msg& x) {
            Msg c = Msg::crypt(id, x);
            if (!known(c)) out(e2, c);
          });
        });
        return;
    }
  }
};

}  // namespace

std::vector<Pattern> relevant_shapes(const Protocol& proto, const std::vector<EventPattern>& extra) {
  std::vector<Pattern> out;
  auto add = [&](const EventPattern& e) { collect_shapes(e.body, out); };
  for (const auto& r : proto.rules) {
    for (const auto& p : r.premises) add(p);
    add(r.produces);
  }
  for (const auto& e : extra) add(e);
  return out;
}

void instantiate(const Pattern& p, const Binding& seed, const Knowledge& k, const Population& pop,
                 HashRule rule, const std::function<void(const Binding&, const Msg&)>& out) {
  Instantiator{k, pop, rule}.run(p, seed, out);
}

std::vector<Forgery> forgeries_for(const std::vector<EventPattern>& context, std::size_t target,
                                   const std::vector<Event>& events, const Knowledge& k,
                                   const Population& pop, HashRule rule) {
  std::vector<Forgery> out;
  const EventPattern& tp = context[target];
  if (tp.kind != Event::Kind::Says) return out;

  std::vector<EventPattern> others;
  for (std::size_t i = 0; i < context.size(); ++i)
    if (i != target) others.push_back(context[i]);

  const auto agents = pop.agents();
  for (const auto& seed : match_all(others, events)) {
    Binding s = seed;
    if (tp.sender.is_var()) {
      if (!s.unify(tp.sender.var, Msg::agent(AgentId::spy()))) continue;
    } else if (!tp.sender.value.is_spy()) {
      continue;
    }
    std::vector<Binding> with_receiver;
    if (auto r = tp.receiver.resolve(s)) {
      if (!r->is_spy()) with_receiver.push_back(s);
    } else if (tp.receiver.is_var()) {
      for (const auto& a : agents) {
        if (a.is_spy()) continue;
        Binding e = s;
        e.set(tp.receiver.var, Msg::agent(a));
        with_receiver.push_back(std::move(e));
      }
    }
    for (const auto& b0 : with_receiver) {
      AgentId recv = *tp.receiver.resolve(b0);
      instantiate(tp.body, b0, k, pop, rule, [&](const Binding& b, const Msg& m) {
        Event ev = Event::says(AgentId::spy(), recv, m);
        for (const auto& f : out)
          if (f.event == ev) return;
        out.push_back(Forgery{b, std::move(ev)});
      });
    }
  }
  return out;
}

MsgSet fake_candidates(const Trace& evs, const Protocol& proto, const Population& pop,
                       const SpyBudget& budget, HashRule rule,
                       const std::vector<EventPattern>& extra) {
  Knowledge k(spy_knowledge(evs, pop), relevant_shapes(proto, extra), budget);
  const auto events = evs.oldest_first();
  MsgSet out = k.analz;
  auto add_from = [&](const std::vector<EventPattern>& ctx) {
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      if (!ctx[i].unknown_sender) continue;
      for (const auto& f : forgeries_for(ctx, i, events, k, pop, rule)) out.insert(f.event.body);
    }
  };
  for (const auto& r : proto.rules) add_from(r.premises);
  for (const auto& e : extra) add_from({e});
  return out;
}

}  // namespace inducta

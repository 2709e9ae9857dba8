#include "inducta/property.hpp"

#include <algorithm>
#include <map>

#include "inducta/syntax.hpp"

namespace inducta {

TraceFacts::TraceFacts(std::vector<Event> oldest_first, const Population& pop)
    : events_(std::move(oldest_first)), pop_(pop) {}

TraceFacts::TraceFacts(std::vector<Event> oldest_first, const Population& pop, MsgSet analz_spies)
    : events_(std::move(oldest_first)), pop_(pop), analz_(std::move(analz_spies)) {}

const MsgSet& TraceFacts::spies() const {
  if (!spies_) {
    MsgSet s = init_state(AgentId::spy(), pop_);
    for (const auto& e : events_)
      if (spy_sees(e, pop_)) s.insert(e.body);
    spies_ = std::move(s);
  }
  return *spies_;
}

const MsgSet& TraceFacts::analz_spies() const {
  if (!analz_) analz_ = analz(spies());
  return *analz_;
}

const MsgSet& TraceFacts::parts_spies() const {
  if (!parts_) parts_ = parts(spies());
  return *parts_;
}

namespace {

bool all_honest(const std::vector<std::string>& vars, const Binding& b, const Population& pop) {
  for (const auto& v : vars) {
    auto a = b.agent(v);
    if (!a || pop.is_bad(*a)) return false;
  }
  return true;
}

std::string describe(const Binding& b) {
  std::string out;
  for (const auto& [k, v] : b.entries()) {
    if (!out.empty()) out += ", ";
    out += k + "=" + render(v);
  }
  return out;
}

// Extends each binding by matching `p` against every member of `set`.
std::vector<Binding> match_in(const Pattern& p, const MsgSet& set, const std::vector<Binding>& bs) {
  std::vector<Binding> out;
  for (const auto& b : bs)
    for (const auto& m : set) {
      Binding e = b;
      if (p.match(m, e)) out.push_back(std::move(e));
    }
  return out;
}

void collect(const EventPattern& e, std::vector<std::string>& out) {
  std::vector<std::pair<std::string, Sort>> vs;
  e.collect_vars(vs);
  for (auto& [v, s] : vs) out.push_back(v);
}

void collect(const Pattern& p, std::vector<std::string>& out) {
  std::vector<std::pair<std::string, Sort>> vs;
  p.collect_vars(vs);
  for (auto& [v, s] : vs) out.push_back(v);
}

bool contains(const std::vector<std::string>& xs, const std::string& x) {
  return std::find(xs.begin(), xs.end(), x) != xs.end();
}

}  // namespace

std::optional<Violation> check_secrecy(const TraceFacts& t, const Secrecy& s) {
  auto bs = match_all(s.says, t.events());
  for (const auto& p : s.parts) bs = match_in(p, t.parts_spies(), bs);
  for (const auto& b : bs) {
    if (!all_honest(s.honest, b, t.pop())) continue;
    bool oopsed = false;
    for (const auto& payload : s.no_oops) {
      for (const auto& e : t.events()) {
        Binding scratch = b;
        if (!e.is_says() && payload.match(e.body, scratch)) oopsed = true;
      }
    }
    if (oopsed) continue;
    auto target = s.target.substitute(b);
    if (target && t.analz_spies().contains(*target))
      return Violation{b, "spy knows " + render(*target) + " (" + describe(b) + ")"};
  }
  return std::nullopt;
}

std::optional<Violation> check_agreement(const TraceFacts& t, const Agreement& a) {
  for (const auto& b : match_all(a.trigger, t.events())) {
    if (!all_honest(a.honest, b, t.pop())) continue;
    if (match_all(a.guarantee, t.events(), b).empty())
      return Violation{b, "no matching guarantee event (" + describe(b) + ")"};
  }
  return std::nullopt;
}

std::optional<Violation> check_unicity(const TraceFacts& t, const Unicity& u) {
  std::vector<Binding> instances;
  if (u.source == Unicity::Source::Parts) {
    instances = match_in(u.container, t.parts_spies(), {Binding{}});
  } else {
    for (const auto& e : t.events()) {
      Binding b;
      if (u.event.match(e, b)) instances.push_back(std::move(b));
    }
  }
  std::erase_if(instances, [&](const Binding& b) { return !all_honest(u.honest, b, t.pop()); });
  std::map<Msg, const Binding*, std::less<>> first;
  for (const auto& b : instances) {
    const Msg* k = b.find(u.key);
    if (!k) continue;
    auto [it, fresh] = first.emplace(*k, &b);
    if (fresh) continue;
    for (const auto& d : u.determined) {
      const Msg* x = it->second->find(d);
      const Msg* y = b.find(d);
      if (x && y && !(*x == *y))
        return Violation{b, u.key + "=" + render(*k) + " occurs with " + d + "=" + render(*x) +
                                " and " + d + "=" + render(*y)};
    }
  }
  return std::nullopt;
}

std::optional<Violation> check_regularity(const TraceFacts& t, const Regularity& r) {
  for (const auto& a : t.pop().agents()) {
    Binding b;
    b.set(r.agent, Msg::agent(a));
    auto item = r.item.substitute(b);
    if (!item) continue;
    bool seen = t.parts_spies().contains(*item);
    if (seen != t.pop().is_bad(a))
      return Violation{b, render(*item) + (seen ? " is in" : " is missing from") +
                              " parts(spies evs) for " + render(a)};
  }
  return std::nullopt;
}

std::optional<Violation> check_session_key_compromise(const TraceFacts& t) {
  MsgSet all;
  for (const auto& e : t.events()) parts_insert(all, e.body);
  std::vector<KeyId> session;
  for (const auto& m : all)
    if (m.is(MsgKind::Key) && m.as_key().is_session()) session.push_back(m.as_key());
  for (const auto& k2 : session) {
    MsgSet with = analz_with({k2}, t.spies());
    for (const auto& k : session) {
      bool lhs = with.contains(Msg::key(k));
      bool rhs = k == k2 || t.analz_spies().contains(Msg::key(k));
      if (lhs != rhs) {
        Binding b;
        b.set("K", Msg::key(k));
        b.set("K'", Msg::key(k2));
        return Violation{b, "losing " + render(k2) + " changes whether the spy learns " + render(k)};
      }
    }
  }
  return std::nullopt;
}

std::optional<Violation> check_forwarding(const TraceFacts& t, const Forwarding& f) {
  for (const auto& e : t.events()) {
    Binding b;
    if (!f.event.match(e, b)) continue;
    const Msg* x = b.find(f.var);
    if (x && !t.analz_spies().contains(*x))
      return Violation{b, f.var + "=" + render(*x) + " is not in analz(spies evs)"};
  }
  return std::nullopt;
}

std::optional<Violation> check_oops_forwarding(const TraceFacts& t) {
  MsgSet without = init_state(AgentId::spy(), t.pop());
  for (const auto& e : t.events())
    if (e.is_says()) without.insert(e.body);
  MsgSet p = parts(without);
  for (const auto& m : t.parts_spies()) {
    if (m.is(MsgKind::Key) && !p.contains(m))
      return Violation{{}, "the spy's notes add key " + render(m) + " to parts(spies evs)"};
  }
  return std::nullopt;
}

std::optional<Violation> check(const TraceFacts& t, const PropertySpec& p) {
  return std::visit(
      [&](const auto& body) -> std::optional<Violation> {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, Secrecy>) return check_secrecy(t, body);
        else if constexpr (std::is_same_v<T, Agreement>) return check_agreement(t, body);
        else if constexpr (std::is_same_v<T, Unicity>) return check_unicity(t, body);
        else if constexpr (std::is_same_v<T, Regularity>) return check_regularity(t, body);
        else if constexpr (std::is_same_v<T, SessionKeyCompromise>) return check_session_key_compromise(t);
        else if constexpr (std::is_same_v<T, Forwarding>) return check_forwarding(t, body);
        else return check_oops_forwarding(t);
      },
      p.body);
}

std::optional<Violation> check(const Trace& evs, const Population& pop, const PropertySpec& p) {
  return check(TraceFacts(evs.oldest_first(), pop), p);
}

std::vector<EventPattern> PropertySpec::forgeable() const {
  std::vector<EventPattern> out;
  auto add = [&](const std::vector<EventPattern>& es) {
    for (const auto& e : es)
      if (e.unknown_sender) out.push_back(e);
  };
  if (auto* a = std::get_if<Agreement>(&body)) add(a->trigger);
  if (auto* s = std::get_if<Secrecy>(&body)) add(s->says);
  return out;
}

std::vector<std::string> unbound_variables(const PropertySpec& p) {
  std::vector<std::string> missing;
  auto need = [&](const std::vector<std::string>& used, const std::vector<std::string>& bound) {
    for (const auto& v : used)
      if (!contains(bound, v) && !contains(missing, v)) missing.push_back(v);
  };
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        std::vector<std::string> bound, used;
        if constexpr (std::is_same_v<T, Secrecy>) {
          for (const auto& e : body.says) collect(e, bound);
          for (const auto& x : body.parts) collect(x, bound);
          used = body.honest;
          collect(body.target, used);
        } else if constexpr (std::is_same_v<T, Agreement>) {
          for (const auto& e : body.trigger) collect(e, bound);
          used = body.honest;
        } else if constexpr (std::is_same_v<T, Unicity>) {
          if (body.source == Unicity::Source::Parts)
            collect(body.container, bound);
          else
            collect(body.event, bound);
          used = body.determined;
          used.push_back(body.key);
          used.insert(used.end(), body.honest.begin(), body.honest.end());
        } else if constexpr (std::is_same_v<T, Regularity>) {
          collect(body.item, bound);
          used = {body.agent};
        } else if constexpr (std::is_same_v<T, Forwarding>) {
          collect(body.event, bound);
          used = {body.var};
        }
        need(used, bound);
      },
      p.body);
  return missing;
}

namespace {

const std::map<std::string, std::vector<std::string>>& property_texts() {
  static const std::map<std::string, std::vector<std::string>> texts{
      {"ns-public",
       {
           R"(property secrecy "nb-secrecy": assume says B A {Na, Nb}_pubK(A); assume honest A B; secret Nb)",
           R"(property secrecy "na-secrecy": assume says A B {Na, A}_pubK(B); assume honest A B; secret Na)",
           R"(property agreement "a-agreement": trigger says A B {Na, A}_pubK(B); trigger says ?B' A {Na, Nb}_pubK(A); honest A B; guarantee says B A {Na, Nb}_pubK(A))",
           R"(property agreement "b-agreement": trigger says B A {Na, Nb}_pubK(A); trigger says ?A' B {Nb}_pubK(B); honest A B; guarantee says A B {Na, A}_pubK(B))",
       }},
      {"ns-public-lowe",
       {
           R"(property secrecy "nb-secrecy": assume says B A {Na, Nb, B}_pubK(A); assume honest A B; secret Nb)",
           R"(property secrecy "na-secrecy": assume says A B {Na, A}_pubK(B); assume honest A B; secret Na)",
           R"(property agreement "a-agreement": trigger says A B {Na, A}_pubK(B); trigger says ?B' A {Na, Nb, B}_pubK(A); honest A B; guarantee says B A {Na, Nb, B}_pubK(A))",
           R"(property agreement "b-agreement": trigger says B A {Na, Nb, B}_pubK(A); trigger says ?A' B {Nb}_pubK(B); honest A B; guarantee says A B {Na, A}_pubK(B))",
       }},
      {"otway-rees",
       {
           R"(property secrecy "server-key": assume says Server B {Na, {Na, K}_shrK(A), {Nb, K}_shrK(B)}; assume honest A B; assume no-oops {Na, Nb, K}; secret K)",
           R"(property agreement "a-agreement": trigger says A B {Na, A, B, {Na, A, B}_shrK(A)}; trigger says ?B' A {Na, {Na, K}_shrK(A)}; honest A; guarantee says Server B {Na, {Na, K}_shrK(A), {Nb, K}_shrK(B)})",
           R"(property agreement "b-agreement": trigger says B Server {Na, A, B, ?X', {Na, Nb, A, B}_shrK(B)}; trigger says ?S' B {Na, ?X, {Nb, K}_shrK(B)}; honest B; guarantee says Server B {Na, {Na, K}_shrK(A), {Nb, K}_shrK(B)})",
           R"(property unicity "key-unique": events says Server B {Na, ?X, {Nb, K}_shrK(B)}; key K; determines B Na Nb X)",
           R"(property unicity "na-unique": parts {Na, A, B}_shrK(A); key Na; determines B; honest A)",
       }},
      {"otway-rees-ban",
       {
           R"(property secrecy "server-key": assume says Server B {Na, {Na, K}_shrK(A), {Nb, K}_shrK(B)}; assume honest A B; assume no-oops {Na, Nb, K}; secret K)",
           R"(property agreement "a-agreement": trigger says A B {Na, A, B, {Na, A, B}_shrK(A)}; trigger says ?B' A {Na, {Na, K}_shrK(A)}; honest A B; guarantee says Server B {Na, {Na, K}_shrK(A), {Nb, K}_shrK(B)})",
           R"(property unicity "key-unique": events says Server B {Na, ?X, {Nb, K}_shrK(B)}; key K; determines B Na Nb X)",
       }},
      {"otway-rees-simplified",
       {
           R"(property secrecy "server-key": assume says Server B {Na, {Na, A, B, K}_shrK(A), {Nb, A, B, K}_shrK(B)}; assume honest A B; assume no-oops {Na, Nb, K}; secret K)",
           R"(property agreement "b-present": trigger says A B {A, B, Na}; trigger says ?B' A {Na, {Na, A, B, K}_shrK(A)}; honest A B; guarantee says B Server {A, B, Na, Nb})",
           R"(property agreement "a-agreement": trigger says A B {A, B, Na}; trigger says ?B' A {Na, {Na, A, B, K}_shrK(A)}; honest A; guarantee says Server B {Na, {Na, A, B, K}_shrK(A), {Nb, A, B, K}_shrK(B)})",
       }},
      {"recursive",
       {
           R"(property secrecy "session-key": assume part {K, B, Na}_shrK(A); assume honest A B; secret K)",
       }},
  };
  return texts;
}

bool under_crypt(const Pattern& p, const std::string& var, bool inside) {
  switch (p.kind()) {
    case Pattern::Kind::Var: return p.var_name() == var && inside;
    case Pattern::Kind::MPair:
      return under_crypt(p.first(), var, inside) || under_crypt(p.second(), var, inside);
    case Pattern::Kind::Hash:
    case Pattern::Kind::Crypt: return under_crypt(p.first(), var, true);
    default: return false;
  }
}

}  // namespace

std::vector<PropertySpec> builtin_properties(const std::string& protocol) {
  std::vector<PropertySpec> out;
  auto it = property_texts().find(protocol);
  if (it == property_texts().end()) return out;
  for (const auto& t : it->second) out.push_back(parse_property(t));
  return out;
}

std::vector<PropertySpec> standard_lemmas(const Protocol& proto) {
  std::vector<PropertySpec> out;
  const bool shared = proto.infrastructure == Infrastructure::SharedKey;
  out.push_back(PropertySpec{
      "long-term-keys",
      Regularity{Pattern::key(shared ? KeyTerm::shared(AgentTerm::variable("A"))
                                     : KeyTerm::priv(AgentTerm::variable("A"))),
                 "A"}});
  bool session_keys = proto.server_recursive();
  for (const auto& r : proto.rules)
    for (const auto& f : r.fresh)
      if (f.kind == FreshDecl::Kind::SessionKey) session_keys = true;
  if (session_keys) out.push_back(PropertySpec{"session-key-compromise", SessionKeyCompromise{}});

  for (const auto& r : proto.rules) {
    if (r.action != Rule::Action::Emit) continue;
    for (const auto& prem : r.premises) {
      if (!prem.unknown_sender) continue;
      std::vector<std::pair<std::string, Sort>> vs;
      prem.body.collect_vars(vs);
      for (const auto& [v, s] : vs) {
        if (s != Sort::Opaque || under_crypt(prem.body, v, false)) continue;
        EventPattern any_sender = prem;
        out.push_back(PropertySpec{"forwarding-" + r.name + "-" + v, Forwarding{any_sender, v}});
      }
    }
  }
  if (proto.has_oops()) out.push_back(PropertySpec{"oops-forwarding", OopsForwarding{}});
  return out;
}

bool certificates_mated(const Msg& response) {
  std::map<KeyId, std::vector<Certificate>> by_key;
  for (const auto& c : certificates(response)) by_key[c.key].push_back(c);
  for (const auto& [k, cs] : by_key) {
    if (cs.size() > 2) return false;
    if (cs.size() == 2 && !(cs[0].holder == cs[1].peer && cs[1].holder == cs[0].peer)) return false;
  }
  return true;
}

}  // namespace inducta

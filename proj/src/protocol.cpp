#include "inducta/protocol.hpp"

#include <algorithm>
#include <stdexcept>

namespace inducta {

bool Protocol::has_oops() const {
  return std::any_of(rules.begin(), rules.end(), [](const Rule& r) { return r.is_oops; });
}

bool Protocol::server_recursive() const {
  return std::any_of(rules.begin(), rules.end(),
                     [](const Rule& r) { return r.action == Rule::Action::ServerRespond; });
}

const Rule* Protocol::find_rule(const std::string& n) const {
  for (const auto& r : rules)
    if (r.name == n) return &r;
  return nullptr;
}

Protocol Protocol::without_oops() const {
  Protocol p = *this;
  std::erase_if(p.rules, [](const Rule& r) { return r.is_oops; });
  return p;
}

namespace {

// Shorthands for writing the built-in rule sets.
AgentTerm ag(const char* v) { return AgentTerm::variable(v); }
const AgentTerm kServer = AgentTerm::constant(AgentId::server());
const AgentTerm kSpy = AgentTerm::constant(AgentId::spy());

Pattern A(const char* v) { return Pattern::var(v, Sort::Agent); }
Pattern N(const char* v) { return Pattern::var(v, Sort::Nonce); }
Pattern K(const char* v) { return Pattern::var(v, Sort::Key); }
Pattern X(const char* v) { return Pattern::var(v, Sort::Opaque); }
Pattern Srv() { return Pattern::agent(kServer); }
Pattern tup(std::vector<Pattern> xs) { return Pattern::tuple(std::move(xs)); }
Pattern shr_crypt(const char* owner, Pattern body) {
  return Pattern::crypt(KeyTerm::shared(ag(owner)), std::move(body));
}
Pattern pub_crypt(const char* owner, Pattern body) {
  return Pattern::crypt(KeyTerm::pub(ag(owner)), std::move(body));
}
EventPattern says(AgentTerm a, AgentTerm b, Pattern x) { return EventPattern::says(a, b, x); }
EventPattern heard(const char* unknown, AgentTerm b, Pattern x) {
  return EventPattern::says(ag(unknown), b, x, true);
}
Distinct neq(AgentTerm a, AgentTerm b) { return {std::move(a), std::move(b)}; }
FreshDecl fresh_nonce_decl(const char* v) { return {v, FreshDecl::Kind::Nonce}; }
FreshDecl fresh_key_decl(const char* v) { return {v, FreshDecl::Kind::SessionKey}; }

enum class OtwayVariant { Corrected, Ban, Simplified };

Protocol otway(OtwayVariant variant) {
  Protocol p;
  p.infrastructure = Infrastructure::SharedKey;
  const bool simplified = variant == OtwayVariant::Simplified;
  const bool ban = variant == OtwayVariant::Ban;
  p.name = simplified ? "otway-rees-simplified" : ban ? "otway-rees-ban" : "otway-rees";

  Rule or1{"OR1"};
  or1.fresh = {fresh_nonce_decl("Na")};
  or1.distinct = {neq(ag("A"), ag("B")), neq(ag("B"), kServer)};
  or1.produces = says(ag("A"), ag("B"),
                      simplified ? tup({A("A"), A("B"), N("Na")})
                                 : tup({N("Na"), A("A"), A("B"),
                                        shr_crypt("A", tup({N("Na"), A("A"), A("B")}))}));

  // B's own certificate in message 2.
  Pattern b_cert = ban ? shr_crypt("B", tup({N("Na"), A("A"), A("B")}))
                       : shr_crypt("B", tup({N("Na"), N("Nb"), A("A"), A("B")}));

  Rule or2{"OR2"};
  or2.fresh = {fresh_nonce_decl("Nb")};
  or2.distinct = {neq(ag("B"), kServer)};
  if (simplified) {
    or2.premises = {heard("A'", ag("B"), tup({A("A"), A("B"), N("Na")}))};
    or2.produces = says(ag("B"), kServer, tup({A("A"), A("B"), N("Na"), N("Nb")}));
  } else {
    or2.premises = {heard("A'", ag("B"), tup({N("Na"), A("A"), A("B"), X("X")}))};
    or2.produces =
        says(ag("B"), kServer,
             ban ? tup({N("Na"), A("A"), A("B"), X("X"), N("Nb"), b_cert})
                 : tup({N("Na"), A("A"), A("B"), X("X"), b_cert}));
  }

  Rule or3{"OR3"};
  or3.fresh = {fresh_key_decl("Kab")};
  or3.distinct = {neq(ag("B"), kServer)};
  if (simplified) {
    or3.premises = {heard("B'", kServer, tup({A("A"), A("B"), N("Na"), N("Nb")}))};
    or3.produces = says(kServer, ag("B"),
                        tup({N("Na"), shr_crypt("A", tup({N("Na"), A("A"), A("B"), K("Kab")})),
                             shr_crypt("B", tup({N("Nb"), A("A"), A("B"), K("Kab")}))}));
  } else {
    Pattern a_cert = shr_crypt("A", tup({N("Na"), A("A"), A("B")}));
    or3.premises = {heard("B'", kServer,
                          ban ? tup({N("Na"), A("A"), A("B"), a_cert, N("Nb"), b_cert})
                              : tup({N("Na"), A("A"), A("B"), a_cert, b_cert}))};
    or3.produces = says(kServer, ag("B"),
                        tup({N("Na"), shr_crypt("A", tup({N("Na"), K("Kab")})),
                             shr_crypt("B", tup({N("Nb"), K("Kab")}))}));
  }

  // What B expects back from the server.
  Pattern b_key_cert = simplified ? shr_crypt("B", tup({N("Nb"), A("A"), A("B"), K("K")}))
                                  : shr_crypt("B", tup({N("Nb"), K("K")}));

  Rule or4{"OR4"};
  or4.distinct = {neq(ag("A"), ag("B"))};
  if (simplified) {
    or4.premises = {says(ag("B"), kServer, tup({A("A"), A("B"), N("Na"), N("Nb")}))};
  } else {
    or4.premises = {says(ag("B"), kServer,
                         ban ? tup({N("Na"), A("A"), A("B"), X("X'"), N("Nb"), b_cert})
                             : tup({N("Na"), A("A"), A("B"), X("X'"), b_cert}))};
  }
  or4.premises.push_back(heard("S'", ag("B"), tup({N("Na"), X("X"), b_key_cert})));
  or4.produces = says(ag("B"), ag("A"), tup({N("Na"), X("X")}));

  Rule oops{"Oops"};
  oops.is_oops = true;
  oops.distinct = {neq(ag("B"), kSpy)};
  oops.premises = {says(kServer, ag("B"), tup({N("Na"), X("X"), b_key_cert}))};
  oops.produces = EventPattern::notes(kSpy, tup({N("Na"), N("Nb"), K("K")}));

  p.rules = {or1, or2, or3, or4, oops};
  return p;
}

Protocol ns_public(bool lowe) {
  Protocol p;
  p.name = lowe ? "ns-public-lowe" : "ns-public";
  p.infrastructure = Infrastructure::PublicKey;

  Rule ns1{"NS1"};
  ns1.fresh = {fresh_nonce_decl("Na")};
  ns1.distinct = {neq(ag("A"), ag("B"))};
  ns1.produces = says(ag("A"), ag("B"), pub_crypt("B", tup({N("Na"), A("A")})));

  Pattern reply = lowe ? tup({N("Na"), N("Nb"), A("B")}) : tup({N("Na"), N("Nb")});

  Rule ns2{"NS2"};
  ns2.fresh = {fresh_nonce_decl("Nb")};
  ns2.distinct = {neq(ag("A"), ag("B"))};
  ns2.premises = {heard("A'", ag("B"), pub_crypt("B", tup({N("Na"), A("A")})))};
  ns2.produces = says(ag("B"), ag("A"), pub_crypt("A", reply));

  Rule ns3{"NS3"};
  ns3.premises = {says(ag("A"), ag("B"), pub_crypt("B", tup({N("Na"), A("A")}))),
                  heard("B'", ag("A"), pub_crypt("A", reply))};
  ns3.produces = says(ag("A"), ag("B"), pub_crypt("B", N("Nb")));

  p.rules = {ns1, ns2, ns3};
  return p;
}

Pattern request(const char* owner, std::vector<Pattern> fields) {
  return Pattern::hash_pair(Pattern::key(KeyTerm::shared(ag(owner))), tup(std::move(fields)));
}

Protocol recursive() {
  Protocol p;
  p.name = "recursive";
  p.infrastructure = Infrastructure::SharedKey;

  Rule ra1{"RA1"};
  ra1.fresh = {fresh_nonce_decl("Na")};
  ra1.distinct = {neq(ag("A"), ag("B")), neq(ag("A"), kServer)};
  ra1.produces = says(ag("A"), ag("B"), request("A", {A("A"), A("B"), N("Na"), Srv()}));

  Rule ra2{"RA2"};
  ra2.fresh = {fresh_nonce_decl("Nb")};
  ra2.distinct = {neq(ag("B"), ag("C")), neq(ag("B"), kServer)};
  ra2.premises = {heard("A'", ag("B"), X("PA"))};
  ra2.produces = says(ag("B"), ag("C"), request("B", {A("B"), A("C"), N("Nb"), X("PA")}));

  Rule ra3 = server_respond_rule("RA3");

  Rule ra4{"RA4"};
  ra4.distinct = {neq(ag("A"), ag("B"))};
  ra4.premises = {
      says(ag("B"), ag("C"),
           tup({X("XH"), A("B"), A("C"), N("Nb"), X("XA"), A("A"), A("B"), N("Na"), X("P")})),
      heard("C'", ag("B"),
            tup({shr_crypt("B", tup({K("Kbc"), A("C"), N("Nb")})),
                 shr_crypt("B", tup({K("Kab"), A("A"), N("Nb")})), X("RA")}))};
  ra4.produces = says(ag("B"), ag("A"), X("RA"));

  p.rules = {ra1, ra2, ra3, ra4};
  return p;
}

// Cartesian extension of bindings over unbound agent variables.
void enumerate_agents(std::vector<Binding>& bs, const std::vector<std::string>& vars,
                      const std::vector<AgentId>& agents) {
  for (const auto& v : vars) {
    std::vector<Binding> next;
    for (const auto& b : bs) {
      if (b.bound(v)) {
        next.push_back(b);
        continue;
      }
      for (const auto& a : agents) {
        Binding e = b;
        e.set(v, Msg::agent(a));
        next.push_back(std::move(e));
      }
    }
    bs = std::move(next);
  }
}

bool distinct_ok(const std::vector<Distinct>& ds, const Binding& b) {
  for (const auto& d : ds) {
    auto x = d.lhs.resolve(b);
    auto y = d.rhs.resolve(b);
    if (!x || !y || *x == *y) return false;
  }
  return true;
}

}  // namespace

Rule server_respond_rule(const std::string& name) {
  Rule r{name};
  r.action = Rule::Action::ServerRespond;
  r.distinct = {neq(ag("B"), kServer)};
  r.premises = {heard("B'", kServer, X("PB"))};
  r.produces = says(kServer, ag("B"), X("RB"));
  return r;
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"otway-rees",     "otway-rees-ban",
                                              "otway-rees-simplified", "ns-public",
                                              "ns-public-lowe", "recursive"};
  return names;
}

Protocol builtin(const std::string& name) {
  if (name == "otway-rees") return otway(OtwayVariant::Corrected);
  if (name == "otway-rees-ban") return otway(OtwayVariant::Ban);
  if (name == "otway-rees-simplified") return otway(OtwayVariant::Simplified);
  if (name == "ns-public") return ns_public(false);
  if (name == "ns-public-lowe") return ns_public(true);
  if (name == "recursive") return recursive();
  throw std::invalid_argument("unknown built-in protocol: " + name);
}

namespace {

std::vector<std::string> open_agent_vars(const Rule& rule) {
  std::vector<std::pair<std::string, Sort>> vars;
  rule.produces.collect_vars(vars);
  for (const auto& d : rule.distinct) {
    if (d.lhs.is_var()) vars.emplace_back(d.lhs.var, Sort::Agent);
    if (d.rhs.is_var()) vars.emplace_back(d.rhs.var, Sort::Agent);
  }
  std::vector<std::string> out;
  for (const auto& [v, s] : vars) {
    if (s != Sort::Agent) continue;
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

void fire_into(const Rule& rule, const Binding& matched, const TraceView& view,
               const std::vector<std::string>& open_agents, std::vector<Firing>& out) {
  auto emit = [&](Binding b, std::vector<Msg> fresh) {
    auto ev = rule.produces.substitute(b);
    if (!ev) return;
    for (const auto& f : out)
      if (f.event == *ev) return;
    out.push_back(Firing{std::move(b), std::move(*ev), std::move(fresh)});
  };

  // Agent variables the premises leave open range over the whole population.
  std::vector<Binding> bs{matched};
  enumerate_agents(bs, open_agents, view.pop.agents());
  for (auto& b : bs) {
    if (!distinct_ok(rule.distinct, b)) continue;

    if (rule.action == Rule::Action::ServerRespond) {
      if (rule.premises.empty() || rule.produces.body.kind() != Pattern::Kind::Var) continue;
      auto request = rule.premises.front().body.substitute(b);
      if (!request) continue;
      for (const auto& t : respond(view.used, *request)) {
        Binding e = b;
        e.set(rule.produces.body.var_name(), t.response);
        std::vector<Msg> fresh;
        for (const auto& c : certificates(t.response)) {
          Msg k = Msg::key(c.key);
          if (!view.used.contains(k) && std::find(fresh.begin(), fresh.end(), k) == fresh.end())
            fresh.push_back(k);
        }
        emit(std::move(e), std::move(fresh));
      }
      continue;
    }

    std::vector<Msg> fresh;
    std::uint32_t next_nonce = fresh_nonce(view.used);
    KeyId next_key = fresh_session_key(view.used);
    for (const auto& f : rule.fresh) {
      if (f.kind == FreshDecl::Kind::Nonce) {
        while (view.used.contains(Msg::nonce(next_nonce))) ++next_nonce;
        fresh.push_back(Msg::nonce(next_nonce++));
      } else {
        while (view.used.contains(Msg::key(next_key))) ++next_key.index;
        fresh.push_back(Msg::key(next_key));
        ++next_key.index;
      }
      b.set(f.var, fresh.back());
    }
    emit(std::move(b), std::move(fresh));
  }
}

}  // namespace

std::vector<Firing> fireable(const Rule& rule, const TraceView& view) {
  std::vector<Firing> out;
  auto matches = match_all(rule.premises, view.events);
  if (matches.empty()) return out;
  const auto open = open_agent_vars(rule);
  for (const auto& m : matches) fire_into(rule, m, view, open, out);
  return out;
}

std::vector<Firing> fire_from(const Rule& rule, const Binding& matched, const TraceView& view) {
  std::vector<Firing> out;
  fire_into(rule, matched, view, open_agent_vars(rule), out);
  return out;
}

std::vector<Firing> fireable(const Rule& rule, const Trace& evs, const Population& pop) {
  auto events = evs.oldest_first();
  MsgSet u = used(evs, pop);
  return fireable(rule, TraceView{events, u, pop});
}

Msg end_token() { return Msg::agent(AgentId::server()); }

namespace {

struct Request {
  AgentId from;
  AgentId to;
  Msg nonce;
  Msg inner;
};

// Hash[Key(shrK A)] {Agent A, Agent B, Nonce N, P}, with the digest checked against
// A's long-term key.
std::optional<Request> parse_request(const Msg& p) {
  if (!p.is(MsgKind::MPair)) return std::nullopt;
  const Msg& digest = p.first();
  const Msg& y = p.second();
  if (!y.is(MsgKind::MPair) || !y.first().is(MsgKind::Agent)) return std::nullopt;
  const Msg& r1 = y.second();
  if (!r1.is(MsgKind::MPair) || !r1.first().is(MsgKind::Agent)) return std::nullopt;
  const Msg& r2 = r1.second();
  if (!r2.is(MsgKind::MPair) || !r2.first().is(MsgKind::Nonce)) return std::nullopt;
  AgentId a = y.first().as_agent();
  if (!(digest == Msg::hash(Msg::mpair(Msg::key(KeyId::shared(a)), y)))) return std::nullopt;
  return Request{a, r1.first().as_agent(), r2.first(), r2.second()};
}

KeyId fresh_key_avoiding(const MsgSet& used_set, const MsgSet& also) {
  std::uint32_t i = 0;
  while (used_set.contains(Msg::key(KeyId::session(i))) || also.contains(Msg::key(KeyId::session(i))))
    ++i;
  return KeyId::session(i);
}

Msg cert(AgentId holder, KeyId k, AgentId peer, const Msg& nonce) {
  return Msg::crypt(KeyId::shared(holder), mpair_n({Msg::key(k), Msg::agent(peer), nonce}));
}

}  // namespace

std::vector<RespondTriple> respond(const MsgSet& used_set, const Msg& req_msg) {
  auto req = parse_request(req_msg);
  if (!req) return {};
  if (req->inner == end_token()) {
    if (req->from.is_server()) return {};
    KeyId kab = fresh_key_avoiding(used_set, {});
    Msg r = Msg::mpair(cert(req->from, kab, req->to, req->nonce), end_token());
    return {RespondTriple{req_msg, r, kab}};
  }
  // B = req->from was contacted by A; the inner request must name B as its callee.
  auto inner = parse_request(req->inner);
  if (!inner || !(inner->to == req->from) || req->from.is_server()) return {};
  auto sub = respond(used_set, req->inner);
  if (sub.empty()) return {};
  const auto& [pa, ra, kab] = sub.front();
  KeyId kbc = fresh_key_avoiding(used_set, parts(MsgSet{ra}));
  Msg r = mpair_n({cert(req->from, kbc, req->to, req->nonce),
                   cert(req->from, kab, inner->from, req->nonce), ra});
  return {RespondTriple{req_msg, r, kbc}};
}

std::vector<RespondTriple> respond(const Trace& evs, const Population& pop, const Msg& request) {
  return respond(used(evs, pop), request);
}

bool responses_member(const Msg& r, const MsgSet& used_set) {
  const Msg* cur = &r;
  while (!(*cur == end_token())) {
    if (!cur->is(MsgKind::MPair)) return false;
    const Msg& c = cur->first();
    if (!c.is(MsgKind::Crypt) || c.as_key().kind != KeyId::Kind::SharedLongTerm) return false;
    auto fields = tuple_elements(c.body());
    if (fields.size() != 3 || !fields[0].is(MsgKind::Key) || !fields[1].is(MsgKind::Agent) ||
        !fields[2].is(MsgKind::Nonce))
      return false;
    if (used_set.contains(fields[0])) return false;
    cur = &cur->second();
  }
  return true;
}

bool responses_member(const Msg& r, const Trace& evs, const Population& pop) {
  return responses_member(r, used(evs, pop));
}

std::vector<Certificate> certificates(const Msg& r) {
  std::vector<Certificate> out;
  for (const auto& m : parts(MsgSet{r})) {
    if (!m.is(MsgKind::Crypt) || m.as_key().kind != KeyId::Kind::SharedLongTerm) continue;
    auto f = tuple_elements(m.body());
    if (f.size() != 3 || !f[0].is(MsgKind::Key) || !f[1].is(MsgKind::Agent)) continue;
    out.push_back(Certificate{m.as_key().owner, f[0].as_key(), f[1].as_agent(), f[2]});
  }
  return out;
}

}  // namespace inducta
